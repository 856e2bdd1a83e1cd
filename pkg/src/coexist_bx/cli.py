"""Command line interface for coexist-bx."""

import json
import logging
from pathlib import Path
from typing import Callable, List, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from rich.text import Text

from .config import CoexistConfig, config
from .errors import CoexistError
from .managers import DerivationManager, ScriptRunner, SqlEmitter, VerificationManager
from .models.bx import BxSpec, DerivedBx
from .models.sql import SqlDialect
from .models.verification import Outcome, VerificationMode, VerificationReport

app = typer.Typer(
    name="coexist-bx",
    help="Co-existing schema versions: derive, verify, simulate and emit SQL for view updates",
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

SpecOption = typer.Option(..., "--spec", "-s", exists=True, dir_okay=False, help="Spec file (.dl)")
MinOption = typer.Option(None, "--min", help="Smallest universe constant")
MaxOption = typer.Option(None, "--max", help="Largest universe constant")
MaxSizeOption = typer.Option(None, "--max-size", help="Maximum tuples per relation")
ModeOption = typer.Option(None, "--mode", help="exhaustive or sampled")
SeedOption = typer.Option(None, "--seed", help="Seed for sampled mode")
JointMaxOption = typer.Option(None, "--joint-max", help="Largest constant for joint checks")
JointMaxSizeOption = typer.Option(None, "--joint-max-size", help="Relation size for joint checks")
KeyConstantOption = typer.Option(
    None, "--key-constant", "-k", help="String constant for key columns (repeatable)"
)
VerboseOption = typer.Option(False, "--verbose", "-v", help="Debug logging")

BOUNDS_EPILOG = (
    "Unset bounds fall back to COEXIST_BX_VERIFICATION__* environment variables, "
    "e.g. COEXIST_BX_VERIFICATION__MAX_CONSTANT=9. "
    "COEXIST_BX_VERIFICATION__KEY_CONSTANTS takes a JSON list."
)


def _setup_logging(settings: CoexistConfig, verbose: bool) -> None:
    level = "DEBUG" if verbose or settings.debug else settings.log_level.upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _settings(**overrides: object) -> CoexistConfig:
    """Global config with command-line overrides for the verification bounds."""
    names = {
        "min": "min_constant",
        "max": "max_constant",
        "max_size": "max_size",
        "mode": "mode",
        "seed": "seed",
        "joint_max": "joint_max_constant",
        "joint_max_size": "joint_max_size",
        "key_constants": "key_constants",
    }
    update = {names[k]: v for k, v in overrides.items() if v is not None and v != []}
    verification = config.verification.model_validate(
        {**config.verification.model_dump(), **update}
    )
    return config.model_copy(update={"verification": verification})


def _run(action: Callable[[], int]) -> None:
    """Map domain errors to exit 1 and I/O errors to exit 2."""
    try:
        code = action()
    except CoexistError as e:
        err_console.print(Text.assemble(("error: ", "bold red"), str(e)))
        raise typer.Exit(1)
    except (OSError, ValueError) as e:
        err_console.print(Text.assemble(("usage error: ", "bold red"), str(e).splitlines()[0]))
        raise typer.Exit(2)
    raise typer.Exit(code)


def _report_table(reports: list[VerificationReport]) -> Table:
    table = Table(title="Verification")
    table.add_column("Law", style="cyan")
    table.add_column("Outcome")
    table.add_column("Cases", justify="right")
    for report in reports:
        style = "green" if report.outcome == Outcome.PASS else "red"
        table.add_row(report.law.value, Text(report.outcome.value, style=style), str(report.cases))
    return table


def _derive_or_load(
    deriver: DerivationManager, spec: BxSpec, derived_dir: Optional[Path], verify: bool
) -> DerivedBx:
    if derived_dir is not None:
        return deriver.load_derived(spec, derived_dir)
    settings = deriver.config.verification
    return deriver.derive_all(
        spec, settings.universe(), settings.joint_universe(), verify=verify
    )


@app.command()
def version():
    """Show version information."""
    from . import __version__
    console.print(f"coexist-bx v{__version__}")


@app.command()
def config_show():
    """Show current configuration."""
    v = config.verification
    console.print("Current Configuration:")
    console.print(f"  Constants: {v.min_constant}..{v.max_constant}")
    console.print(f"  Max Relation Size: {v.max_size}")
    console.print(f"  Joint Constants: {v.min_constant}..{v.joint_max_constant}")
    console.print(f"  Joint Max Relation Size: {v.joint_max_size}")
    console.print(f"  Mode: {v.mode.value} (samples {v.sample_count}, seed {v.seed})")
    console.print(f"  Key Constants: {', '.join(v.key_constants) or '-'}")
    console.print(f"  Derived Dir: {config.output.derived_dir}")
    console.print(f"  SQL Dir: {config.output.sql_dir}")
    console.print(f"  SQL Dialect: {config.sql.dialect.value}")
    console.print(f"  Debug Mode: {config.debug}")


@app.command(epilog=BOUNDS_EPILOG)
def derive(
    spec: Path = SpecOption,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    min_constant: Optional[int] = MinOption,
    max_constant: Optional[int] = MaxOption,
    max_size: Optional[int] = MaxSizeOption,
    mode: Optional[VerificationMode] = ModeOption,
    seed: Optional[int] = SeedOption,
    joint_max: Optional[int] = JointMaxOption,
    joint_max_size: Optional[int] = JointMaxSizeOption,
    key_constants: Optional[List[str]] = KeyConstantOption,
    verify: bool = typer.Option(True, "--verify/--no-verify", help="Verify steps 1 and 4"),
    verbose: bool = VerboseOption,
):
    """Derive get, putdelta', undef and get' from a putdelta spec."""

    def action() -> int:
        settings = _settings(
            min=min_constant, max=max_constant, max_size=max_size, mode=mode, seed=seed,
            joint_max=joint_max, joint_max_size=joint_max_size, key_constants=key_constants,
        )
        _setup_logging(settings, verbose)
        deriver = DerivationManager(settings)
        derived = _derive_or_load(deriver, deriver.load_spec(spec), None, verify)
        target = out or settings.derived_path()
        written = deriver.write_derived(derived, target)

        table = Table(title=f"Derived programs in {target}")
        table.add_column("File", style="cyan")
        table.add_column("Rules", justify="right")
        for path in written:
            rules = len(getattr(derived, path.stem).rules)
            table.add_row(path.name, str(rules))
        console.print(table)
        return 0

    _run(action)


@app.command(epilog=BOUNDS_EPILOG)
def verify(
    spec: Path = SpecOption,
    derived_dir: Optional[Path] = typer.Option(
        None, "--derived", "-d", file_okay=False, help="Check previously derived programs"
    ),
    min_constant: Optional[int] = MinOption,
    max_constant: Optional[int] = MaxOption,
    max_size: Optional[int] = MaxSizeOption,
    mode: Optional[VerificationMode] = ModeOption,
    seed: Optional[int] = SeedOption,
    joint_max: Optional[int] = JointMaxOption,
    joint_max_size: Optional[int] = JointMaxSizeOption,
    key_constants: Optional[List[str]] = KeyConstantOption,
    as_json: bool = typer.Option(False, "--json", help="Print the structured report"),
    verbose: bool = VerboseOption,
):
    """Check GetPut, PutGet, totality and range definedness."""

    def action() -> int:
        settings = _settings(
            min=min_constant, max=max_constant, max_size=max_size, mode=mode, seed=seed,
            joint_max=joint_max, joint_max_size=joint_max_size, key_constants=key_constants,
        )
        _setup_logging(settings, verbose)
        deriver = DerivationManager(settings)
        verifier = deriver.verifier
        bx_spec = deriver.load_spec(spec)

        if not bx_spec.views and bx_spec.putdelta.is_empty:
            logging.getLogger(__name__).warning("Empty spec: every law holds vacuously (0 cases)")
            reports = [
                VerificationReport(law=law, outcome=Outcome.PASS, cases=0, notes=("empty spec",))
                for law in VerificationManager.LAWS
            ]
        else:
            derived = _derive_or_load(deriver, bx_spec, derived_dir, verify=False)
            reports = verifier.verify_derived(
                derived,
                settings.verification.universe(),
                settings.verification.joint_universe(),
            )

        if as_json:
            typer.echo(json.dumps({"reports": [r.to_document() for r in reports]}, indent=2))
        else:
            console.print(_report_table(reports))
            for report in reports:
                if report.counterexample is not None or report.notes:
                    console.print(Text(report.render_text()))
        return 0 if all(r.passed for r in reports) else 1

    _run(action)


@app.command()
def simulate(
    script: Path = typer.Option(..., "--script", exists=True, dir_okay=False, help="Scenario (.cosx)"),
    verify: bool = typer.Option(False, "--verify/--no-verify", help="Verify each spec when loaded"),
    verbose: bool = VerboseOption,
):
    """Replay a multi-version scenario script."""

    def action() -> int:
        _setup_logging(config, verbose)
        result = ScriptRunner(config, verify=verify).run_file(script)
        for block in result.output:
            console.print(Text(block))
        return 0 if result.ok else 1

    _run(action)


@app.command("emit-sql", epilog=BOUNDS_EPILOG)
def emit_sql(
    spec: Path = SpecOption,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    derived_dir: Optional[Path] = typer.Option(
        None, "--derived", "-d", file_okay=False, help="Use previously derived programs"
    ),
    dialect: Optional[SqlDialect] = typer.Option(None, "--dialect", help="generic or ansi"),
    min_constant: Optional[int] = MinOption,
    max_constant: Optional[int] = MaxOption,
    max_size: Optional[int] = MaxSizeOption,
    mode: Optional[VerificationMode] = ModeOption,
    seed: Optional[int] = SeedOption,
    joint_max: Optional[int] = JointMaxOption,
    joint_max_size: Optional[int] = JointMaxSizeOption,
    key_constants: Optional[List[str]] = KeyConstantOption,
    verify: bool = typer.Option(True, "--verify/--no-verify", help="Verify the derivation first"),
    verbose: bool = VerboseOption,
):
    """Write CREATE VIEW and INSTEAD OF trigger files."""

    def action() -> int:
        settings = _settings(
            min=min_constant, max=max_constant, max_size=max_size, mode=mode, seed=seed,
            joint_max=joint_max, joint_max_size=joint_max_size, key_constants=key_constants,
        )
        _setup_logging(settings, verbose)
        deriver = DerivationManager(settings)
        derived = _derive_or_load(deriver, deriver.load_spec(spec), derived_dir, verify)
        emitter = SqlEmitter(settings, dialect)
        written = emitter.write(emitter.emit(derived), out or settings.sql_path())
        for path in written:
            console.print(f"  wrote {path}")
        return 0

    _run(action)


def main():
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
