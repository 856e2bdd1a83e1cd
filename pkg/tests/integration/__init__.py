"""Integration tests for derivation, runtime and CLI scenarios."""
