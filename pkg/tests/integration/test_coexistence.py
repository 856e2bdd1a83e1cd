"""Two schema versions sharing one physical table."""

import pytest

from coexist_bx.models import Delta, ViewRef

pytestmark = pytest.mark.integration


@pytest.fixture
def store(registry, deriver, data_dir):
    scripts = data_dir / "scripts"
    identity = deriver.derive_all(deriver.load_spec(scripts / "identity_keyed.dl"), verify=False)
    two_views = deriver.derive_all(deriver.load_spec(scripts / "two_views_keyed.dl"), verify=False)
    registry.register_version("ver1", {"s_view": identity})
    registry.register_version("ver2", {"v1": two_views, "v2": two_views})
    registry.update_view("ver1", "s_view", Delta.of(inserted=[("p1", 3), ("p2", 6), ("p3", 9)]))
    return registry


class TestCoexistence:
    """Updates through either version stay visible in the other."""

    def test_initial_state(self, store):
        assert store.query_view("ver2", "v1") == {("p2", 6), ("p3", 9)}
        assert store.query_view("ver2", "v2") == {("p3", 9)}

    def test_version1_insert_reaches_selection(self, store):
        record = store.update_view("ver1", "s_view", Delta.of(inserted=[("p4", 5)]))

        assert ViewRef(version="ver2", view="v1") in record.changed_views()
        assert ViewRef(version="ver2", view="v2") not in record.changed_views()

    def test_version2_insert_reaches_version1(self, store):
        store.update_view("ver2", "v1", Delta.of(inserted=[("p4", 5)]))

        assert ("p4", 5) in store.physical["s"]
        assert ("p4", 5) in store.query_view("ver1", "s_view")

    def test_row_outside_selection_is_private(self, store):
        record = store.update_view("ver2", "v1", Delta.of(inserted=[("p5", 3)]))

        assert record.aux_delta == {"v1_ud": Delta.of(inserted=[("p5", 3)])}
        assert ("p5", 3) in store.query_view("ver2", "v1")
        assert ("p5", 3) not in store.query_view("ver1", "s_view")
        assert ("p5", 3) not in store.query_view("ver2", "v2")
        assert record.changed_views() == [ViewRef(version="ver2", view="v1")]

    def test_delete_through_version2(self, store):
        store.update_view("ver2", "v2", Delta.of(deleted=[("p3", 9)]))

        assert store.query_view("ver1", "s_view") == {("p1", 3), ("p2", 6)}
        assert store.query_view("ver2", "v1") == {("p2", 6)}

    def test_script_matches_direct_updates(self, runner, data_dir):
        result = runner.run_file(data_dir / "scripts" / "coexistence.cosx")

        assert result.ok
        assert runner.registry.physical["s"] == {("p1", 3), ("p2", 6), ("p3", 9), ("p4", 5)}
        assert runner.registry.physical["v1_ud"] == {("p5", 3)}

    def test_leaked_row_expectation_fails(self, runner, data_dir):
        result = runner.run_file(data_dir / "scripts" / "leaked_row.cosx")

        assert [f.line for f in result.failures] == [8]
