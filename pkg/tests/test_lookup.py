import json

import pytest
from hypothesis import given, settings, strategies as st

from activeness.errors import NondeterministicLookupError, TransportError, ValidationError
from activeness.lookup import (
    DEFAULT_WEIGHTS,
    ComponentRecord,
    DropdownListBackend,
    HierarchicalBackend,
    LibraryDescriptor,
    LookupBackend,
    LookupOutcome,
    OrganizationType,
    RemoteBackend,
    SearchIndexBackend,
    TimingConfig,
    WeightTable,
    availability,
    build_backend,
    default_weights,
    load_library,
    lookup,
    measure_access,
    organizedness_weight,
    summarize_trials,
)
from activeness.registry import run_mock_registry

from conftest import make_library

ORGS = list(OrganizationType)


class ScriptedBackend(LookupBackend):
    """Replays fixed (found, elapsed) pairs; warmups consume entries too."""

    def __init__(self, script):
        self.script = iter(script)

    def lookup(self, name):
        found, elapsed = next(self.script)
        return LookupOutcome(found, elapsed, ComponentRecord(name) if found else None)


def test_search_backend_index_has_one_key_per_component():
    backend = build_backend(make_library(["A", "B", "C"], "search_based"))
    assert isinstance(backend, SearchIndexBackend)
    assert sorted(backend.index) == ["A", "B", "C"]


@pytest.mark.parametrize("org", ORGS)
def test_empty_library_finds_nothing(org):
    backend = build_backend(make_library([], org))
    assert lookup(backend, "Anything").found is False
    assert availability(backend, "Anything") == 0


def test_duplicate_names_rejected():
    with pytest.raises(ValidationError, match="Button"):
        make_library(["Button", "Label", "Button"])


@pytest.mark.parametrize("org", ORGS)
def test_lookup_present_and_missing(org):
    lib = make_library(["Button", "Label"], org, paths={"Button": ["ui", "controls"]})
    backend = build_backend(lib)
    hit = lookup(backend, "Button")
    assert hit.found and hit.resolved.name == "Button"
    assert hit.raw_elapsed >= 0
    miss = lookup(backend, "Missing")
    assert not miss.found and miss.resolved is None
    assert availability(backend, "Button") == 1
    assert availability(backend, "Missing") == 0


def test_lookup_is_exact_name_only():
    backend = build_backend(make_library(["Button"], "dropdown_list"))
    for probe in ("button", "Butto", "Button ", "ButtonX"):
        assert not lookup(backend, probe).found


def test_lookup_rejects_empty_name():
    with pytest.raises(ValidationError):
        lookup(build_backend(make_library(["A"])), "")


def test_hierarchical_walks_nested_folders():
    lib = make_library(
        ["Root", "Deep", "Side"], "hierarchical",
        paths={"Deep": ["a", "b", "c"], "Side": ["z"]},
    )
    backend = build_backend(lib)
    assert isinstance(backend, HierarchicalBackend)
    assert lookup(backend, "Deep").resolved.path == ("a", "b", "c")
    assert lookup(backend, "Side").found
    assert lookup(backend, "Root").found


def test_dropdown_entries_are_name_ordered():
    backend = build_backend(make_library(["b", "c", "a"], "dropdown_list"))
    assert isinstance(backend, DropdownListBackend)
    assert [e.name for e in backend.entries] == ["a", "b", "c"]


names = st.text(alphabet="abcdeXYZ_", min_size=1, max_size=4)
segments = st.lists(st.sampled_from(["ui", "data", "io", "net"]), max_size=3)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(names, segments, max_size=200), st.lists(names, min_size=1, max_size=40))
def test_backends_agree_with_linear_scan(library, queries):
    components = [ComponentRecord(n, tuple(p)) for n, p in library.items()]
    for org in ORGS:
        backend = build_backend(LibraryDescriptor("lib", org, "local_cli", tuple(components)))
        for q in queries:
            oracle = any(c.name == q for c in components)
            assert lookup(backend, q).found is oracle


@pytest.mark.parametrize("org", ORGS)
def test_verdicts_repeat(org):
    backend = build_backend(make_library(["A", "B"], org))
    assert {lookup(backend, "A").found for _ in range(20)} == {True}
    assert {lookup(backend, "Q").found for _ in range(20)} == {False}


@pytest.mark.parametrize("per_trial, t", [
    ([5e-3, 3e-3, 9e-3], 5e-3),
    ([4e-7, 6e-7, 8e-7], 1e-6),
    ([2e-3], 2e-3),
])
def test_measure_access_median_and_floor(per_trial, t):
    warmups = 2
    script = [(True, 1.0)] * warmups + [(True, x) for x in per_trial]
    m = measure_access(ScriptedBackend(script), "X", TimingConfig(trials=len(per_trial), warmups=warmups))
    assert m.per_trial == tuple(per_trial)
    assert m.t == t
    assert m.found


def test_measure_access_discards_warmups():
    script = [(True, 100.0)] * 3 + [(True, 1e-3)] * 5
    m = measure_access(ScriptedBackend(script), "X", TimingConfig(trials=5, warmups=3))
    assert m.t == 1e-3


def test_measure_access_detects_flapping_backend():
    script = [(True, 1e-3), (False, 1e-3), (True, 1e-3)]
    with pytest.raises(NondeterministicLookupError):
        measure_access(ScriptedBackend(script), "X", TimingConfig(trials=3, warmups=0))


def test_measure_access_sentinel():
    backend = build_backend(make_library(["A"]))
    m = measure_access(backend, "A", TimingConfig(trials=4, warmups=0), sentinel=0.25)
    assert m.per_trial == (0.25,) * 4 and m.t == 0.25 and m.found


def test_measure_access_real_backend_respects_floor():
    m = measure_access(build_backend(make_library(["A"])), "A", TimingConfig(trials=5, warmups=1))
    assert len(m.per_trial) == 5
    assert all(x >= 0 for x in m.per_trial)
    assert m.t >= 1e-6


@given(st.lists(st.floats(min_value=0, max_value=10), min_size=1, max_size=30), st.randoms())
def test_median_permutation_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert summarize_trials(values) == summarize_trials(shuffled)
    assert summarize_trials(values) >= 1e-6


@pytest.mark.parametrize("bad", [dict(trials=0), dict(warmups=-1), dict(statistic="mean")])
def test_timing_config_validation(bad):
    with pytest.raises(ValidationError):
        TimingConfig(**bad)


def test_default_weight_table():
    assert organizedness_weight(DEFAULT_WEIGHTS, OrganizationType.SEARCH_BASED) == 3.0
    assert organizedness_weight(DEFAULT_WEIGHTS, OrganizationType.DROPDOWN_LIST) == 2.0
    assert organizedness_weight(DEFAULT_WEIGHTS, OrganizationType.HIERARCHICAL) == 1.0


def test_uniform_weight_table():
    table = WeightTable.from_dict({"hierarchical": 1, "search_based": 1, "dropdown_list": 1})
    assert {organizedness_weight(table, o) for o in ORGS} == {1.0}


@pytest.mark.parametrize("data", [
    {"hierarchical": 1, "search_based": 1},
    {"hierarchical": 1, "search_based": 1, "dropdown_list": 0},
    {"hierarchical": 1, "search_based": 1, "dropdown_list": 1, "tree": 2},
])
def test_weight_table_validation(data):
    with pytest.raises(ValidationError):
        WeightTable.from_dict(data)


def test_weights_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"hierarchical": 5.0, "search_based": 7.0, "dropdown_list": 6.0}))
    monkeypatch.setenv("CAQ_DEFAULT_WEIGHTS", str(path))
    assert organizedness_weight(default_weights(), "search_based") == 7.0
    monkeypatch.delenv("CAQ_DEFAULT_WEIGHTS")
    assert default_weights() is DEFAULT_WEIGHTS


def test_load_library_fixture(fixtures_dir):
    lib = load_library(fixtures_dir / "widgets.json")
    assert lib.library_id == "widgets"
    assert lib.organization is OrganizationType.SEARCH_BASED
    assert [c.name for c in lib.components] == ["Button", "TextField", "Slider", "DataGrid"]
    assert LibraryDescriptor.from_dict(lib.to_dict()) == lib


@pytest.mark.parametrize("patch, match", [
    ({"environment": "network"}, "remote_endpoint"),
    ({"remote_endpoint": "http://x:1"}, "local environment"),
    ({"environment": "internet", "remote_endpoint": "ftp://x"}, "URL"),
    ({"organization": "alphabetical"}, "organization"),
    ({"colour": "red"}, "unknown field"),
    ({"components": [{"name": "A", "path": ["ok", ""]}]}, "path"),
    ({"components": [{"name": "A", "tags": []}]}, "unknown field"),
])
def test_descriptor_validation(patch, match):
    data = {"library_id": "x", "organization": "search_based", "environment": "local_cli", "components": []}
    data.update(patch)
    with pytest.raises(ValidationError, match=match):
        LibraryDescriptor.from_dict(data)


def test_missing_library_file(tmp_path):
    with pytest.raises(ValidationError, match="cannot read"):
        load_library(tmp_path / "nope.json")


def _remote(url, org="search_based"):
    return LibraryDescriptor("remote", org, "network", (), url)


def test_remote_backend_against_mock_registry():
    fixture = make_library(["Button", "Sl/ider"], paths={"Button": ["ui"]})
    with run_mock_registry(fixture) as server:
        with build_backend(_remote(server.url)) as backend:
            assert isinstance(backend, RemoteBackend)
            hit = lookup(backend, "Button")
            assert hit.found and hit.resolved == ComponentRecord("Button", ("ui",))
            assert lookup(backend, "Sl/ider").found
            assert lookup(backend, "Nope").found is False
            assert availability(backend, "Nope") == 0


def test_remote_transport_failure_is_not_unavailability():
    with run_mock_registry(make_library([])) as server:
        url = server.url
    with build_backend(_remote(url), timeout=1.0) as backend:
        with pytest.raises(TransportError):
            lookup(backend, "Button")
        with pytest.raises(TransportError):
            availability(backend, "Button")


def test_remote_unexpected_status_is_transport_error():
    with run_mock_registry(make_library(["A"])) as server:
        with build_backend(_remote(server.url + "/v1")) as backend:
            # the registry answers 400 for paths outside /components/
            with pytest.raises(TransportError, match="400"):
                lookup(backend, "A")
