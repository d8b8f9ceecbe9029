from pathlib import Path

import pytest

from activeness.lookup import ComponentRecord, LibraryDescriptor

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def make_library(names, organization="search_based", environment="local_cli", paths=None, library_id="lib"):
    paths = paths or {}
    components = tuple(ComponentRecord(n, tuple(paths.get(n, ()))) for n in names)
    return LibraryDescriptor(library_id, organization, environment, components)


_acceptance_lines = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; printed in the terminal summary."""

    def record(label, ok, detail=""):
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" ({detail})" if detail else ""))
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
