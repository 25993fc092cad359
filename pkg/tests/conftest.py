from importlib import resources

import pytest


@pytest.fixture(scope="session")
def fixture_path():
    return str(resources.files("seclab") / "data" / "fixture_stream.jsonl")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
