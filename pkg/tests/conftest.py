import pytest


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance check, pass or fail
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {name}: {verdict}", flush=True)


@pytest.fixture
def tmp_config(tmp_path):
    """Write a config document to disk and hand back its path."""

    def write(text: str, name: str = "config.json"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return write
