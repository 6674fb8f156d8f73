import pytest

from lienard import field, hypothesis


@pytest.fixture(scope="session")
def vdp():
    return field.van_der_pol()


@pytest.fixture(scope="session")
def vdp_report(vdp):
    return hypothesis.analyze(vdp)


@pytest.fixture(scope="session")
def exp3():
    return field.exp_field(3.0)


@pytest.fixture(scope="session")
def exp3_report(exp3):
    return hypothesis.analyze(exp3)


@pytest.fixture(scope="session")
def gauss05():
    return field.gauss_field(0.5)


@pytest.fixture(scope="session")
def gauss05_report(gauss05):
    return hypothesis.analyze(gauss05)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert."""
    def check(n, ok, detail):
        _ACCEPTANCE.append((n, bool(ok), detail))
        assert ok, f"criterion {n}: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
