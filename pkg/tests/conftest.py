import pytest

from prstoa.experiments import Transmitter
from prstoa.grid import PrsConfig

CRITERIA = {}


def record(number, ok, detail):
    """Store an acceptance-criterion verdict for the end-of-run summary."""
    prev = CRITERIA.get(number)
    if prev is not None:
        ok = ok and prev[0]
        detail = prev[1] + "; " + detail
    CRITERIA[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def cfg():
    return PrsConfig()


@pytest.fixture(scope="session")
def tx(cfg):
    return Transmitter.from_config(cfg)
