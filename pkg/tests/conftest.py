import os
from pathlib import Path

import pytest

from k3satotate.counting import scan, surface

ROOT = Path(__file__).resolve().parent.parent
SCAN_DIR = Path(os.environ.get("K3ST_SCAN_DIR", ROOT / ".scan-cache"))
PMAX = 10_000

# published moment sequences of the connected groups, the direct products and O(6)^-
TABLE1 = {
    "so2": [1, 0, 2, 0, 6, 0, 20, 0, 70, 0, 252],
    "so3": [1, 0, 1, 1, 3, 6, 15, 36, 91, 232, 603],
    "so5": [1, 0, 1, 0, 3, 1, 15, 15, 105, 190, 945],
    "so6": [1, 0, 1, 0, 3, 0, 16, 0, 126, 0, 1296],
    "u3": [1, 0, 2, 0, 12, 0, 120, 0, 1610, 0, 25956],
}
TABLE2 = {
    "so3xso3": [1, 0, 2, 2, 12, 32, 140, 534, 2324, 10112, 46008],
    "u1cube": [1, 0, 6, 0, 90, 0, 1860, 0, 44730, 0, 1172556],
}
TABLE3 = [1, 0, 1, 0, 3, 0, 14, 0, 84, 0, 594, 0, 4719]

_records = {}


def scan_records(sid: str, pmax: int = PMAX):
    """Trace records of a full scan, resumed from (and saved to) the scan cache."""
    if (sid, pmax) not in _records:
        s = surface(sid)
        cache = scan(s, pmax, SCAN_DIR / f"{sid}.txt")
        _records[sid, pmax] = cache.traces(s, pmax)
    return _records[sid, pmax]


@pytest.fixture(scope="session")
def records():
    return scan_records


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
