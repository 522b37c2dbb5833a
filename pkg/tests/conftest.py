import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_point_coeffs(rng, d):
    return rng.dirichlet(np.ones(d * d)).reshape(d, d)


# acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary
_CRITERIA: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def note(request):
    """Attach a line of evidence to the running acceptance criterion."""
    entry = _CRITERIA.setdefault(request.node.nodeid, {"notes": []})

    def add(text: str) -> None:
        entry["notes"].append(text)

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    entry = _CRITERIA.setdefault(item.nodeid, {"notes": []})
    entry.update(number=mark.args[0], title=mark.args[1], passed=rep.passed, seconds=rep.duration)


def pytest_terminal_summary(terminalreporter):
    done = [e for e in _CRITERIA.values() if "number" in e]
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for e in sorted(done, key=lambda e: e["number"]):
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {e['number']:>2}: {e['title']} ({e['seconds']:.1f} s)")
        for line in e["notes"]:
            terminalreporter.write_line(f"      {line}")
