import time

import pytest
from hypothesis import HealthCheck, settings

from cantorembed import oracle, regions
from cantorembed.schedule import build

settings.register_profile(
    "default", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

SEED = 7


@pytest.fixture(scope="session")
def built8():
    return build(8, SEED)


@pytest.fixture(scope="session")
def built12():
    t0 = time.perf_counter()
    res = build(12, SEED)
    res.seconds = time.perf_counter() - t0
    return res


@pytest.fixture(scope="session")
def tower8(built8):
    return built8.tower


@pytest.fixture(scope="session")
def sched8(built8):
    return built8.schedule


@pytest.fixture(scope="session")
def decomps8(built8):
    """Quadtree decompositions of levels 1..8 with parents linked."""
    t = built8.tower
    out = {n: regions.decompose(n, t, built8.certificates[n]) for n in range(1, 9)}
    for n in range(1, 8):
        for c in out[n + 1].components:
            c.parent_id = None
    return out


@pytest.fixture(scope="session")
def oracle8(built8):
    return oracle.oracle_expand(built8.tower, 8)


_ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def acceptance():
    """Record (criterion, part, ok, detail) and echo the line."""
    def record(criterion, part, ok, detail=""):
        _ACCEPTANCE.setdefault(criterion, []).append((part, ok, detail))
        print(f"criterion {criterion} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[c]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        body = "; ".join(f"{p}{'' if ok else ' FAILED'}: {d}" for p, ok, d in parts)
        terminalreporter.write_line(f"criterion {c}: {verdict} ({body})")
