import os
import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(scope="session")
def tm_setup():
    """y, visit statistics and a 4-stage schedule for Constant(2) weights on l_2."""
    from shiftlab.constructions.fhc import fhc_schedule
    from shiftlab.constructions.targets import TargetEnumeration
    from shiftlab.constructions.tm import VisitStats, tm_build_schedule
    from shiftlab.weights import Constant

    w, targets = Constant(2), TargetEnumeration()
    y = fhc_schedule(targets, w, p=2, T=4, k_max=4)
    stats = VisitStats(w, y, targets, 10 ** 5)
    sched = tm_build_schedule((0, 0, 0, 0), stats, stages=4)
    return w, targets, y, stats, sched


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
