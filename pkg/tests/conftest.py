import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def forward_risks(h_y, h_d):
    """Step-by-step state propagation: returns (main CIF, competing CIF, survival) per step.

    Within a step the competing event is drawn first, then the main event
    among those still free. Independent of the vectorized formulas.
    """
    free, main, comp = 1.0, 0.0, 0.0
    out = []
    for hy, hd in zip(h_y, h_d):
        d = free * hd
        free -= d
        y = free * hy
        free -= y
        main += y
        comp += d
        out.append((main, comp, free))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
