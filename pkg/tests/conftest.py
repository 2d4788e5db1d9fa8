import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import tiletool as tt

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def auto_report_32():
    """Auto-selected displacement solve at window half-width 32."""
    return tt.solve_displacements_auto(32)


@pytest.fixture(scope="session")
def kargaev_sets(auto_report_32):
    """(report, point set) per window half-width, all at the auto-selected r."""
    out = {32: (auto_report_32, tt.build_translation_set(auto_report_32.alpha))}
    for n in (8, 16):
        rep = tt.solve_displacements(auto_report_32.r, n)
        out[n] = (rep, tt.build_translation_set(rep.alpha))
    return out


@pytest.fixture(scope="session")
def unit_tiler():
    return tt.build_schwartz_tiler(1.0, 0.4)
