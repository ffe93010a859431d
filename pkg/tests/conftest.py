import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numeric property tests do real linear algebra per example; timing deadlines
# only produce flaky failures on loaded machines
settings.register_profile(
    "numeric",
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240814)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and "::" in nodeid:
                rows.append((nodeid.split("::")[-1], outcome))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(set(rows)):
        terminalreporter.write_line(f"{name}: {outcome.upper()}")
