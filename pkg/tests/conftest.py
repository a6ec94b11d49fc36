import numpy as np
import pytest

from nonconv import scenarios
from nonconv.kernel import build_kernel

H = 0.0125
TAU = 0.00625


@pytest.fixture(scope="session")
def kernel():
    return build_kernel("gaussian_paper")


_RUNS = {}


def simulate_config(cfg):
    """Validate and simulate, memoized on the serialized config."""
    key = scenarios.serialize_config(cfg)
    if key not in _RUNS:
        _RUNS[key] = scenarios.simulate(scenarios.validate(cfg))
    return _RUNS[key]


def simulate_preset(name, **overrides):
    cfg = scenarios.preset_config(name)
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return simulate_config(cfg)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


# {{{ acceptance report

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Log one acceptance verdict; the lines are echoed after the run."""
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

# }}}
