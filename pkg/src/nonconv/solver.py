"""Forward Euler time stepping of the semi-discrete nonlocal convection
equation, with a monotonicity guard and snapshot recording."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from nonconv.discretization import Grid, Stencil

log = logging.getLogger(__name__)

#: default extra padding around the support, in length units
DEFAULT_MARGIN = 1.0
#: padding on the right in units of the spreading standard deviation
SPREAD_SIGMAS = 10.0


class StabilityError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class StabilityReport:
    ok: bool
    margin: float
    tau: float
    max_diagonal: float

    def __bool__(self) -> bool:
        return self.ok


def stability_check(stencil: Stencil, tau: float) -> StabilityReport:
    """Monotone iff ``tau * max_j a_jj <= 1``."""
    amax = stencil.max_diagonal
    margin = 1.0 - tau * amax
    return StabilityReport(margin >= -1e-14, margin, tau, amax)


@dataclass
class SolverState:
    U: np.ndarray
    t: float = 0.0
    step_index: int = 0


@dataclass
class SnapshotStore:
    """Snapshots ``(t_n, U^n)``, always including ``t = 0`` and the final time.

    ``u_min``/``u_max`` track the extremes over *every* step, not just the
    stored ones.
    """

    grid: Grid
    tau: float
    times: list[float] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)
    u_min: float = math.inf
    u_max: float = -math.inf
    edge_max: float = 0.0

    def append(self, state: SolverState) -> None:
        if self.times and state.t <= self.times[-1]:
            raise ValueError("snapshot times must increase")
        self.times.append(state.t)
        self.steps.append(state.step_index)
        self.values.append(state.U.copy())

    def observe(self, U: np.ndarray) -> None:
        self.u_min = min(self.u_min, float(U.min()))
        self.u_max = max(self.u_max, float(U.max()))
        self.edge_max = max(self.edge_max, abs(float(U[0])), abs(float(U[-1])))

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise KeyError(f"no snapshot at t = {t}")
        return self.values[i]


def step(state: SolverState, stencil: Stencil, tau: float) -> SolverState:
    """``U^{n+1} = U^n - tau * D_h U^n`` with zero left extension."""
    with np.errstate(invalid="ignore", over="ignore"):
        # reported below as a SolverError
        U = state.U - tau * (stencil.matrix @ state.U)
    if not np.all(np.isfinite(U)):
        bad = int(np.flatnonzero(~np.isfinite(U))[0])
        raise SolverError(f"non-finite value at node {bad} after step "
                          f"{state.step_index + 1} (t = {state.t + tau:g})")
    n = state.step_index + 1
    return SolverState(U, n * tau, n)


def integrate(stencil: Stencil, U0: np.ndarray, tau: float, T: float,
              cadence: float | None = None) -> SnapshotStore:
    """Run from ``U0`` to ``T``; store every ``cadence`` (default: every step)."""
    report = stability_check(stencil, tau)
    if not report:
        raise StabilityError(
            f"tau * max a_jj = {tau * report.max_diagonal:.4g} > 1; "
            f"scheme is not monotone (need tau <= {1 / report.max_diagonal:.4g})")
    n_steps = _whole(T / tau, "T / tau")
    every = 1 if cadence is None else _whole(cadence / tau, "cadence / tau")

    state = SolverState(np.array(U0, dtype=float), 0.0, 0)
    store = SnapshotStore(stencil.grid, tau)
    store.observe(state.U)
    store.append(state)
    for n in range(1, n_steps + 1):
        state = step(state, stencil, tau)
        store.observe(state.U)
        if n % every == 0 or n == n_steps:
            store.append(state)
    log.debug("integrated %d steps, %d snapshots", n_steps, len(store))
    return store


def _whole(ratio: float, what: str) -> int:
    n = int(round(ratio))
    if n < 0 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"{what} = {ratio:.12g} is not a whole number")
    return n


def choose_domain(support: tuple[float, float], T: float, zeta_max: float,
                  s_max: float, h: float, m2: float = 0.0,
                  margin: float = DEFAULT_MARGIN) -> tuple[float, float]:
    """Grid bounds ``[x_L, x_R]``, both multiples of ``h``.

    The left bound clears the widest stencil; the right bound adds the
    transport distance ``T`` and ``SPREAD_SIGMAS`` standard deviations of the
    nonlocal spreading, whose variance grows like ``T * zeta_max * m2``.
    """
    a, b = support
    reach = zeta_max * s_max
    spread = SPREAD_SIGMAS * math.sqrt(T * zeta_max * m2)
    x_left = a - reach - margin
    x_right = b + T + reach + spread + margin
    return (math.floor(x_left / h + 1e-9) * h, math.ceil(x_right / h - 1e-9) * h)


def run(scenario) -> SnapshotStore:
    """Integrate a validated scenario (see :mod:`nonconv.scenarios`)."""
    return integrate(scenario.stencil, scenario.initial_values(), scenario.tau,
                     scenario.T, scenario.snapshot_cadence)
