"""Jumps of ``u`` and ``u_x`` at fixed singular points.

Two independent routes are provided: difference quotients of the computed
solution (``m1_quotient``) and direct evaluation of the jump evolution laws
(``m2_analytic``), plus transport along local characteristics for
``zeta == 0``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from nonconv.discretization import Grid
from nonconv.kernel import (
    LOCAL, HorizonField, InitialData, LocalPointError, ReferenceKernel,
    gamma_x_jump_integrand, k_of_x)
from nonconv.solver import SnapshotStore

QUANTITIES = ("jump_u", "jump_ux")
METHODS = ("m1_quotient", "m2_analytic", "local_characteristic")


class CoarseSnapshotWarning(UserWarning):
    """Snapshot spacing is too coarse for an accurate time integral."""


class NoJumpWarning(UserWarning):
    """Discontinuity tracking was requested for data without a jump."""


@dataclass
class JumpSeries:
    location: float
    quantity: str
    method: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("jump series times must increase strictly")

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.values.tolist()))

    @property
    def filename(self) -> str:
        return f"{self.quantity}_{format_location(self.location)}_{self.method}.csv"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# location={format_location(self.location)} "
                     f"quantity={self.quantity} method={self.method}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value"])
            for t, v in zip(self.times, self.values):
                w.writerow([repr(float(t)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "JumpSeries":
        with open(path) as fh:
            header = fh.readline()
            meta = dict(item.split("=", 1) for item in header.lstrip("# ").split())
            data = np.loadtxt(fh, delimiter=",", skiprows=1, ndmin=2)
        return cls(float(meta["location"]), meta["quantity"], meta["method"],
                   data[:, 0], data[:, 1])


def format_location(x: float) -> str:
    x = round(float(x), 10) + 0.0
    return f"{x:g}"


# {{{ method 1: difference quotients

def jump_u_m1(U: np.ndarray, j: int) -> float:
    """``U_{j+1} - U_{j-1}``."""
    _check_interior(U, j)
    return float(U[j + 1] - U[j - 1])


def jump_ux_m1(U: np.ndarray, j: int, h: float) -> float:
    """``(U_{j+1} - U_j)/h - (U_j - U_{j-1})/h``."""
    _check_interior(U, j)
    return float((U[j + 1] - U[j]) / h - (U[j] - U[j - 1]) / h)


def _check_interior(U, j):
    if not 0 < j < len(U) - 1:
        raise IndexError(f"node {j} is not interior")


def m1_series(snapshots: SnapshotStore, x_star: float, quantity: str) -> JumpSeries:
    grid = snapshots.grid
    j = grid.index_of(x_star)
    if quantity == "jump_u":
        vals = [jump_u_m1(U, j) for U in snapshots.values]
    else:
        vals = [jump_ux_m1(U, j, grid.h) for U in snapshots.values]
    return JumpSeries(x_star, quantity, "m1_quotient", snapshots.times, vals)

# }}}


# {{{ method 2: jump laws

def _nonlocal_rate(kernel, horizon, x_star, what):
    k = k_of_x(kernel, horizon, x_star)
    if k is LOCAL:
        raise LocalPointError(
            f"zeta({x_star}) = 0: {what} is undefined at a local point")
    return k


def jump_u_m2(kernel: ReferenceKernel, horizon: HorizonField,
              initial: InitialData, x_star: float, t):
    """``exp(-k(x*) t) [psi0](x*)``."""
    k = _nonlocal_rate(kernel, horizon, x_star, "the jump law")
    return np.exp(-k * np.asarray(t, dtype=float)) * initial.value_jump(x_star)


def jump_ux_m2_smooth_horizon(kernel: ReferenceKernel, horizon: HorizonField,
                              initial: InitialData, x_star: float, t):
    """``exp(-k(x*) t) [psi0_x](x*)``; valid where ``zeta'`` is continuous."""
    if any(abs(x_star - b) <= 1e-9 for b in horizon.breakpoints):
        raise ValueError(f"zeta' jumps at x = {x_star}; "
                         "use jump_ux_m2_general")
    k = _nonlocal_rate(kernel, horizon, x_star, "the jump law")
    return np.exp(-k * np.asarray(t, dtype=float)) * initial.deriv_jump(x_star)


def jump_ux_m2_general(kernel: ReferenceKernel, horizon: HorizonField,
                       initial: InitialData, x_star: float,
                       snapshots: SnapshotStore, t_end: float | None = None,
                       bandwidth: int | None = None) -> JumpSeries:
    """Jump of ``u_x`` at ``x*`` including the contribution of a kink in the
    horizon.

    The ``s`` integral is a trapezoidal sum over grid offsets ``s = m h``,
    ``m = 0..bandwidth``, reading the stored solution; the ``tau`` integral
    is a left-endpoint sum at the snapshot spacing.
    """
    k = _nonlocal_rate(kernel, horizon, x_star, "the u_x jump law")
    grid = snapshots.grid
    h = grid.h
    j = grid.index_of(x_star)
    zeta = float(horizon(x_star))
    if bandwidth is None:
        bandwidth = math.ceil(zeta * kernel.s_max / h) + 1

    times = np.asarray(snapshots.times)
    if t_end is not None:
        times = times[times <= t_end + 1e-12]
    n = len(times)
    if n > 1 and np.max(np.diff(times)) > 10 * snapshots.tau * (1 + 1e-9):
        warnings.warn("snapshot spacing exceeds 10 time steps; the time "
                      "integral of the u_x jump law is coarse",
                      CoarseSnapshotWarning, stacklevel=2)

    homogeneous = np.exp(-k * times) * initial.deriv_jump(x_star)
    dzeta = horizon.deriv_jump(x_star)
    if dzeta == 0.0:
        return JumpSeries(x_star, "jump_ux", "m2_analytic", times, homogeneous)

    m = np.arange(bandwidth + 1)
    weights = gamma_x_jump_integrand(kernel, horizon, m * h, x_star) * h
    weights[0] *= 0.5
    weights[-1] *= 0.5
    cols = j - m
    inside = cols >= 0

    inner = np.empty(n)
    for i in range(n):
        U = snapshots.values[i]
        left = np.zeros(len(m))
        left[inside] = U[cols[inside]]
        inner[i] = np.dot(weights, U[j] - left)

    # [d gamma/dx] = -[zeta'] (2 zeta H + s H') / zeta^4 enters the u_x jump
    # equation with a minus sign, so the source term carries +[zeta']
    prefactor = dzeta / zeta ** 4
    dt = np.diff(times)
    values = np.empty(n)
    for i, t in enumerate(times):
        # exact exponential per sample; no recursive accumulation
        acc = np.dot(np.exp(-k * (t - times[:i])), inner[:i] * dt[:i])
        values[i] = homogeneous[i] + prefactor * acc
    return JumpSeries(x_star, "jump_ux", "m2_analytic", times, values)

# }}}


# {{{ local characteristics and tracking

def jump_u_local_characteristic(x_star: float, t: float, initial: InitialData,
                                tol: float = 1e-9) -> float:
    """``[psi0](x* - t)`` if a jump of ``psi0`` sits there, else 0."""
    return initial.value_jump(x_star - t, tol)


def local_characteristic_series(initial: InitialData, x_star: float,
                                times, quantity: str = "jump_u") -> JumpSeries:
    lookup = initial.value_jump if quantity == "jump_u" else initial.deriv_jump
    vals = [lookup(x_star - t, 1e-9) for t in times]
    return JumpSeries(x_star, quantity, "local_characteristic", times, vals)


@dataclass
class TrackedDiscontinuity:
    """Per-snapshot node of the steepest one-node increment ``|U_{j+1}-U_j|``.

    ``dominance`` is that increment over the larger of its two neighbours.
    """

    times: np.ndarray
    nodes: np.ndarray
    positions: np.ndarray
    increments: np.ndarray
    dominance: np.ndarray
    flagged: bool = False
    notes: list[str] = field(default_factory=list)


def track_discontinuity_location(snapshots: SnapshotStore,
                                 initial: InitialData | None = None
                                 ) -> TrackedDiscontinuity:
    flagged = initial is not None and not initial.value_jumps
    notes = []
    if flagged:
        notes.append("initial data has no value jump; locations are meaningless")
        warnings.warn(notes[-1], NoJumpWarning, stacklevel=2)
    nodes, incs, dom = [], [], []
    for U in snapshots.values:
        d = np.abs(np.diff(U))
        j = int(np.argmax(d))  # first maximum: ties go to the smaller index
        nb = max(d[j - 1] if j > 0 else 0.0, d[j + 1] if j + 1 < len(d) else 0.0)
        nodes.append(j)
        incs.append(d[j])
        dom.append(math.inf if nb == 0 else d[j] / nb)
    nodes = np.array(nodes)
    return TrackedDiscontinuity(
        np.asarray(snapshots.times), nodes,
        snapshots.grid.node(nodes) + 0.5 * snapshots.grid.h,
        np.array(incs), np.array(dom), flagged, notes)

# }}}
