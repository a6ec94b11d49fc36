r"""Reference kernel, horizon field and initial data.

The interaction kernel is built from a reference profile ``H`` and a
spatially varying horizon ``zeta``:

.. math::

    \gamma(s, x) = \frac{1}{\zeta(x)^2} H\left(\frac{s}{\zeta(x)}\right),
    \qquad \int_0^\infty y H(y)\,dy = 1.

Points with ``zeta(x) == 0`` are *local*: the nonlocal derivative reduces to
``u_x`` there and no kernel exists. Functions that need a kernel raise
:class:`LocalPointError` at such points; :func:`k_of_x` returns the
:data:`LOCAL` sentinel instead.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

from nonconv.quadrature import adaptive_gauss_legendre

#: tolerance on |m1 - 1| below which a profile counts as normalized
NORMALIZATION_TOL = 1e-10


class LocalPointError(ValueError):
    """Raised when a kernel quantity is requested where ``zeta(x) == 0``."""


class _LocalPoint:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "LOCAL"

    def __reduce__(self):
        return (_LocalPoint, ())


#: returned by :func:`k_of_x` at points where the horizon vanishes
LOCAL = _LocalPoint()


# {{{ reference kernel

class ReferenceKernel:
    """A smooth, fast-decaying, normalized profile ``H(y)`` on ``y >= 0``.

    Moments are integrated once, on ``[0, support_radius(tail_tol)]``.
    """

    def __init__(self, profile: Callable[[np.ndarray], np.ndarray],
                 derivative: Callable[[np.ndarray], np.ndarray],
                 name: str = "custom", tail_tol: float = 1e-12):
        self._profile = profile
        self._derivative = derivative
        self.name = name
        self.tail_tol = tail_tol

        probe = profile(np.linspace(0.0, 50.0, 5001))
        if np.any(probe < 0) or not np.all(np.isfinite(probe)):
            raise ValueError(f"kernel {name!r} must be finite and nonnegative")

        self.s_max = self.support_radius(tail_tol)
        quad = lambda g: adaptive_gauss_legendre(g, 0.0, self.s_max, tol=1e-12)  # noqa: E731
        self.m0 = quad(lambda y: profile(y))
        self.m1 = quad(lambda y: y * profile(y))
        self.m2 = quad(lambda y: y * y * profile(y))

        if abs(self.m1 - 1.0) > NORMALIZATION_TOL:
            raise ValueError(
                f"kernel {name!r} has first moment {self.m1!r}; "
                "expected 1 (profiles are not renormalized)")
        if not (0 < self.m0 < math.inf and 0 < self.m2 < math.inf):
            raise ValueError(f"kernel {name!r} has degenerate moments")

    def __call__(self, y):
        return self._profile(np.asarray(y, dtype=float))

    def eval(self, y):
        return self(y)

    def deriv(self, y):
        return self._derivative(np.asarray(y, dtype=float))

    def tail_mass(self, s: float) -> float:
        """``int_s^inf y H(y) dy``."""
        val, _ = integrate.quad(lambda y: y * self._profile(np.float64(y)),
                                s, np.inf, epsabs=1e-300, epsrel=1e-12, limit=200)
        return val

    def support_radius(self, tol: float = 1e-12) -> float:
        """Smallest ``S`` with ``int_S^inf y H(y) dy < tol``."""
        if self.tail_mass(0.0) < tol:
            return 0.0
        hi = 1.0
        while self.tail_mass(hi) >= tol:
            hi *= 2.0
            if hi > 1e6:
                raise ValueError("kernel tail decays too slowly")
        return optimize.brentq(lambda s: self.tail_mass(s) - tol, 0.0, hi,
                               xtol=1e-14, rtol=1e-14)

    def __repr__(self) -> str:
        return f"ReferenceKernel({self.name!r}, m0={self.m0:.6g}, s_max={self.s_max:.4g})"


def gaussian_paper() -> ReferenceKernel:
    """``H(y) = 20 exp(-10 y^2)``."""
    return ReferenceKernel(
        lambda y: 20.0 * np.exp(-10.0 * y * y),
        lambda y: -400.0 * y * np.exp(-10.0 * y * y),
        name="gaussian_paper")


_KERNELS = {"gaussian_paper": gaussian_paper}
_KERNEL_CACHE: dict[str, ReferenceKernel] = {}


def build_kernel(name: str) -> ReferenceKernel:
    if name not in _KERNELS:
        raise ValueError(f"unknown kernel {name!r}; known: {sorted(_KERNELS)}")
    if name not in _KERNEL_CACHE:
        _KERNEL_CACHE[name] = _KERNELS[name]()
    return _KERNEL_CACHE[name]

# }}}


# {{{ descriptors

_DESCRIPTOR_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*$")


def parse_descriptor(text: str) -> tuple[str, tuple[float, ...]]:
    """Split ``"name(a, b)"`` into ``("name", (a, b))``."""
    m = _DESCRIPTOR_RE.match(text)
    if m is None:
        raise ValueError(f"malformed descriptor {text!r}")
    name, args = m.group(1), m.group(2)
    if not args:
        return name, ()
    try:
        return name, tuple(float(a) for a in args.split(","))
    except ValueError:
        raise ValueError(f"non-numeric argument in descriptor {text!r}") from None


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))

# }}}


# {{{ horizon

@dataclass(frozen=True)
class HorizonField:
    """Continuous nonnegative horizon ``zeta(x)``.

    ``kind`` is one of ``erfc``, ``ramp``, ``constant``; ``param`` is the
    scale exponent alpha, the ramp slope, or the constant value. Every family
    here is nondecreasing in ``x``.
    """

    kind: str
    param: float
    cap: float = 6.0
    breakpoints: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        if self.kind == "ramp":
            bps = (0.0, self.cap / self.param)
        else:
            bps = ()
        object.__setattr__(self, "breakpoints", bps)

    @property
    def descriptor(self) -> str:
        if self.kind == "constant":
            return "zero" if self.param == 0 else f"constant({_fmt(self.param)})"
        if self.kind == "ramp" and self.cap != 6.0:
            return f"ramp({_fmt(self.param)}, {_fmt(self.cap)})"
        return f"{self.kind}({_fmt(self.param)})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "erfc":
            out = special.erfc(-x / 2.0 ** self.param)
        elif self.kind == "ramp":
            out = np.clip(self.param * x, 0.0, self.cap)
        else:
            out = np.full_like(x, self.param)
        return out if out.ndim else float(out)

    def eval(self, x):
        return self(x)

    def _smooth_deriv(self, x):
        c = 2.0 ** self.param
        return 2.0 / (math.sqrt(math.pi) * c) * np.exp(-(x / c) ** 2)

    def deriv_left(self, x: float) -> float:
        x = float(x)
        if self.kind == "erfc":
            return float(self._smooth_deriv(x))
        if self.kind == "ramp":
            return self.param if 0.0 < x <= self.cap / self.param else 0.0
        return 0.0

    def deriv_right(self, x: float) -> float:
        x = float(x)
        if self.kind == "erfc":
            return float(self._smooth_deriv(x))
        if self.kind == "ramp":
            return self.param if 0.0 <= x < self.cap / self.param else 0.0
        return 0.0

    def deriv_jump(self, x: float) -> float:
        """``zeta'(x+) - zeta'(x-)``; zero away from breakpoints."""
        return self.deriv_right(x) - self.deriv_left(x)

    @property
    def delta(self) -> float:
        """``sup zeta``."""
        if self.kind == "erfc":
            return 2.0
        if self.kind == "ramp":
            return self.cap
        return self.param

    def delta_min(self, a: float, b: float) -> float:
        """``inf zeta`` over ``[a, b]`` (families are nondecreasing)."""
        return float(self(min(a, b)))

    @property
    def is_zero(self) -> bool:
        return self.kind == "constant" and self.param == 0.0


def build_horizon(desc) -> HorizonField:
    """Build a horizon from a descriptor string such as ``"erfc(0)"``,
    ``"ramp(2)"``, ``"constant(0.1)"`` or ``"zero"``."""
    if isinstance(desc, HorizonField):
        return desc
    name, args = parse_descriptor(desc)
    if name == "erfc":
        if len(args) != 1:
            raise ValueError("erfc horizon takes one argument (alpha)")
        return HorizonField("erfc", args[0])
    if name == "ramp":
        if len(args) not in (1, 2):
            raise ValueError("ramp horizon takes a slope and an optional cap")
        slope = args[0]
        cap = args[1] if len(args) == 2 else 6.0
        if slope <= 0 or cap <= 0:
            raise ValueError(f"ramp slope and cap must be positive, got {desc!r}")
        return HorizonField("ramp", slope, cap)
    if name == "constant":
        if len(args) != 1:
            raise ValueError("constant horizon takes one argument")
        if args[0] < 0:
            raise ValueError(f"horizon must be nonnegative, got {desc!r}")
        return HorizonField("constant", args[0])
    if name == "zero":
        if args:
            raise ValueError("zero horizon takes no arguments")
        return HorizonField("constant", 0.0)
    raise ValueError(f"unknown horizon descriptor {desc!r}")

# }}}


# {{{ initial data

#: gaussian data is treated as zero where it falls below this level
GAUSSIAN_CUTOFF = 1e-16


@dataclass(frozen=True)
class InitialData:
    """Initial profile ``psi0``: ``gaussian``, ``square`` or ``hat``."""

    kind: str
    p: float = 1.0

    @property
    def descriptor(self) -> str:
        return "gaussian" if self.kind == "gaussian" else f"{self.kind}({_fmt(self.p)})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = self.p
        if self.kind == "gaussian":
            out = np.exp(-10.0 * x * x)
        elif self.kind == "square":
            out = np.where((x > -p) & (x < 0), 1.0 / p,
                           np.where((x >= 0) & (x < p), -1.0 / p, 0.0))
        else:
            out = np.where(np.abs(x) < p, 1.0 - np.abs(x) / p, 0.0)
        return out if out.ndim else float(out)

    def eval(self, x):
        return self(x)

    def deriv(self, x):
        """Derivative away from the declared kinks and jumps."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            out = -20.0 * x * np.exp(-10.0 * x * x)
        elif self.kind == "square":
            out = np.zeros_like(x)
        else:
            out = np.where(np.abs(x) < self.p, -np.sign(x) / self.p, 0.0)
        return out if out.ndim else float(out)

    @property
    def value_jumps(self) -> tuple[tuple[float, float], ...]:
        if self.kind == "square":
            p = self.p
            return ((-p, 1.0 / p), (0.0, -2.0 / p), (p, 1.0 / p))
        return ()

    @property
    def deriv_jumps(self) -> tuple[tuple[float, float], ...]:
        if self.kind == "hat":
            p = self.p
            return ((-p, 1.0 / p), (0.0, -2.0 / p), (p, 1.0 / p))
        return ()

    def value_jump(self, x: float, tol: float = 1e-12) -> float:
        return _lookup(self.value_jumps, x, tol)

    def deriv_jump(self, x: float, tol: float = 1e-12) -> float:
        return _lookup(self.deriv_jumps, x, tol)

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "gaussian":
            r = math.sqrt(-math.log(GAUSSIAN_CUTOFF) / 10.0)
            return (-r, r)
        return (-self.p, self.p)

    def sample(self, x, rule: str = "pointwise", tol: float = 1e-9):
        """Nodal values of ``psi0``.

        ``pointwise`` evaluates the profile as defined; ``average`` replaces the
        value at a declared jump by the mean of the one-sided limits.
        """
        x = np.asarray(x, dtype=float)
        u = np.array(self(x), dtype=float, ndmin=1)
        if rule == "average":
            for xj, jump in self.value_jumps:
                hit = np.abs(x - xj) <= tol
                if np.any(hit):
                    left = float(self(xj - 1e-9 * max(1.0, abs(xj)) - 1e-12))
                    u[hit] = left + 0.5 * jump
        elif rule != "pointwise":
            raise ValueError(f"unknown sampling rule {rule!r}")
        if self.kind == "gaussian":
            u[np.abs(x) >= self.support[1]] = 0.0
        return u


def _lookup(table, x, tol):
    for xj, val in table:
        if abs(xj - x) <= tol:
            return val
    return 0.0


def build_initial(desc) -> InitialData:
    """Build initial data from ``"gaussian"``, ``"square(p)"`` or ``"hat(p)"``."""
    if isinstance(desc, InitialData):
        return desc
    name, args = parse_descriptor(desc)
    if name == "gaussian":
        if args:
            raise ValueError("gaussian initial data takes no arguments")
        return InitialData("gaussian")
    if name in ("square", "hat"):
        if len(args) != 1:
            raise ValueError(f"{name} initial data takes one argument (p)")
        if args[0] <= 0:
            raise ValueError(f"p must be positive, got {desc!r}")
        return InitialData(name, args[0])
    raise ValueError(f"unknown initial-data descriptor {desc!r}")

# }}}


# {{{ composite kernel quantities

def _positive_zeta(horizon: HorizonField, x: float) -> float:
    z = float(horizon(x))
    if z == 0.0:
        raise LocalPointError(f"zeta({x}) = 0: local point, no kernel")
    return z


def gamma_eval(kernel: ReferenceKernel, horizon: HorizonField, s, x: float):
    """``gamma(s, x) = H(s / zeta(x)) / zeta(x)^2``."""
    z = _positive_zeta(horizon, x)
    return kernel(np.asarray(s, dtype=float) / z) / (z * z)


def k_of_x(kernel: ReferenceKernel, horizon: HorizonField, x: float):
    """Jump decay rate ``k(x) = int_0^inf gamma(s, x) ds = m0 / zeta(x)``.

    Returns :data:`LOCAL` where the horizon vanishes.
    """
    z = float(horizon(x))
    if z == 0.0:
        return LOCAL
    return kernel.m0 / z


def gamma_x_jump_integrand(kernel: ReferenceKernel, horizon: HorizonField,
                           s, x: float):
    """``2 zeta H(s/zeta) + s H'(s/zeta)`` at ``x``.

    Multiplied by ``-[zeta'](x) / zeta(x)^4`` this is the jump of
    ``d gamma / dx`` across a kink of the horizon; the jump of ``u_x`` is
    driven by minus that jump.
    """
    z = _positive_zeta(horizon, x)
    s = np.asarray(s, dtype=float)
    return 2.0 * z * kernel(s / z) + s * kernel.deriv(s / z)

# }}}
