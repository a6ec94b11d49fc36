"""Scenario configuration, preset catalog and batch output.

A scenario file is a flat list of ``key = value`` lines; ``#`` starts a
comment. Unset keys take the defaults below.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from nonconv import singularity as sg
from nonconv.discretization import Grid, Stencil, assemble
from nonconv.kernel import (
    HorizonField, InitialData, ReferenceKernel, build_horizon, build_initial,
    build_kernel)
from nonconv.solver import (
    DEFAULT_MARGIN, SnapshotStore, StabilityReport, choose_domain, run,
    stability_check)

log = logging.getLogger(__name__)

DEFAULT_H = 0.0125
DEFAULT_TAU = 0.00625
DEFAULT_CADENCE = 0.05
DEFAULT_WINDOW = (-2.0, 4.0)
OUT_DIR_ENV = "NONCONV_OUT_DIR"


class ConfigError(ValueError):
    """A scenario failed validation; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ScenarioConfig:
    kernel: str = "gaussian_paper"
    horizon: str = "zero"
    initial: str = "gaussian"
    h: float | None = None
    tau: float | None = None
    T: float = 1.0
    snapshot_cadence: float | None = None
    singular_points: tuple[float, ...] | None = None
    out_dir: str = ""
    name: str = ""
    window: tuple[float, float] | None = None
    initial_sampling: str = "pointwise"
    margin: float = DEFAULT_MARGIN


_FLOATS = ("h", "tau", "T", "snapshot_cadence", "margin")
_STRINGS = ("kernel", "horizon", "initial", "out_dir", "name", "initial_sampling")
_FIELD_ORDER = [f.name for f in dataclasses.fields(ScenarioConfig)]


def _num(v: float) -> str:
    return repr(float(v))


def serialize_config(cfg: ScenarioConfig) -> str:
    lines = []
    for key in _FIELD_ORDER:
        val = getattr(cfg, key)
        if val is None:
            continue
        if key in _FLOATS:
            text = _num(val)
        elif key in ("singular_points", "window"):
            text = ", ".join(_num(v) for v in val)
        else:
            text = str(val)
        lines.append(f"{key} = {text}".rstrip())
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ScenarioConfig:
    values: dict = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_ORDER:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        try:
            if key in _FLOATS:
                values[key] = float(val)
            elif key == "singular_points":
                values[key] = tuple(float(v) for v in val.split(",") if v.strip())
            elif key == "window":
                win = tuple(float(v) for v in val.split(","))
                if len(win) != 2:
                    raise ValueError
                values[key] = win
            else:
                values[key] = val
        except ValueError:
            errors.append(f"line {lineno}: bad value for {key!r}: {val!r}")
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(**values)


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


@dataclass
class Scenario:
    """A validated scenario with its grid and assembled stencil."""

    config: ScenarioConfig
    kernel: ReferenceKernel
    horizon: HorizonField
    initial: InitialData
    grid: Grid
    stencil: Stencil
    stability: StabilityReport
    window_nodes: tuple[int, int] = (0, 0)

    @property
    def tau(self) -> float:
        return self.config.tau

    @property
    def T(self) -> float:
        return self.config.T

    @property
    def snapshot_cadence(self) -> float:
        return self.config.snapshot_cadence

    @property
    def singular_points(self) -> tuple[float, ...]:
        return self.config.singular_points

    def initial_values(self) -> np.ndarray:
        return self.initial.sample(self.grid.x, self.config.initial_sampling,
                                   tol=1e-9 * self.grid.h)

    def quantity(self) -> str:
        return "jump_u" if self.initial.value_jumps else "jump_ux"


def default_singular_points(horizon: HorizonField, initial: InitialData) -> tuple[float, ...]:
    pts = [x for x, _ in initial.value_jumps + initial.deriv_jumps]
    pts += [b for b in horizon.breakpoints if horizon(b) > 0]
    return tuple(sorted(set(pts)))


def _positive(name, v, errors):
    if v is None or not (v > 0 and math.isfinite(v)):
        errors.append(f"{name} must be a positive number, got {v!r}")
        return False
    return True


def validate(cfg: ScenarioConfig) -> Scenario:
    """Fill defaults, build the grid and stencil, and check alignment and
    stability. Raises :class:`ConfigError` listing every failure."""
    errors = []
    cfg = dataclasses.replace(cfg)
    if cfg.h is None:
        cfg.h = DEFAULT_H
    if cfg.tau is None:
        cfg.tau = cfg.h / 2.0
    if cfg.snapshot_cadence is None and cfg.tau is not None and cfg.tau > 0:
        # the default cadence, rounded to a whole number of steps
        cfg.snapshot_cadence = cfg.tau * max(1, round(DEFAULT_CADENCE / cfg.tau))
    if cfg.window is None:
        cfg.window = DEFAULT_WINDOW

    try:
        kernel = build_kernel(cfg.kernel)
    except ValueError as exc:
        errors.append(str(exc))
        kernel = None
    try:
        horizon = build_horizon(cfg.horizon)
        cfg.horizon = horizon.descriptor
    except ValueError as exc:
        errors.append(f"horizon: {exc}")
        horizon = None
    try:
        initial = build_initial(cfg.initial)
        cfg.initial = initial.descriptor
    except ValueError as exc:
        errors.append(f"initial: {exc}")
        initial = None
    if cfg.initial_sampling not in ("pointwise", "average"):
        errors.append(f"initial_sampling must be 'pointwise' or 'average', "
                      f"got {cfg.initial_sampling!r}")

    ok = all([_positive("h", cfg.h, errors), _positive("tau", cfg.tau, errors),
              _positive("T", cfg.T, errors),
              _positive("snapshot_cadence", cfg.snapshot_cadence, errors)])
    if cfg.margin < 0:
        errors.append("margin must be nonnegative")
    if ok:
        for what, num, den in (("T / tau", cfg.T, cfg.tau),
                               ("snapshot_cadence / tau", cfg.snapshot_cadence, cfg.tau)):
            r = num / den
            if abs(r - round(r)) > 1e-9 * max(1.0, r):
                errors.append(f"{what} = {r:.10g} must be a whole number of steps")
    if cfg.window[0] >= cfg.window[1]:
        errors.append(f"window {cfg.window} is empty")
    if errors or None in (kernel, horizon, initial):
        raise ConfigError(errors)

    if cfg.singular_points is None:
        cfg.singular_points = default_singular_points(horizon, initial)
    else:
        cfg.singular_points = tuple(sorted(set(float(x) for x in cfg.singular_points)))

    h = cfg.h
    for x in cfg.singular_points:
        off = x / h
        if abs(off - round(off)) > 1e-12 * max(1.0, abs(off)) + 1e-12:
            errors.append(f"singular point x = {x:g} is not on the grid "
                          f"(x/h = {off:.6g} with h = {h:g})")
    if errors:
        raise ConfigError(errors)

    support = initial.support
    x_left, x_right = choose_domain(support, cfg.T, horizon.delta, kernel.s_max,
                                    h, kernel.m2, cfg.margin)
    lo = min([x_left, cfg.window[0]] + [x - 2 * h for x in cfg.singular_points])
    hi = max([x_right, cfg.window[1]] + [x + 2 * h for x in cfg.singular_points])
    n_left = math.floor(lo / h + 1e-9)
    n_right = math.ceil(hi / h - 1e-9)
    grid = Grid(n_left * h, h, n_right - n_left + 1)

    stencil = assemble(grid, kernel, horizon)
    report = stability_check(stencil, cfg.tau)
    if not report:
        errors.append(f"stability: tau = {cfg.tau:g} violates the monotonicity bound: "
                      f"tau * max a_jj = {cfg.tau * report.max_diagonal:.4g} > 1 "
                      f"(need tau <= {1 / report.max_diagonal:.6g})")
        raise ConfigError(errors)

    w0 = max(0, math.ceil(grid.offset(cfg.window[0]) - 1e-9))
    w1 = min(grid.n_nodes - 1, math.floor(grid.offset(cfg.window[1]) + 1e-9))
    return Scenario(cfg, kernel, horizon, initial, grid, stencil, report, (w0, w1))


# {{{ jump evaluation

def jump_series(scenario: Scenario, snapshots: SnapshotStore) -> list[sg.JumpSeries]:
    """Every (singular point, method) series the scenario supports."""
    out = []
    quantity = scenario.quantity()
    kern, hor, ini = scenario.kernel, scenario.horizon, scenario.initial
    for x in scenario.singular_points:
        out.append(sg.m1_series(snapshots, x, quantity))
        times = np.asarray(snapshots.times)
        if hor(x) > 0:
            if quantity == "jump_u":
                vals = sg.jump_u_m2(kern, hor, ini, x, times)
                out.append(sg.JumpSeries(x, quantity, "m2_analytic", times, vals))
            else:
                j = scenario.grid.index_of(x)
                out.append(sg.jump_ux_m2_general(
                    kern, hor, ini, x, snapshots,
                    bandwidth=scenario.stencil.rows[j].bandwidth))
        elif hor.is_zero:
            out.append(sg.local_characteristic_series(ini, x, times, quantity))
    return out

# }}}


# {{{ output

@dataclass
class RunResult:
    scenario: Scenario
    snapshots: SnapshotStore
    series: list[sg.JumpSeries]
    files: list[Path] = field(default_factory=list)


def simulate(scenario: Scenario) -> RunResult:
    snaps = run(scenario)
    return RunResult(scenario, snaps, jump_series(scenario, snaps))


def write_solution_csv(result: RunResult, path) -> None:
    sc = result.scenario
    w0, w1 = sc.window_nodes
    xs = sc.grid.x[w0:w1 + 1]
    xtext = [f"{x:.10g}" for x in xs]
    with open(path, "w", newline="") as fh:
        fh.write("t,x,u\n")
        for t, U in zip(result.snapshots.times, result.snapshots.values):
            tt = f"{t:.10g}"
            fh.writelines(f"{tt},{x},{u:.12g}\n" for x, u in zip(xtext, U[w0:w1 + 1]))


def write_meta(result: RunResult, path) -> None:
    sc = result.scenario
    g = sc.grid
    snaps = result.snapshots
    extra = {
        "x_left": g.x_left, "x_right": g.x_right, "n_nodes": g.n_nodes,
        "n_steps": round(sc.T / sc.tau), "n_snapshots": len(snaps),
        "s_max": sc.kernel.s_max, "kernel_m0": sc.kernel.m0,
        "kernel_m1": sc.kernel.m1, "kernel_m2": sc.kernel.m2,
        "max_diagonal": sc.stability.max_diagonal,
        "stability_margin": sc.stability.margin,
        "u_min": snaps.u_min, "u_max": snaps.u_max,
        "boundary_max": snaps.edge_max,
    }
    with open(path, "w") as fh:
        fh.write(serialize_config(sc.config))
        fh.write("# derived\n")
        for k, v in extra.items():
            fh.write(f"# {k} = {v!r}\n")


def run_scenario(scenario: Scenario, out_dir, figures: bool = True) -> RunResult:
    """Simulate and write ``solution.csv``, jump CSVs, ``meta.txt``,
    ``plot.gp`` and, if ``figures``, PNG renderings."""
    from nonconv import plotting

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = simulate(scenario)
    files = [out / "solution.csv", out / "meta.txt"]
    write_solution_csv(result, files[0])
    write_meta(result, files[1])
    for s in result.series:
        p = out / s.filename
        s.to_csv(p)
        files.append(p)
    gp = out / "plot.gp"
    gp.write_text(plotting.gnuplot_script(result))
    files.append(gp)
    if figures:
        files += plotting.render_figures(result, out)
    result.files = files
    log.info("wrote %d files to %s", len(files), out)
    return result

# }}}


# {{{ presets

@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    config: ScenarioConfig


def _preset(name, description, **kw) -> Preset:
    return Preset(name, description, ScenarioConfig(name=name, **kw))


def _build_catalog() -> dict[str, Preset]:
    items = []
    for alpha in (-1, 0, 1):
        items.append(_preset(
            f"smooth-smooth-alpha{alpha}",
            f"gaussian data, smooth horizon erfc(-x/2^{alpha}), t up to 2",
            horizon=f"erfc({alpha})", initial="gaussian", T=2.0))
    for label, hor in (("erfc", "erfc(0)"), ("const0.1", "constant(0.1)"),
                       ("const0.5", "constant(0.5)"), ("local", "zero")):
        items.append(_preset(
            f"square-{label}-p1",
            f"square wave p=1, horizon {hor}: stationary vs transported jumps",
            horizon=hor, initial="square(1)", T=2.0))
    for p in ("1", "0.5"):
        items.append(_preset(
            f"hat-smooth-p{p}", f"hat p={p}, horizon erfc(-x): decaying u_x jumps",
            horizon="erfc(0)", initial=f"hat({p})", T=2.0, window=(-2.0, 5.0)))
    for k in (1, 2, 3):
        items.append(_preset(
            f"ramp-k{k}-gaussian",
            f"gaussian data, ramp horizon max(min({k}x,6),0): u_x jump born at x={6 / k:g}",
            horizon=f"ramp({k})", initial="gaussian", T=10.0, window=(-4.0, 6.0)))
    for k, p, T in ((1, "0.5", 2.0), (1, "1", 2.0), (2, "0.5", 2.0), (2, "1", 2.0),
                    (3, "2", 3.0)):
        items.append(_preset(
            f"ramp-k{k}-hat-p{p}",
            f"hat p={p}, ramp horizon slope {k}: kinks from data and horizon",
            horizon=f"ramp({k})", initial=f"hat({p})", T=T))
    return {p.name: p for p in items}


PRESETS = _build_catalog()


def list_presets() -> list[tuple[str, str]]:
    return [(p.name, p.description) for p in PRESETS.values()]


def preset_config(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; see list-presets")
    return dataclasses.replace(PRESETS[name].config)


def default_out_dir(cfg: ScenarioConfig) -> Path:
    if cfg.out_dir:
        return Path(cfg.out_dir)
    root = os.environ.get(OUT_DIR_ENV, "nonconv-out")
    return Path(root) / (cfg.name or "scenario")


def run_preset(name: str, out_dir=None, figures: bool = True) -> list[Path]:
    cfg = preset_config(name)
    scenario = validate(cfg)
    target = Path(out_dir) if out_dir is not None else default_out_dir(cfg)
    return run_scenario(scenario, target, figures=figures).files

# }}}
