import math
import warnings

import numpy as np
import pytest

from conftest import H, TAU, simulate_config, simulate_preset
from nonconv import scenarios
from nonconv import singularity as sg
from nonconv.discretization import Grid
from nonconv.kernel import LocalPointError, build_horizon, build_initial
from nonconv.solver import SnapshotStore, SolverState

M0 = math.sqrt(10 * math.pi)


def _grid_values(initial, lo=-3.0, hi=3.0, rule="pointwise"):
    grid = Grid.from_bounds(lo, hi, H)
    return grid, build_initial(initial).sample(grid.x, rule=rule)


# {{{ method 1

def test_jump_u_m1_square_at_zero():
    grid, U = _grid_values("square(1)")
    assert sg.jump_u_m1(U, grid.index_of(0.0)) == pytest.approx(-2.0)
    _, Ua = _grid_values("square(1)", rule="average")
    assert sg.jump_u_m1(Ua, grid.index_of(0.0)) == pytest.approx(-2.0)


def test_jump_u_m1_smooth_and_constant():
    grid, U = _grid_values("gaussian")
    j = grid.index_of(0.2)
    bound = 2 * H * np.max(np.abs(build_initial("gaussian").deriv(grid.x)))
    assert abs(sg.jump_u_m1(U, j)) <= bound
    assert sg.jump_u_m1(np.full(10, 3.3), 4) == 0.0


def test_jump_ux_m1_hat_exact():
    grid, U = _grid_values("hat(1)")
    assert sg.jump_ux_m1(U, grid.index_of(0.0), H) == pytest.approx(-2.0, abs=1e-12)
    assert sg.jump_ux_m1(U, grid.index_of(1.0), H) == pytest.approx(1.0, abs=1e-12)
    assert sg.jump_ux_m1(U, grid.index_of(-1.0), H) == pytest.approx(1.0, abs=1e-12)


def test_jump_ux_m1_quadratic_is_order_h():
    x = np.arange(50) * H
    assert sg.jump_ux_m1(x ** 2, 20, H) == pytest.approx(2 * H, rel=1e-9)


def test_m1_needs_interior_node():
    with pytest.raises(IndexError):
        sg.jump_u_m1(np.zeros(5), 0)
    with pytest.raises(IndexError):
        sg.jump_ux_m1(np.zeros(5), 4, H)

# }}}


# {{{ method 2

def test_jump_u_m2_examples(kernel):
    sq = build_initial("square(1)")
    c01 = build_horizon("constant(0.1)")
    assert sg.jump_u_m2(kernel, c01, sq, 0.0, 0.0) == -2.0
    # k = m0 / zeta, since k is the zeroth moment of gamma
    assert sg.jump_u_m2(kernel, c01, sq, 0.0, 0.1) == pytest.approx(
        -2 * math.exp(-M0), rel=1e-12)
    erfc = build_horizon("erfc(0)")
    assert sg.jump_u_m2(kernel, erfc, sq, 1.0, 1.0) == pytest.approx(
        math.exp(-M0 / 1.8427007929497148), rel=1e-12)


def test_jump_ux_m2_smooth_examples(kernel):
    hat = build_initial("hat(1)")
    erfc = build_horizon("erfc(0)")
    t = np.array([0.0, 1.0])
    np.testing.assert_allclose(sg.jump_ux_m2_smooth_horizon(kernel, erfc, hat, 0.0, t),
                               [-2.0, -2 * math.exp(-M0)], rtol=1e-12)
    zero = sg.jump_ux_m2_smooth_horizon(kernel, erfc, hat, 0.5, np.linspace(0, 2, 5))
    assert np.all(zero == 0)


def test_jump_ux_m2_smooth_refuses_breakpoint(kernel):
    with pytest.raises(ValueError, match="general"):
        sg.jump_ux_m2_smooth_horizon(kernel, build_horizon("ramp(2)"),
                                     build_initial("gaussian"), 3.0, 1.0)


def test_m2_refuses_local_points(kernel):
    ramp = build_horizon("ramp(1)")
    with pytest.raises(LocalPointError):
        sg.jump_u_m2(kernel, ramp, build_initial("square(1)"), -0.5, 0.1)
    snaps = simulate_preset("ramp-k1-gaussian").snapshots
    with pytest.raises(LocalPointError):
        sg.jump_ux_m2_general(kernel, ramp, build_initial("gaussian"), 0.0, snaps)


def test_general_equals_smooth_without_kink(kernel):
    res = simulate_preset("hat-smooth-p1")
    erfc, hat = res.scenario.horizon, res.scenario.initial
    for x in (-1.0, 0.0, 1.0):
        gen = sg.jump_ux_m2_general(kernel, erfc, hat, x, res.snapshots)
        smooth = sg.jump_ux_m2_smooth_horizon(kernel, erfc, hat, x, gen.times)
        np.testing.assert_allclose(gen.values, smooth, rtol=0, atol=1e-14)


def test_general_zero_at_start_for_smooth_data(kernel):
    for k in (1, 2, 3):
        res = simulate_preset(f"ramp-k{k}-gaussian")
        s = sg.jump_ux_m2_general(kernel, res.scenario.horizon, res.scenario.initial,
                                  6.0 / k, res.snapshots)
        assert s.values[0] == 0.0
        assert np.all(np.asarray(s.values[1:]) != 0.0)


def test_general_k2_exceeds_k1(kernel):
    a = [s for s in simulate_preset("ramp-k1-gaussian").series
         if s.method == "m2_analytic"][0]
    b = [s for s in simulate_preset("ramp-k2-gaussian").series
         if s.method == "m2_analytic"][0]
    assert a.location == 6.0 and b.location == 3.0
    va, vb = np.abs(a.values), np.abs(b.values)
    assert np.max(vb) > np.max(va)


def test_general_time_truncation(kernel):
    res = simulate_preset("ramp-k2-gaussian")
    full = sg.jump_ux_m2_general(kernel, res.scenario.horizon, res.scenario.initial,
                                 3.0, res.snapshots)
    part = sg.jump_ux_m2_general(kernel, res.scenario.horizon, res.scenario.initial,
                                 3.0, res.snapshots, t_end=2.0)
    assert part.times[-1] == pytest.approx(2.0)
    np.testing.assert_array_equal(part.values, full.values[:len(part.values)])


def test_coarse_snapshot_warning(kernel):
    grid = Grid.from_bounds(-2.0, 6.0, H)
    store = SnapshotStore(grid, TAU)
    U = build_initial("gaussian").sample(grid.x)
    for n in (0, 20, 40):
        store.append(SolverState(U, n * TAU, n))
    with pytest.warns(sg.CoarseSnapshotWarning):
        sg.jump_ux_m2_general(kernel, build_horizon("ramp(2)"),
                              build_initial("gaussian"), 3.0, store)


def test_smooth_horizon_m2_monotone(kernel):
    for name in ("square-erfc-p1", "square-const0.5-p1", "hat-smooth-p1"):
        for s in simulate_preset(name).series:
            if s.method == "m2_analytic":
                v = np.abs(s.values)
                assert np.all(np.diff(v) <= 0), (name, s.location)

# }}}


# {{{ local characteristics and tracking

@pytest.mark.parametrize("t, expected", [(0.0, 1.0), (0.5, 0.0), (1.0, -2.0)])
def test_local_characteristic(t, expected):
    assert sg.jump_u_local_characteristic(1.0, t, build_initial("square(1)")) == expected


def test_local_characteristic_series_matches_m1():
    res = simulate_preset("square-local-p1")
    m1 = [s for s in res.series if s.method == "m1_quotient" and s.location == 1.0][0]
    lc = [s for s in res.series
          if s.method == "local_characteristic" and s.location == 1.0][0]
    assert lc.values[0] == 1.0
    t = np.asarray(lc.times)
    i = int(np.argmin(np.abs(t - 1.0)))
    assert lc.values[i] == -2.0
    # upwind diffusion smears the arriving front over ~0.08, so the two-node
    # quotient reaches only a fraction of -2, but its minimum arrives on time
    late = t >= 0.5
    t_dip = t[late][np.argmin(np.asarray(m1.values)[late])]
    assert abs(t_dip - 1.0) <= 0.05
    assert min(m1.values) < -0.1


def test_tracker_stationary_nonlocal():
    res = simulate_config(scenarios.ScenarioConfig(
        horizon="constant(0.5)", initial="square(1)", T=0.5, snapshot_cadence=TAU))
    tr = sg.track_discontinuity_location(res.snapshots, res.scenario.initial)
    j0 = res.scenario.grid.index_of(0.0)
    dominant = tr.dominance > 3
    assert dominant[:10].all()
    assert set(tr.nodes[dominant]) == {j0 - 1}
    assert not tr.flagged


def test_tracker_transport_local():
    res = simulate_config(scenarios.ScenarioConfig(
        horizon="zero", initial="square(1)", T=0.5, snapshot_cadence=0.05))
    tr = sg.track_discontinuity_location(res.snapshots)
    slope = np.polyfit(tr.times[1:], tr.positions[1:], 1)[0]
    assert slope == pytest.approx(1.0, abs=0.1)


def test_tracker_ties_go_left():
    grid = Grid(0.0, 1.0, 6)
    store = SnapshotStore(grid, 0.1)
    store.append(SolverState(np.array([0.0, 1.0, 2.0, 3.0, 3.0, 3.0])))
    tr = sg.track_discontinuity_location(store)
    assert tr.nodes[0] == 0


def test_tracker_flags_smooth_data():
    res = simulate_preset("smooth-smooth-alpha0")
    with pytest.warns(sg.NoJumpWarning):
        tr = sg.track_discontinuity_location(res.snapshots, res.scenario.initial)
    assert tr.flagged and tr.notes

# }}}


# {{{ series and invariants

def test_jump_series_csv_round_trip(tmp_path):
    s = sg.JumpSeries(-0.5, "jump_ux", "m2_analytic", [0.0, 0.1, 0.2],
                      [1.0, 0.1 + 0.2, -1e-300])
    path = tmp_path / s.filename
    s.to_csv(path)
    assert path.read_text().splitlines()[1] == "t,value"
    back = sg.JumpSeries.from_csv(path)
    assert (back.location, back.quantity, back.method) == (-0.5, "jump_ux", "m2_analytic")
    np.testing.assert_array_equal(back.values, s.values)
    np.testing.assert_array_equal(back.times, s.times)


def test_jump_series_validates():
    with pytest.raises(ValueError):
        sg.JumpSeries(0.0, "jump_u", "m1_quotient", [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        sg.JumpSeries(0.0, "jump_v", "m1_quotient", [0.0], [1.0])
    with pytest.raises(ValueError):
        sg.JumpSeries(0.0, "jump_u", "m3", [0.0], [1.0])


def test_exponential_decay_rate_constant_horizon(kernel):
    for zeta in (0.5, 1.0):
        res = simulate_config(scenarios.ScenarioConfig(
            horizon=f"constant({zeta})", initial="square(1)", T=0.5,
            snapshot_cadence=0.025))
        s = sg.m1_series(res.snapshots, 0.0, "jump_u")
        t = np.asarray(s.times)[1:]
        slope = np.polyfit(t, np.log(np.abs(s.values[1:])), 1)[0]
        assert slope == pytest.approx(-kernel.m0 / zeta, rel=0.1)


# A transported front from an upstream jump reaches these nodes within t <= 1
# and method 1 sees it while the jump law does not.
_ARRIVALS = {("square-const0.1-p1", 0.0), ("square-const0.1-p1", 1.0),
             ("ramp-k1-hat-p0.5", 0.5)}


def _agreement_cases():
    out = []
    for name, _ in scenarios.list_presets():
        cfg = scenarios.preset_config(name)
        hor = build_horizon(cfg.horizon)
        ini = build_initial(cfg.initial)
        for x in scenarios.default_singular_points(hor, ini):
            if hor(x) > 0:
                marks = ([pytest.mark.xfail(strict=True, reason="front arrival")]
                         if (name, x) in _ARRIVALS else [])
                out.append(pytest.param(name, x, marks=marks, id=f"{name}@{x}"))
    return out


@pytest.mark.parametrize("name, x", _agreement_cases())
def test_method_agreement(name, x):
    res = simulate_preset(name)
    pair = {s.method: s for s in res.series if s.location == x}
    a, b = pair["m1_quotient"], pair["m2_analytic"]
    t = np.asarray(a.times)
    sel = t <= 1 + 1e-12
    diff = np.max(np.abs(np.asarray(a.values)[sel] - np.asarray(b.values)[sel]))
    assert diff <= max(0.05 * abs(b.values[0]), 5 * H)

# }}}
