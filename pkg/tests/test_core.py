import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from aperiodic.bernoulli import SymbolWord
from aperiodic.core import (DynamicalSystem, HOLDS_ON_WINDOW, MapSystem,
                            OrbitWindow, QuantileTable, UNRESOLVED, VIOLATED,
                            bowen_distance, geometric_grid, is_F_aperiodic,
                            is_resolved, quantile_left, quantile_right,
                            return_time, shift_function, shift_profile)
from aperiodic.errors import OutOfRangeError
from aperiodic.torus import TorusRotation

from conftest import GOLDEN


def circle_system():
    return TorusRotation((GOLDEN,))


# ---------------------------------------------------------------------------
# Bowen distance
# ---------------------------------------------------------------------------

def test_bowen_l0_equals_base_metric(golden_rotation, rng):
    states = golden_rotation.sample_states(rng, 40)
    for x, y in zip(states[::2], states[1::2]):
        assert bowen_distance(golden_rotation, x, y, 0) == \
            golden_rotation.distance(x, y)


def test_bowen_rotation_isometry_case(golden_rotation):
    x = golden_rotation.state(base=0.0)
    y = golden_rotation.state(base=0.25)
    assert bowen_distance(golden_rotation, x, y, 5) == pytest.approx(0.25)


def test_bowen_bernoulli_shifted_disagreement(full_shift_2):
    w = SymbolWord.periodic(2, (1,))
    v = SymbolWord(2, (1, 1, 2), (1,))
    assert bowen_distance(full_shift_2, w, v, 1) == pytest.approx(math.exp(-2))


def test_bowen_monotone_in_length(golden_rotation, full_shift_2, rng):
    systems = [golden_rotation, full_shift_2]
    for sys_obj in systems:
        states = sys_obj.sample_states(rng, 60)
        for i in range(0, len(states) - 1, 2):
            x, y = states[i], states[i + 1]
            prev = 0.0
            for l in range(0, 6, 2):
                d = sys_obj.bowen_distance(x, y, l)
                if not is_resolved(d):
                    break
                assert d >= prev - 1e-15
                prev = d


def test_generic_bowen_matches_override(golden_rotation, full_shift_2, rng):
    # the closed forms must agree with the naive max-over-iterates loop
    for sys_obj in (golden_rotation, full_shift_2):
        states = sys_obj.sample_states(rng, 30)
        for i in range(0, len(states) - 1, 2):
            x, y = states[i], states[i + 1]
            for l in (0, 1, 4):
                fast = sys_obj.bowen_distance(x, y, l)
                naive = DynamicalSystem.bowen_distance(sys_obj, x, y, l)
                if is_resolved(fast) and is_resolved(naive):
                    assert fast == pytest.approx(naive, abs=1e-12)


# ---------------------------------------------------------------------------
# Return times and shift functions
# ---------------------------------------------------------------------------

def test_return_time_half_rotation():
    sys_obj = TorusRotation((0.5,))
    assert return_time(sys_obj, sys_obj.state(), 0.1, 0, 10) == 2


def test_return_time_third_rotation(third_rotation):
    assert return_time(third_rotation, third_rotation.state(), 0.4, 0, 10) == 1


def test_return_time_alternating_word(full_shift_2):
    # d(w, Tw) = e^-1 which is already below 1.5 e^-1, so the first shift
    # returns; the coarse scale sees the period only below the diameter
    w = SymbolWord.periodic(2, (1, 2))
    assert return_time(full_shift_2, w, 1.5 * math.exp(-1), 0, 10) == 1
    assert return_time(full_shift_2, w, 0.9 * math.exp(-1), 0, 10) == 2


def test_return_time_unresolved(golden_rotation):
    assert return_time(golden_rotation, golden_rotation.state(), 1e-9, 0, 100) \
        is UNRESOLVED


def test_shift_function_period_three(third_rotation):
    x = third_rotation.state()
    assert shift_function(third_rotation, x, 0.2, 0, 5, 100) == 3


def test_shift_function_bounded_by_period():
    for q in (2, 3, 5, 7):
        sys_obj = TorusRotation((1.0 / q,))
        x = sys_obj.state()
        for eps in (0.3, 0.05, 0.001):
            v = shift_function(sys_obj, x, eps, 0, 10, 1000)
            assert is_resolved(v) and v <= q


def test_shift_function_above_diameter(golden_rotation, full_shift_2):
    for sys_obj in (golden_rotation, full_shift_2):
        x = sys_obj.sample_states(random.Random(1), 1)[0]
        eps = sys_obj.diameter_bound * 1.01
        assert shift_function(sys_obj, x, eps, 0, 5, 100) == 1


def test_shift_profile_third_rotation(third_rotation):
    prof = shift_profile(third_rotation, third_rotation.state(),
                         (0.4, 0.2, 0.1), 0, 5, 100)
    assert prof.values == (1, 3, 3)


def test_shift_profile_identity_map():
    ident = MapSystem(distance=lambda x, y: abs(x - y), step=lambda x: x,
                      diameter_bound=1.0)
    prof = shift_profile(ident, 0.3, (0.5, 0.25, 0.125, 0.0625), 0, 10, 50)
    assert prof.values == (1, 1, 1, 1)


def test_shift_profile_golden_tracks_c_over_eps(golden_rotation):
    # brute-force oracle: F(eps) should track c/eps within a factor 4,
    # c = 1/sqrt(5)
    grid = geometric_grid(0.5, 0.5, 12)
    prof = shift_profile(golden_rotation, golden_rotation.state(), grid, 0,
                         10_000, 100_000)
    c = 1 / math.sqrt(5)
    for eps, v in prof.resolved_items():
        assert (c / eps) / 4 <= v <= 4 * (c / eps)


def test_shift_profile_requires_decreasing_grid(third_rotation):
    with pytest.raises(ValueError):
        shift_profile(third_rotation, third_rotation.state(), (0.1, 0.2), 0, 5, 10)


def test_profile_monotonicities(full_shift_2):
    # resolved values are non-decreasing as epsilon shrinks and
    # non-decreasing in the Bowen length
    w = SymbolWord(2, (1, 2, 2, 1, 2), (1, 2, 2, 2, 1, 1, 2))
    grid = tuple(math.exp(-k) for k in range(1, 7))
    prof0 = shift_profile(full_shift_2, w, grid, 0, 500, 5000)
    prof2 = shift_profile(full_shift_2, w, grid, 2, 500, 5000)
    resolved0 = [v for v in prof0.values if is_resolved(v)]
    assert resolved0 == sorted(resolved0)
    for v0, v2 in zip(prof0.values, prof2.values):
        if is_resolved(v0) and is_resolved(v2):
            assert v0 <= v2


def test_shift_function_horizon_monotone(full_shift_2):
    w = SymbolWord(2, (2, 1, 1), (1, 2, 1, 1, 2, 2, 1, 2))
    eps = math.exp(-3)
    values = [shift_function(full_shift_2, w, eps, 0, N, 4000)
              for N in (0, 5, 20, 100)]
    resolved = [v for v in values if is_resolved(v)]
    assert resolved == sorted(resolved, reverse=True)


def test_orbit_window_invariant(golden_rotation):
    win = OrbitWindow.compute(golden_rotation, golden_rotation.state(), 50)
    for k in range(50):
        assert win[k + 1] == golden_rotation.step(win[k])


# ---------------------------------------------------------------------------
# Quantile tables
# ---------------------------------------------------------------------------

def floor_table():
    eps = [1.0 / q for q in range(1, 12)]
    return QuantileTable.from_function(lambda e: math.floor(1.0 / e), eps)


def test_quantile_floor_table():
    # sup{eps : floor(1/eps) > 2} = 1/3 and inf{eps : floor(1/eps) <= 2}
    # is the same breakpoint; on a step table the two quantiles meet there
    F = floor_table()
    assert quantile_left(F, 2) == pytest.approx(1.0 / 3.0)
    assert quantile_right(F, 2) == pytest.approx(1.0 / 3.0)
    assert quantile_right(F, 2) <= quantile_left(F, 2)


def test_quantile_ceil_table_fine_grid():
    # with a fine grid the ceiling-table quantile approaches the continuous
    # sup at 1/2 from below
    eps = [0.001 + 0.999 * k / 2000 for k in range(2001)]
    F = QuantileTable.from_function(lambda e: math.ceil(1.0 / e), eps)
    left = quantile_left(F, 2)
    assert 0.5 - 1e-3 <= left <= 0.5


def test_quantile_power_law_inverse_to_grid_resolution():
    # a continuous bijective table has both quantiles at the plain inverse,
    # up to one step of the tabulation grid
    c, n, s = 0.2, 2, 5
    breakpoint = (c / s) ** (1.0 / n)
    step = 1e-4
    eps = [0.05 + step * k for k in range(5000)]
    F = QuantileTable.from_function(lambda e: c * e ** (-n), eps)
    assert quantile_left(F, s) == pytest.approx(breakpoint, abs=2 * step)
    assert quantile_right(F, s) == pytest.approx(breakpoint, abs=2 * step)
    assert quantile_right(F, s) <= quantile_left(F, s)


def test_quantile_out_of_range():
    F = floor_table()
    with pytest.raises(OutOfRangeError):
        quantile_left(F, 0)
    with pytest.raises(OutOfRangeError):
        quantile_left(F, 1000)
    with pytest.raises(OutOfRangeError):
        quantile_right(F, 1000)


def test_quantile_sandwich_on_table_rows():
    F = floor_table()
    for s in range(2, 10):
        left = quantile_left(F, s)
        right = quantile_right(F, s)
        for eps, v in zip(F.epsilons, F.values):
            if eps > left:
                assert v <= s
            if eps < right:
                assert v > s


@given(st.integers(min_value=2, max_value=9),
       st.lists(st.integers(min_value=0, max_value=5), min_size=3, max_size=10))
@settings(max_examples=60, deadline=None)
def test_quantile_sandwich_random_tables(start, increments):
    eps = [2.0 ** (-k) for k in range(len(increments) + 1)]
    vals = [start]
    for inc in increments:
        vals.append(vals[-1] + inc)
    if vals[-1] == vals[0]:
        vals[-1] += 1
    table = QuantileTable(tuple(eps), tuple(vals))
    for s in range(vals[0], vals[-1]):
        left = table.quantile_left(s)
        right = table.quantile_right(s)
        assert right <= left
        for e, v in zip(table.epsilons, table.values):
            if e > left:
                assert v <= s
            if e < right:
                assert v > s


def test_quantile_table_validation():
    with pytest.raises(ValueError):
        QuantileTable((0.5, 0.5), (1, 2))
    with pytest.raises(ValueError):
        QuantileTable((0.5, 0.25), (3, 2))


# ---------------------------------------------------------------------------
# Aperiodicity verdicts
# ---------------------------------------------------------------------------

def test_is_F_aperiodic_periodic_point_violated():
    sys_obj = TorusRotation((0.25,))
    x = sys_obj.state()
    # small-eps grid: only the exact period-4 return recurs at these scales
    F = QuantileTable.from_function(lambda e: 5.0, [0.2, 0.1, 0.05])
    verdict = is_F_aperiodic(sys_obj, x, F, 0, 20, 100)
    assert verdict.status == VIOLATED
    n, s, eps = verdict.witness
    assert s == 4


def test_is_F_aperiodic_trivial_floor(golden_rotation):
    F = QuantileTable.from_function(lambda e: 1.0, [0.5, 0.25, 0.125])
    verdict = is_F_aperiodic(golden_rotation, golden_rotation.state(), F, 0, 50, 50)
    assert verdict.status == HOLDS_ON_WINDOW


def test_is_F_aperiodic_golden_holds(golden_rotation):
    eps_grid = sorted({0.1 / q for q in range(1, 40)} | {1.2e-3, 1e-3},
                      reverse=True)
    F = QuantileTable.from_function(lambda e: 0.1 / e, eps_grid)
    verdict = is_F_aperiodic(golden_rotation, golden_rotation.state(), F, 0,
                             10_000, 10_000)
    assert verdict.status == HOLDS_ON_WINDOW
    assert verdict.window["horizon"] == 10_000


def test_separated_set_fact(golden_rotation):
    # a resolved shift value F makes the orbit points T^0 x .. T^(F-1) x
    # pairwise eps-separated (gaps up to F - 1 < F); the endpoint pair
    # (x, T^F x) has gap exactly F and can recur, so the count bound
    # N(X, eps) >= F comes from this size-F set
    x = golden_rotation.state()
    for eps in (0.2, 0.1, 0.05):
        F = shift_function(golden_rotation, x, eps, 0, 200, 10_000)
        assert is_resolved(F)
        orbit = golden_rotation.orbit(x, F - 1)
        assert len(orbit) == F
        for i in range(len(orbit)):
            for j in range(i + 1, len(orbit)):
                assert golden_rotation.distance(orbit[i], orbit[j]) >= eps


# ---------------------------------------------------------------------------
# Metric axioms on sampled states
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fixture", ["golden_rotation", "full_shift_2",
                                     "cyclic_geodesic"])
def test_metric_axioms(fixture, request, rng):
    sys_obj = request.getfixturevalue(fixture)
    states = sys_obj.sample_states(rng, 60)
    for i in range(0, 57, 3):
        x, y, z = states[i], states[i + 1], states[i + 2]
        dxy = sys_obj.distance(x, y)
        if not is_resolved(dxy):
            continue
        assert sys_obj.distance(x, x) == pytest.approx(0.0, abs=1e-12)
        assert dxy == pytest.approx(sys_obj.distance(y, x), abs=1e-12)
        dxz, dyz = sys_obj.distance(x, z), sys_obj.distance(y, z)
        if is_resolved(dxz) and is_resolved(dyz):
            assert dxz <= dxy + dyz + 1e-12
        assert dxy <= sys_obj.diameter_bound
