import math

import numpy as np
import pytest

from aperiodic.bernoulli import BernoulliShift, SymbolWord
from aperiodic.complexity import (box_dimension_estimate, bowen_net_counts,
                                  fit_growth_rate, growth_rate_F,
                                  growth_rate_G, maximal_separated_net,
                                  net_counts, separated_net_size,
                                  topological_entropy_estimate)
from aperiodic.core import MapSystem, geometric_grid, shift_function, shift_profile
from aperiodic.errors import DegenerateFitError, TooFewResolvedError
from aperiodic.torus import TorusRotation

from conftest import GOLDEN


# ---------------------------------------------------------------------------
# Separated nets
# ---------------------------------------------------------------------------

def test_net_on_circle_quarter():
    sys_obj = TorusRotation((GOLDEN,))
    candidates = [sys_obj.state(base=i / 1000) for i in range(1000)]
    net = maximal_separated_net(sys_obj, candidates, 0.25, 0)
    assert net.size == 4


def test_net_single_candidate():
    sys_obj = TorusRotation((GOLDEN,))
    net = maximal_separated_net(sys_obj, [sys_obj.state()], 0.1, 0)
    assert net.size == 1


@pytest.mark.parametrize("k", [3, 4, 5, 6, 7, 8])
def test_net_all_words_of_length_k(k, full_shift_2):
    # all 2^k periodic extensions of length-k blocks are pairwise >= e^-k
    # apart: any two differ somewhere in the first k symbols
    words = [SymbolWord.periodic(2, block) for block in _blocks(2, k)]
    net = maximal_separated_net(full_shift_2, words, math.exp(-k), 0)
    assert net.size == 2 ** k


def _blocks(n, k):
    from itertools import product
    return list(product(range(1, n + 1), repeat=k))


def test_net_greedy_fast_path_matches_generic(full_shift_2):
    words = [SymbolWord.periodic(2, b) for b in _blocks(2, 4)]
    words += [SymbolWord.periodic(2, b) for b in _blocks(2, 2)]
    for k in (1, 2, 3, 4):
        eps = math.exp(-k)
        fast = maximal_separated_net(full_shift_2, words, eps, 0)
        kept = []
        for i, w in enumerate(words):
            if all(full_shift_2.bowen_distance(w, words[j], 0) >= eps
                   for j in kept):
                kept.append(i)
        assert list(fast.kept_indices) == kept


def test_net_maximality_every_rejected_is_close(full_shift_2):
    words = [SymbolWord.periodic(2, b) for b in _blocks(2, 5)]
    eps = math.exp(-3)
    net = maximal_separated_net(full_shift_2, words, eps, 0)
    kept = set(net.kept_indices)
    for i, w in enumerate(words):
        if i in kept:
            continue
        assert any(full_shift_2.bowen_distance(w, words[j], 0) < eps
                   for j in net.kept_indices)


def test_net_monotone_in_epsilon(full_shift_2):
    # geometric grid with ratio 1/2: packing sizes are monotone
    words = [SymbolWord.periodic(2, b) for b in _blocks(2, 6)]
    grid = [math.exp(-1) * 0.5 ** k for k in range(6)]
    sizes = [separated_net_size(full_shift_2, words, eps, 0) for eps in grid]
    assert sizes == sorted(sizes)


def test_bowen_net_monotone_in_length(full_shift_2):
    cloud = full_shift_2.sliding_candidates(seed=3, count=4000, depth=10)
    counts = bowen_net_counts(full_shift_2, cloud, math.exp(-1), range(0, 6))
    sizes = [c for _, c in counts]
    assert sizes == sorted(sizes)


def test_orbit_net_embedding():
    # the separated orbit set is accepted unmodified by the greedy net
    sys_obj = TorusRotation((GOLDEN,))
    x = sys_obj.state()
    eps = 0.1
    F = shift_function(sys_obj, x, eps, 0, 100, 10_000)
    orbit = sys_obj.orbit(x, F - 1)
    net = maximal_separated_net(sys_obj, orbit, eps, 0)
    assert net.size == len(orbit)


# ---------------------------------------------------------------------------
# Box dimension
# ---------------------------------------------------------------------------

def test_box_dimension_circle():
    sys_obj = TorusRotation((GOLDEN,))
    candidates = [sys_obj.state(base=i / 4096) for i in range(4096)]
    candidates += sys_obj.orbit(sys_obj.state(), 512)
    est = box_dimension_estimate(sys_obj, candidates, geometric_grid(0.5, 0.5, 9))
    assert est.slope == pytest.approx(1.0, abs=0.1)
    assert est.residual < 0.1


def test_box_dimension_bernoulli_two(full_shift_2):
    cloud = full_shift_2.sliding_candidates(seed=7, count=60_000, depth=11)
    est = box_dimension_estimate(full_shift_2, cloud,
                                 [math.exp(-k) for k in range(1, 11)])
    assert abs(est.slope - math.log(2)) <= 0.05 * math.log(2)
    assert est.residual < 0.1


def test_box_dimension_degenerate_single_point():
    ident = MapSystem(distance=lambda x, y: abs(x - y), step=lambda x: x,
                      diameter_bound=1.0)
    with pytest.raises(DegenerateFitError):
        box_dimension_estimate(ident, [0.5] * 10, geometric_grid(0.5, 0.5, 6))


def test_box_dimension_needs_grid():
    ident = MapSystem(distance=lambda x, y: abs(x - y), step=lambda x: x,
                      diameter_bound=1.0)
    with pytest.raises(ValueError):
        box_dimension_estimate(ident, [0.1, 0.9], (0.5, 0.25))


# ---------------------------------------------------------------------------
# Topological entropy
# ---------------------------------------------------------------------------

def test_entropy_bernoulli_two(full_shift_2):
    cloud = full_shift_2.sliding_candidates(seed=8, count=120_000, depth=14)
    est = topological_entropy_estimate(full_shift_2, cloud, math.exp(-1),
                                       range(2, 13))
    assert abs(est.slope - math.log(2)) <= 0.05 * math.log(2)


def test_entropy_bernoulli_three(full_shift_3):
    cloud = full_shift_3.sliding_candidates(seed=9, count=200_000, depth=12)
    est = topological_entropy_estimate(full_shift_3, cloud, math.exp(-1),
                                       range(2, 11))
    assert abs(est.slope - math.log(3)) <= 0.05 * math.log(3)


def test_entropy_rotation_zero():
    sys_obj = TorusRotation((GOLDEN,))
    candidates = [sys_obj.state(base=i / 600) for i in range(600)]
    est = topological_entropy_estimate(sys_obj, candidates, 0.05, range(0, 7))
    assert est.slope == pytest.approx(0.0, abs=0.05)


# ---------------------------------------------------------------------------
# Growth rates
# ---------------------------------------------------------------------------

def test_growth_rate_F_golden(golden_rotation):
    prof = shift_profile(golden_rotation, golden_rotation.state(),
                         geometric_grid(0.5, 0.5, 12), 0, 10_000, 100_000)
    est = growth_rate_F(prof)
    assert est.slope == pytest.approx(1.0, abs=0.1)


def test_growth_rate_F_periodic_zero():
    sys_obj = TorusRotation((1.0 / 7.0,))
    prof = shift_profile(sys_obj, sys_obj.state(),
                         geometric_grid(0.4, 0.5, 8), 0, 50, 1000)
    est = growth_rate_F(prof)
    assert est.slope == pytest.approx(0.0, abs=1e-9)


def test_growth_rate_F_identity_zero():
    ident = MapSystem(distance=lambda x, y: abs(x - y) % 1.0, step=lambda x: x,
                      diameter_bound=1.0)
    prof = shift_profile(ident, 0.25, geometric_grid(0.5, 0.5, 8), 0, 10, 100)
    est = growth_rate_F(prof)
    assert est.slope == 0.0


def test_growth_rate_F_requires_resolved():
    prof = shift_profile(TorusRotation((GOLDEN,)), TorusRotation((GOLDEN,)).state(),
                         geometric_grid(1e-6, 0.5, 8), 0, 10, 100)
    with pytest.raises(TooFewResolvedError):
        growth_rate_F(prof)


def test_growth_rate_F_needs_length_zero(golden_rotation):
    prof = shift_profile(golden_rotation, golden_rotation.state(),
                         geometric_grid(0.5, 0.5, 8), 2, 100, 1000)
    with pytest.raises(ValueError):
        growth_rate_F(prof)


def test_growth_rate_G_rotation_zero(golden_rotation):
    grid = geometric_grid(0.4, 0.5, 5)
    profiles = [shift_profile(golden_rotation, golden_rotation.state(),
                              grid, l, 200, 20_000) for l in range(7)]
    est = growth_rate_G(profiles, grid[1])
    assert est.slope == pytest.approx(0.0, abs=0.05)


def test_growth_rate_G_constant_word_zero(full_shift_2):
    w = SymbolWord.constant(2, 1)
    profiles = [shift_profile(full_shift_2, w, (math.exp(-1),), l, 50, 100)
                for l in range(6)]
    est = growth_rate_G(profiles, math.exp(-1))
    assert est.slope == 0.0


def test_growth_rate_G_too_few(full_shift_2):
    w = SymbolWord.constant(2, 1)
    profiles = [shift_profile(full_shift_2, w, (math.exp(-1),), l, 50, 100)
                for l in range(3)]
    with pytest.raises(TooFewResolvedError):
        growth_rate_G(profiles, math.exp(-1))


# ---------------------------------------------------------------------------
# Fit machinery
# ---------------------------------------------------------------------------

def test_fit_exact_line():
    samples = [(float(k), 2.0 * k + 1.0) for k in range(10)]
    est = fit_growth_rate(samples)
    assert est.slope == pytest.approx(2.0)
    assert est.residual == pytest.approx(0.0, abs=1e-12)


def test_fit_reports_window_and_residual():
    # linear head, bent tail: the window should sit inside the linear part
    samples = [(float(k), float(k)) for k in range(8)]
    samples += [(8.0 + k, 8.0 + 0.05 * k) for k in range(1, 4)]
    est = fit_growth_rate(samples, drop=(0, 0))
    lo, hi = est.window
    assert hi <= 8
    assert est.residual < 0.05


def test_fit_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_growth_rate([(1.0, 1.0)])
    with pytest.raises(DegenerateFitError):
        fit_growth_rate([(1.0, 1.0), (1.0, 2.0)])
