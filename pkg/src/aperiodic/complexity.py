"""Separated nets and the four growth-rate estimators.

Net counts over a finite candidate cloud undercount the true covering
numbers of the space, so every consumer here tests one-sided inequalities
only.  All slopes are least-squares fits over an explicitly recorded window
and carry their RMS residual; a slope without a small residual is garbage
and the acceptance gates treat it as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DynamicalSystem, ShiftProfile, is_resolved
from .errors import DegenerateFitError, TooFewResolvedError


@dataclass(frozen=True)
class SeparatedNet:
    """A greedy maximal separated subset of the candidates, in scan order.

    ``points`` holds states for list candidates, or the kept rows of the
    packed candidate matrix for array candidates.
    """

    length: int
    epsilon: float
    points: Sequence
    kept_indices: tuple
    candidate_count: int

    @property
    def size(self) -> int:
        return len(self.kept_indices)


def maximal_separated_net(sys: DynamicalSystem, candidates, epsilon: float,
                          l: int) -> SeparatedNet:
    """Greedy pass in candidate order: keep iff >= epsilon from all kept.

    Every rejected candidate is within epsilon of some kept point, so the
    result is maximal within the candidates by construction.  Systems with a
    packed fast path (exact greedy equivalents) are used when available; the
    tests pin them to this generic loop.
    """
    if _count(candidates) == 0:
        raise ValueError("candidates must be nonempty")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if hasattr(sys, "separated_net_indices"):
        kept = sys.separated_net_indices(candidates, epsilon, l)
        if kept is not None:
            kept = tuple(int(i) for i in kept)
            points = (candidates[list(kept)] if isinstance(candidates, np.ndarray)
                      else [candidates[i] for i in kept])
            return SeparatedNet(length=l, epsilon=epsilon, points=points,
                                kept_indices=kept,
                                candidate_count=_count(candidates))
    kept = []
    points = []
    for i in range(_count(candidates)):
        c = candidates[i]
        clash = False
        for p in points:
            d = sys.bowen_distance(c, p, l)
            if is_resolved(d) and d < epsilon:
                clash = True
                break
        if not clash:
            kept.append(i)
            points.append(c)
    return SeparatedNet(length=l, epsilon=epsilon, points=points,
                        kept_indices=tuple(kept),
                        candidate_count=_count(candidates))


def _count(candidates) -> int:
    return candidates.shape[0] if isinstance(candidates, np.ndarray) else len(candidates)


def separated_net_size(sys, candidates, epsilon: float, l: int) -> int:
    return maximal_separated_net(sys, candidates, epsilon, l).size


# ---------------------------------------------------------------------------
# Log-log fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthRateEstimate:
    """Least-squares slope over a recorded window of log-log samples."""

    slope: float
    window: tuple               # (first index, last index) into samples
    residual: float             # RMS error of the fit over the window
    samples: tuple              # (x, y) pairs, x ascending

    def to_dict(self) -> dict:
        return {"slope": self.slope, "window": list(self.window),
                "residual": self.residual,
                "samples": [list(p) for p in self.samples]}


def _least_squares(xs, ys):
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xm, ym = x.mean(), y.mean()
    den = float(np.sum((x - xm) ** 2))
    if den == 0:
        raise DegenerateFitError("all x-values coincide")
    slope = float(np.sum((x - xm) * (y - ym)) / den)
    icpt = ym - slope * xm
    resid = float(np.sqrt(np.mean((slope * x + icpt - y) ** 2)))
    return slope, resid


def fit_growth_rate(samples: Sequence[tuple], drop: tuple = (2, 2),
                    residual_threshold: float = 0.05,
                    min_points: int = 3,
                    min_window_fraction: float = 0.6) -> GrowthRateEstimate:
    """Window-selected slope of y against x.

    The default drops trim boundary effects at both ends (shrunk when the
    series is short), then the largest contiguous window with RMS residual
    below the threshold wins, ties to the smaller residual.  A window must
    also cover ``min_window_fraction`` of the post-drop points: without that
    floor, quantized staircase data (integer shift values) hands the win to
    tiny windows that track a single step instead of the trend.  When no
    window qualifies the full post-drop range is fitted and its residual
    reported; callers gate on it.
    """
    samples = sorted(samples)
    m = len(samples)
    if m < 2:
        raise DegenerateFitError("need at least two samples")
    lo = min(drop[0], max(0, (m - min_points) // 2))
    hi = min(drop[1], max(0, (m - min_points) // 2))
    if m - lo - hi >= min_points:
        inner = samples[lo:m - hi]
        offset = lo
    else:
        inner = samples
        offset = 0
    xs = [p[0] for p in inner]
    ys = [p[1] for p in inner]
    n = len(inner)
    floor = max(min_points, math.ceil(min_window_fraction * n))
    best = None
    for i in range(n):
        for j in range(i + floor - 1, n):
            slope, resid = _least_squares(xs[i:j + 1], ys[i:j + 1])
            if resid < residual_threshold:
                size = j - i + 1
                key = (size, -resid)
                if best is None or key > best[0]:
                    best = (key, i, j, slope, resid)
    if best is not None:
        _, i, j, slope, resid = best
        return GrowthRateEstimate(slope=slope, window=(offset + i, offset + j),
                                  residual=resid, samples=tuple(samples))
    slope, resid = _least_squares(xs, ys)
    return GrowthRateEstimate(slope=slope, window=(offset, offset + n - 1),
                              residual=resid, samples=tuple(samples))


# ---------------------------------------------------------------------------
# Complexity estimators
# ---------------------------------------------------------------------------

def net_counts(sys, candidates, epsilon_grid: Sequence[float], l: int = 0) -> list:
    """(epsilon, net size) per grid point, one greedy net each."""
    return [(eps, separated_net_size(sys, candidates, eps, l))
            for eps in epsilon_grid]


def box_dimension_estimate(sys, candidates, epsilon_grid: Sequence[float],
                           drop: tuple = (2, 2),
                           residual_threshold: float = 0.05) -> GrowthRateEstimate:
    """Slope of log N(eps) against -log eps over the fit window."""
    grid = tuple(epsilon_grid)
    if len(grid) < 5:
        raise ValueError("need a geometric grid with >= 5 points")
    counts = net_counts(sys, candidates, grid, l=0)
    sizes = {c for _, c in counts}
    if len(sizes) == 1:
        raise DegenerateFitError(f"all net sizes equal {sizes.pop()}")
    samples = [(-math.log(eps), math.log(cnt)) for eps, cnt in counts]
    return fit_growth_rate(samples, drop=drop,
                           residual_threshold=residual_threshold)


def bowen_net_counts(sys, candidates, epsilon: float, l_range: Sequence[int]) -> list:
    """(l, net size in d_l at fixed epsilon) per length."""
    return [(l, separated_net_size(sys, candidates, epsilon, l))
            for l in l_range]


def topological_entropy_estimate(sys, candidates, epsilon: float,
                                 l_range: Sequence[int], drop: tuple = (2, 2),
                                 residual_threshold: float = 0.05) -> GrowthRateEstimate:
    """Slope of log N_T(l, eps) against l at fixed eps.

    The caller owns the outer limit: sweep epsilon downward and report the
    stabilized slope.
    """
    lengths = sorted(set(int(l) for l in l_range))
    if len(lengths) < 5:
        raise ValueError("need >= 5 lengths")
    counts = bowen_net_counts(sys, candidates, epsilon, lengths)
    sizes = {c for _, c in counts}
    if sizes == {1}:
        raise DegenerateFitError("every net is a single point")
    # counts constant in l is the zero-entropy signature (isometries), a
    # legitimate slope-0 outcome rather than a degenerate fit
    samples = [(float(l), math.log(cnt)) for l, cnt in counts]
    return fit_growth_rate(samples, drop=drop,
                           residual_threshold=residual_threshold)


def growth_rate_F(profile: ShiftProfile, drop: tuple = (2, 2),
                  residual_threshold: float = 0.05) -> GrowthRateEstimate:
    """Slope of log F against -log eps from the resolved profile entries."""
    if profile.length != 0:
        raise ValueError("the scale growth rate reads a length-0 profile")
    resolved = profile.resolved_items()
    if len(resolved) < 5:
        raise TooFewResolvedError(
            f"only {len(resolved)} resolved entries, need >= 5")
    samples = [(-math.log(eps), math.log(v)) for eps, v in resolved]
    return fit_growth_rate(samples, drop=drop,
                           residual_threshold=residual_threshold)


def growth_rate_G(profiles: Sequence[ShiftProfile], epsilon: float,
                  drop: tuple = (2, 2),
                  residual_threshold: float = 0.05) -> GrowthRateEstimate:
    """Slope of log F^l(eps) against l at fixed eps.

    Takes one profile per length; the caller sweeps epsilon downward (the
    outer limit) and watches for stabilization.
    """
    samples = []
    for prof in profiles:
        try:
            i = prof.epsilon_grid.index(epsilon)
        except ValueError:
            continue
        v = prof.values[i]
        if is_resolved(v):
            samples.append((float(prof.length), math.log(v)))
    if len(samples) < 5:
        raise TooFewResolvedError(
            f"only {len(samples)} resolved lengths at eps={epsilon}, need >= 5")
    return fit_growth_rate(samples, drop=drop,
                           residual_threshold=residual_threshold)
