"""System abstraction, Bowen metrics, return times, shift functions and quantiles.

Everything here is window-relative: an orbit is only ever examined up to a
finite horizon ``N`` and shifts up to a cap ``s_max``, and every verdict
carries that window.  The ``UNRESOLVED`` sentinel means "not settled within
the window", never "infinite".
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import OutOfRangeError


class _Unresolved:
    """Sentinel for searches that did not settle within their window."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unresolved"

    def __bool__(self):
        return False


UNRESOLVED = _Unresolved()


def is_resolved(value) -> bool:
    return value is not UNRESOLVED and value is not None


# ---------------------------------------------------------------------------
# Dynamical systems
# ---------------------------------------------------------------------------

class DynamicalSystem:
    """A metric space together with a self-map.

    Subclasses provide ``distance``, ``step`` and ``diameter_bound``; the
    generic orbit/Bowen/return-time machinery below works off those three.
    Subclasses with exact closed forms (rotation, shift) override the generic
    methods; the tests hold the overrides against these defaults.

    ``distance`` may return ``UNRESOLVED`` when equality of two states is not
    decidable from their finite representation (symbolic cylinders); all
    generic code propagates that honestly.
    """

    diameter_bound: float = math.inf

    def distance(self, x, y):
        raise NotImplementedError

    def step(self, x):
        raise NotImplementedError

    def orbit(self, x, length: int) -> list:
        """States ``x, Tx, ..., T^length x`` (length + 1 entries)."""
        out = [x]
        for _ in range(length):
            out.append(self.step(out[-1]))
        return out

    def bowen_distance(self, x, y, l: int):
        """max of ``distance`` along the first ``l`` steps of both orbits."""
        best = 0.0
        unresolved = False
        for _ in range(l + 1):
            d = self.distance(x, y)
            if not is_resolved(d):
                unresolved = True
            elif d > best:
                best = d
            x = self.step(x)
            y = self.step(y)
        if unresolved:
            return UNRESOLVED
        return best

    def return_time(self, x, epsilon: float, l: int, s_max: int):
        """Least ``s`` in [1, s_max] with ``d_l(T^s x, x) < epsilon``.

        Returns ``UNRESOLVED`` when no return is found within the cap, or
        when an undecidable comparison precedes the first definite hit.
        """
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if s_max < 1:
            raise ValueError("s_max must be >= 1")
        window = self.orbit(x, s_max + l)
        saw_unresolved = False
        for s in range(1, s_max + 1):
            d = _bowen_from_window(self, window, s, l)
            if not is_resolved(d):
                saw_unresolved = True
                continue
            if d < epsilon:
                return UNRESOLVED if saw_unresolved else s
        return UNRESOLVED

    def shift_function(self, x, epsilon: float, l: int, horizon: int, s_max: int):
        """min over times ``n <= horizon`` of the return time of ``T^n x``.

        The running minimum caps later scans: a scan that cannot beat the
        current best is skipped early.  Unresolved only if every time is.
        """
        window = self.orbit(x, horizon + s_max + l)
        best = None
        for n in range(horizon + 1):
            cap = s_max if best is None else min(s_max, best - 1)
            if cap < 1:
                break
            s = _first_return_in_window(self, window, n, epsilon, l, cap)
            if is_resolved(s) and (best is None or s < best):
                best = s
                if best == 1:
                    break
        return UNRESOLVED if best is None else best

    def sample_states(self, rng, count: int) -> list:
        """Representative states for randomized metric/property suites."""
        raise NotImplementedError


def _bowen_from_window(sys, window, s, l):
    best = 0.0
    unresolved = False
    for i in range(l + 1):
        d = sys.distance(window[s + i], window[i])
        if not is_resolved(d):
            unresolved = True
        elif d > best:
            best = d
    return UNRESOLVED if unresolved else best


def _first_return_in_window(sys, window, n, epsilon, l, cap):
    saw_unresolved = False
    for s in range(1, cap + 1):
        best = 0.0
        unresolved = False
        for i in range(l + 1):
            d = sys.distance(window[n + s + i], window[n + i])
            if not is_resolved(d):
                unresolved = True
                break
            if d > best:
                best = d
                if best >= epsilon:
                    break
        if unresolved:
            saw_unresolved = True
            continue
        if best < epsilon:
            return UNRESOLVED if saw_unresolved else s
    return UNRESOLVED


class MapSystem(DynamicalSystem):
    """Ad-hoc system from plain callables; used in tests and examples."""

    def __init__(self, distance: Callable, step: Callable, diameter_bound: float,
                 sampler: Callable | None = None):
        self._distance = distance
        self._step = step
        self.diameter_bound = diameter_bound
        self._sampler = sampler

    def distance(self, x, y):
        return self._distance(x, y)

    def step(self, x):
        return self._step(x)

    def sample_states(self, rng, count):
        if self._sampler is None:
            raise NotImplementedError
        return [self._sampler(rng) for _ in range(count)]


# ---------------------------------------------------------------------------
# Orbit windows and shift profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitWindow:
    """A finite-horizon truncation of an orbit, iterates cached."""

    base: object
    horizon: int
    iterates: tuple

    @classmethod
    def compute(cls, sys: DynamicalSystem, base, horizon: int) -> "OrbitWindow":
        return cls(base=base, horizon=horizon,
                   iterates=tuple(sys.orbit(base, horizon)))

    def __getitem__(self, k):
        return self.iterates[k]


@dataclass(frozen=True)
class ShiftProfile:
    """Tabulated shift-function values over a decreasing epsilon grid."""

    length: int
    epsilon_grid: tuple
    values: tuple
    horizon: int
    s_max: int

    def resolved_items(self):
        return [(e, v) for e, v in zip(self.epsilon_grid, self.values)
                if is_resolved(v)]


# ---------------------------------------------------------------------------
# Quantile tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileTable:
    """A non-increasing unbounded function tabulated on a decreasing grid.

    The table is read as the left-continuous step function taking the value
    ``values[k]`` on ``(epsilons[k+1], epsilons[k]]``.  Quantiles are the
    sup/inf generalized inverses of that step function; on such a step
    function the two coincide at the breakpoint, and for a continuous
    bijective function both equal the plain inverse.
    """

    epsilons: tuple
    values: tuple

    def __post_init__(self):
        eps = self.epsilons
        vals = self.values
        if len(eps) != len(vals) or len(eps) < 2:
            raise ValueError("table needs >= 2 rows of equal length")
        for a, b in zip(eps, eps[1:]):
            if not b < a:
                raise ValueError("epsilon column must be strictly decreasing")
        for a, b in zip(vals, vals[1:]):
            if b < a:
                raise ValueError("values must be non-decreasing as epsilon decreases")

    @classmethod
    def from_function(cls, f: Callable[[float], float], epsilons: Sequence[float]) -> "QuantileTable":
        eps = tuple(sorted(set(epsilons), reverse=True))
        return cls(epsilons=eps, values=tuple(f(e) for e in eps))

    @property
    def eps_min(self):
        return self.epsilons[-1]

    @property
    def eps_max(self):
        return self.epsilons[0]

    def value_at(self, eps: float):
        """Step evaluation; defined on [eps_min, eps_max]."""
        if eps > self.eps_max or eps < self.eps_min:
            raise OutOfRangeError(f"epsilon {eps} outside table domain "
                                  f"[{self.eps_min}, {self.eps_max}]")
        # epsilons descend; find smallest grid point >= eps
        lo, hi = 0, len(self.epsilons) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.epsilons[mid] >= eps:
                lo = mid
            else:
                hi = mid - 1
        return self.values[lo]

    def quantile_left(self, s) -> float:
        """sup of the epsilons where the table value exceeds ``s``."""
        if self.values[-1] <= s:
            raise OutOfRangeError(f"s={s} at or above the table's value range")
        if self.values[0] > s:
            raise OutOfRangeError(f"s={s} below the table's value range")
        for eps, v in zip(self.epsilons, self.values):
            if v > s:
                return eps
        raise AssertionError("unreachable")

    def quantile_right(self, s) -> float:
        """inf of the epsilons where the table value is at most ``s``.

        The region {F <= s} of the step function is the open interval above
        the first grid point whose value exceeds ``s``, so the infimum lands
        on that same grid point.
        """
        if self.values[-1] <= s:
            raise OutOfRangeError(f"s={s} at or above the table's value range")
        if self.values[0] > s:
            raise OutOfRangeError(f"s={s} below the table's value range")
        boundary = None
        for eps, v in zip(self.epsilons, self.values):
            if v > s:
                boundary = eps
                break
        return boundary


def quantile_left(table: QuantileTable, s) -> float:
    return table.quantile_left(s)


def quantile_right(table: QuantileTable, s) -> float:
    return table.quantile_right(s)


def geometric_grid(eps_max: float, ratio: float = 0.5, count: int = 10) -> tuple:
    """Decreasing geometric epsilon grid; log-log slopes want geometric spacing."""
    if not (0 < ratio < 1) or eps_max <= 0 or count < 1:
        raise ValueError("need eps_max > 0, 0 < ratio < 1, count >= 1")
    return tuple(eps_max * ratio ** k for k in range(count))


# ---------------------------------------------------------------------------
# Shift-function operations (module-level API)
# ---------------------------------------------------------------------------

def bowen_distance(sys: DynamicalSystem, x, y, l: int):
    """Bowen distance of length ``l``; equals the base metric at ``l = 0``."""
    if l < 0:
        raise ValueError("l must be >= 0")
    return sys.bowen_distance(x, y, l)


def return_time(sys: DynamicalSystem, x, epsilon: float, l: int, s_max: int):
    return sys.return_time(x, epsilon, l, s_max)


def shift_function(sys: DynamicalSystem, x, epsilon: float, l: int,
                   horizon: int, s_max: int):
    return sys.shift_function(x, epsilon, l, horizon, s_max)


def shift_profile(sys: DynamicalSystem, x, epsilon_grid: Sequence[float], l: int,
                  horizon: int, s_max: int) -> ShiftProfile:
    grid = tuple(epsilon_grid)
    for a, b in zip(grid, grid[1:]):
        if not b < a:
            raise ValueError("epsilon grid must be strictly decreasing")
    values = tuple(sys.shift_function(x, eps, l, horizon, s_max) for eps in grid)
    return ShiftProfile(length=l, epsilon_grid=grid, values=values,
                        horizon=horizon, s_max=s_max)


# ---------------------------------------------------------------------------
# Aperiodicity verdicts
# ---------------------------------------------------------------------------

HOLDS_ON_WINDOW = "holds-on-window"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AperiodicityVerdict:
    """Window-relative verdict; never a claim about the infinite orbit."""

    status: str
    witness: tuple | None          # (n, s, epsilon) on violation
    window: dict = field(compare=False)


def is_F_aperiodic(sys: DynamicalSystem, x, F: QuantileTable, l: int,
                   horizon: int, s_max: int) -> AperiodicityVerdict:
    """Search the window for a recurrence beating the profile ``F``.

    Violated iff some ``n <= horizon``, ``s <= s_max`` and grid epsilon have
    ``d_l(T^n x, T^{n+s} x) < eps`` while ``s < F(eps)``.  Since F is
    non-increasing, for a recurrence at distance ``d`` the binding grid point
    is the smallest grid epsilon exceeding ``d``.
    """
    window = dict(horizon=horizon, s_max=s_max, length=l,
                  eps_max=F.eps_max, eps_min=F.eps_min)
    # ascending copy of the grid for bisection
    asc = sorted(F.epsilons)
    values_by_eps = {e: v for e, v in zip(F.epsilons, F.values)}
    # shifts at or beyond the largest table value can never violate
    s_cap = min(s_max, int(math.ceil(max(F.values))) - 1)
    if s_cap < 1:
        return AperiodicityVerdict(HOLDS_ON_WINDOW, None, window)
    orbit = sys.orbit(x, horizon + s_cap + l)
    saw_unresolved = False
    for n in range(horizon + 1):
        for s in range(1, s_cap + 1):
            d = _bowen_pair(sys, orbit, n, s, l)
            if not is_resolved(d):
                saw_unresolved = True
                continue
            i = bisect.bisect_right(asc, d)
            if i == len(asc):
                continue                      # recurrence coarser than the grid
            eps_hat = asc[i]
            if s < values_by_eps[eps_hat]:
                return AperiodicityVerdict(VIOLATED, (n, s, eps_hat), window)
    status = INCONCLUSIVE if saw_unresolved else HOLDS_ON_WINDOW
    return AperiodicityVerdict(status, None, window)


def _bowen_pair(sys, orbit, n, s, l):
    best = 0.0
    for i in range(l + 1):
        d = sys.distance(orbit[n + i], orbit[n + s + i])
        if not is_resolved(d):
            return UNRESOLVED
        if d > best:
            best = d
    return best
