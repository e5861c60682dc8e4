"""Periodic anchors, critical neighborhoods, approximation constants and
closing-property checkers.

The checkers are falsifiers, not verifiers: a clean report means "no
counterexample within this registry and budget", nothing stronger, and every
report says so.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (UNRESOLVED, DynamicalSystem, QuantileTable, is_resolved)
from .errors import MalformedEventError, OutOfRangeError

NUMERIC_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class PeriodicPoint:
    """A state with a certified period.

    ``residual`` is d(T^p x, x) as measured at construction (0 for exact
    systems).  ``primitive`` is True when the period is known primitive,
    None when unchecked (e.g. closing-lemma witnesses, whose period may be a
    multiple of the primitive one).
    """

    state: object
    period: int
    residual: float = 0.0
    primitive: bool | None = True

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be >= 1")
        if self.residual > NUMERIC_RESIDUAL_TOL:
            raise ValueError(f"residual {self.residual} exceeds certification bound")

    def verify(self, sys: DynamicalSystem) -> float:
        """Recompute the certification residual d(T^p x, x)."""
        y = self.state
        for _ in range(self.period):
            y = sys.step(y)
        return sys.distance(y, self.state)


class ClosingFunction:
    """Non-decreasing eps -> delta(eps), as a callable with a description.

    Tables and closed forms both construct through here; monotonicity of
    tables is validated, callables are trusted and spot-checked in tests.
    """

    def __init__(self, fn: Callable[[float], float], description: str):
        self._fn = fn
        self.description = description

    def __call__(self, eps: float) -> float:
        return self._fn(eps)

    @classmethod
    def from_scale(cls, factor: float) -> "ClosingFunction":
        return cls(lambda e: factor * e, f"delta(eps) = {factor} * eps")

    @classmethod
    def from_table(cls, rows: Sequence[tuple]) -> "ClosingFunction":
        rows = sorted(rows)
        for (e1, d1), (e2, d2) in zip(rows, rows[1:]):
            if d2 < d1:
                raise ValueError("closing table must be non-decreasing")
        eps_col = [e for e, _ in rows]
        delta_col = [d for _, d in rows]

        def fn(eps):
            # step interpolation, conservative upward
            import bisect
            i = bisect.bisect_left(eps_col, eps)
            return delta_col[min(i, len(delta_col) - 1)]

        return cls(fn, f"table with {len(rows)} rows")


class StrongClosingFunction:
    """The strong variant: per-epsilon length offset delta_eps(l)."""

    def __init__(self, fn: Callable[[float, int], float], description: str):
        self._fn = fn
        self.description = description

    def __call__(self, eps: float, l: int) -> float:
        return self._fn(eps, l)

    @classmethod
    def length_offset(cls) -> "StrongClosingFunction":
        return cls(lambda eps, l: l, "delta_eps(l) = l")


@dataclass(frozen=True)
class ApproximationRecord:
    """Smallest critical-neighborhood scale of an anchor hit by the orbit.

    The closed form min_n max(d(T^n x, x_p), d(T^{n+p} x, x_p)) unwinds the
    definition: T^n x enters the eps-neighborhood of x_p iff both distances
    are below eps, so the infimum of admissible eps is exactly that max,
    minimized over the window.
    """

    subject: object
    anchor: PeriodicPoint
    horizon: int
    constant: float
    attained_at: int


# ---------------------------------------------------------------------------
# Critical neighborhoods
# ---------------------------------------------------------------------------

def critical_radius(F: QuantileTable, p: int) -> float:
    """Radius of the critical neighborhood of a period-p anchor: F_left(p)/2."""
    return F.quantile_left(p) / 2.0


def in_critical_neighborhood(sys: DynamicalSystem, y, x_p: PeriodicPoint,
                             rho: float) -> bool:
    """Inside iff within rho of the anchor both now and after p steps."""
    if not sys.distance(y, x_p.state) < rho:
        return False
    z = y
    for _ in range(x_p.period):
        z = sys.step(z)
    return sys.distance(z, x_p.state) < rho


def approximation_constant(sys: DynamicalSystem, x, x_p: PeriodicPoint,
                           horizon: int, orbit=None) -> ApproximationRecord:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    p = x_p.period
    if orbit is None:
        orbit = sys.orbit(x, horizon + p)
    elif len(orbit) < horizon + p + 1:
        raise ValueError("provided orbit is shorter than horizon + period")
    anchor = x_p.state
    if hasattr(sys, "batch_distance"):
        d = sys.batch_distance(orbit, anchor)
        best, n_star = math.inf, 0
        for n in range(horizon + 1):
            v = d[n] if d[n] > d[n + p] else d[n + p]
            if v < best:
                best, n_star = v, n
    else:
        best, n_star = math.inf, 0
        for n in range(horizon + 1):
            v = max(sys.distance(orbit[n], anchor),
                    sys.distance(orbit[n + p], anchor))
            if v < best:
                best, n_star = v, n
    return ApproximationRecord(subject=x, anchor=x_p, horizon=horizon,
                               constant=best, attained_at=n_star)


def penetration_length(sys: DynamicalSystem, x0, y, epsilon: float, l_max: int):
    """Iterates the pair until the orbit of y exits the eps-tube around x0.

    0 when y starts outside; the first exit index otherwise; UNRESOLVED when
    the scan is still inside at l_max.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a, b = x0, y
    for i in range(l_max + 1):
        d = sys.distance(b, a)
        if not is_resolved(d):
            return UNRESOLVED
        if d >= epsilon:
            return i
        a = sys.step(a)
        b = sys.step(b)
    return UNRESOLVED


def hurwitz_estimate(sys: DynamicalSystem, x_p: PeriodicPoint,
                     sample: Sequence, horizon: int) -> float:
    """Max approximation constant over the sample; a lower bound for the
    anchor's Hurwitz constant, never above the diameter bound."""
    if not sample:
        raise ValueError("sample must be nonempty")
    best = max(approximation_constant(sys, x, x_p, horizon).constant
               for x in sample)
    if best > sys.diameter_bound:
        raise AssertionError(
            f"Hurwitz estimate {best} exceeds diameter bound {sys.diameter_bound}")
    return best


# ---------------------------------------------------------------------------
# Closing-property checkers
# ---------------------------------------------------------------------------

_FALSIFIER_NOTE = ("no counterexample within this registry and budget; "
                   "the registry may be incomplete")


@dataclass
class ClosingReport:
    checked: int
    counterexamples: list = field(default_factory=list)
    vacuous: int = 0
    note: str = _FALSIFIER_NOTE

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> str:
        return json.dumps({
            "checked": self.checked,
            "vacuous": self.vacuous,
            "counterexamples": self.counterexamples,
            "ok": self.ok,
            "note": self.note,
        }, indent=2, sort_keys=True)


def check_delta_closing(sys: DynamicalSystem, delta: ClosingFunction,
                        registry: Sequence[PeriodicPoint],
                        events: Sequence[tuple]) -> ClosingReport:
    """Events are (x, s, eps) with d(x, T^s x) < eps already true.

    For each event, some registry anchor of period s (primitive period
    dividing s) must carry x in its delta(eps)-critical neighborhood.
    Events with delta(eps) above the diameter bound are vacuous.
    """
    by_period = _index_by_period(registry)
    report = ClosingReport(checked=0)
    for idx, (x, s, eps) in enumerate(events):
        z = x
        for _ in range(s):
            z = sys.step(z)
        premise = sys.distance(x, z)
        if not (is_resolved(premise) and premise < eps):
            raise MalformedEventError(
                f"event {idx}: d(x, T^s x) = {premise} not < {eps}")
        report.checked += 1
        d = delta(eps)
        if d > sys.diameter_bound:
            report.vacuous += 1
            continue
        found = False
        for anchor in _anchors_of_period(by_period, s):
            if (sys.distance(x, anchor.state) < d
                    and sys.distance(z, anchor.state) < d):
                found = True
                break
        if not found:
            report.counterexamples.append(
                {"event": idx, "shift": s, "epsilon": eps, "delta": d})
    return report


def _index_by_period(registry):
    index = {}
    for anchor in registry:
        index.setdefault(anchor.period, []).append(anchor)
    return index


def _anchors_of_period(index, s):
    """Anchors whose stored (primitive) period divides s, hence of period s."""
    for p in sorted(index):
        if p > s:
            break
        if s % p == 0:
            yield from index[p]


def check_strong_delta_closing(sys: DynamicalSystem,
                               delta_eps: StrongClosingFunction,
                               registry: Sequence[PeriodicPoint],
                               events: Sequence[tuple]) -> ClosingReport:
    """Events are (x, s, l, eps) with d_l(x, T^s x) < eps already true.

    The witness condition is a penetration length of at least
    s + delta_eps(l) + 1 in the eps-tube around the anchor.
    """
    by_period = _index_by_period(registry)
    report = ClosingReport(checked=0)
    for idx, (x, s, l, eps) in enumerate(events):
        premise = sys.bowen_distance(x, _power(sys, x, s), l)
        if not (is_resolved(premise) and premise < eps):
            raise MalformedEventError(
                f"event {idx}: d_l(x, T^s x) = {premise} not < {eps}")
        report.checked += 1
        bound = s + delta_eps(eps, l) + 1
        cap = int(math.ceil(bound))
        found = False
        for anchor in _anchors_of_period(by_period, s):
            pen = penetration_length(sys, anchor.state, x, eps, cap)
            if not is_resolved(pen) or pen >= bound:
                # an unresolved scan survived past the cap, which certifies
                # the bound
                found = True
                break
        if not found:
            report.counterexamples.append(
                {"event": idx, "shift": s, "length": l, "epsilon": eps,
                 "required_penetration": bound})
    return report


def _power(sys, x, s):
    for _ in range(s):
        x = sys.step(x)
    return x


# ---------------------------------------------------------------------------
# Bounded-orbit classification
# ---------------------------------------------------------------------------

def classify_bounded(sys: DynamicalSystem, x, F: QuantileTable,
                     registry: Sequence[PeriodicPoint], horizon: int) -> list:
    """Per-anchor membership of the orbit window in the F-bounded set.

    Member iff the window avoids the anchor's critical neighborhood.  The
    avoidance scan and the approximation constant are computed from the same
    window, so member must equal (constant >= radius); both are reported and
    the consistency bit asserted by the caller's tests.
    """
    max_p = max((a.period for a in registry), default=0)
    orbit = sys.orbit(x, horizon + max_p)
    batched = hasattr(sys, "batch_distance")
    out = []
    for anchor in registry:
        try:
            rho = critical_radius(F, anchor.period)
        except OutOfRangeError:
            out.append({"anchor": anchor, "skipped": "period outside F range"})
            continue
        p = anchor.period
        if batched:
            d = sys.batch_distance(orbit, anchor.state)
            pair = np.maximum(d[:horizon + 1], d[p:p + horizon + 1])
            n_star = int(np.argmin(pair))
            rec_constant, rec_at = float(pair[n_star]), n_star
            hits = (d[:horizon + 1] < rho) & (d[p:p + horizon + 1] < rho)
            hit = int(np.argmax(hits)) if bool(hits.any()) else None
        else:
            rec = approximation_constant(sys, x, anchor, horizon, orbit=orbit)
            rec_constant, rec_at = rec.constant, rec.attained_at
            hit = None
            for n in range(horizon + 1):
                if (sys.distance(orbit[n], anchor.state) < rho
                        and sys.distance(orbit[n + p], anchor.state) < rho):
                    hit = n
                    break
        member = hit is None
        out.append({
            "anchor": anchor,
            "member": member,
            "radius": rho,
            "approx_constant": rec_constant,
            "attained_at": rec_at,
            "first_hit": hit,
            "consistent": member == (rec_constant >= rho),
        })
    return out


# ---------------------------------------------------------------------------
# Quantiles for two-parameter profiles (length direction)
# ---------------------------------------------------------------------------

def g_quantile_left(table: Sequence[tuple], s: float) -> int:
    """min l with G(l) >= s over a non-decreasing (l, value) table."""
    rows = sorted(table)
    for l, v in rows:
        if v >= s:
            return l
    raise OutOfRangeError(f"G never reaches {s} on the table")


def g_quantile_right(table: Sequence[tuple], s: float) -> int:
    """max l with G(l) <= s over a non-decreasing (l, value) table."""
    rows = sorted(table)
    best = None
    for l, v in rows:
        if v <= s:
            best = l
    if best is None:
        raise OutOfRangeError(f"G starts above {s} on the table")
    return best


# ---------------------------------------------------------------------------
# Registry (de)serialization
# ---------------------------------------------------------------------------

def registry_to_json(sys, registry: Sequence[PeriodicPoint]) -> str:
    rows = [{"state": sys.encode_state(a.state), "period": a.period}
            for a in registry]
    return json.dumps(rows, indent=2, sort_keys=True)


def registry_from_json(sys, text: str) -> list:
    rows = json.loads(text)
    out = []
    for row in rows:
        state = sys.decode_state(row["state"])
        point = PeriodicPoint(state=state, period=int(row["period"]),
                              residual=0.0, primitive=None)
        out.append(point)
    return out
