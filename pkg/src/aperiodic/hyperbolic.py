"""Upper half-plane toolbox: isometries, axes, displacement and shadowing
bounds, the metric closing-lemma checker, geodesic penetration, orbital
counting, and a cyclic-quotient geodesic system.

Everything runs in the universal cover H^2.  All constructions route through
conjugation to the imaginary axis, where the closed forms live:
``d(z, i R) = arccosh(|z| / Im z)`` and unit-speed parametrization
``t -> i e^t``.  Tube and containment checks sample at a fixed resolution;
distance along a unit-speed geodesic is 1-Lipschitz, so the value between
samples differs from a sampled value by at most half the step.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DynamicalSystem
from .errors import (DomainError, HypothesisFailedError, NotHyperbolicError,
                     PreconditionFailedError)

DELTA0 = math.log(1.0 + math.sqrt(2.0))   # thin-triangle constant of H^2

_MIN_IM = 1e-300
_SAMPLE_STEP = 0.01


@dataclass(frozen=True)
class HPoint:
    """A point u + iv of the upper half-plane, v > 0 (underflow-guarded)."""

    u: float
    v: float

    def __post_init__(self):
        if not self.v > _MIN_IM:
            raise DomainError(f"imaginary part {self.v} not positive")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    def as_complex(self) -> complex:
        return complex(self.u, self.v)


def _as_complex(z) -> complex:
    if isinstance(z, HPoint):
        return z.as_complex()
    return complex(z)


def hyp_distance(z, w) -> float:
    """arccosh(1 + |z - w|^2 / (2 Im z Im w))."""
    z, w = _as_complex(z), _as_complex(w)
    if not (z.imag > _MIN_IM and w.imag > _MIN_IM):
        raise DomainError("points must lie in the upper half-plane")
    arg = 1.0 + (abs(z - w) ** 2) / (2.0 * z.imag * w.imag)
    return math.acosh(max(arg, 1.0))


def hyp_distance_array(z, w) -> np.ndarray:
    """Elementwise hyp_distance over complex arrays."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    arg = 1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    return np.arccosh(np.maximum(arg, 1.0))


# ---------------------------------------------------------------------------
# Isometries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Isometry:
    """Determinant-one 2x2 real matrix, identified with its negation."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det <= 0:
            raise ValueError("matrix must have positive determinant")
        if abs(det - 1.0) > 1e-12:
            s = math.sqrt(det)
            object.__setattr__(self, "a", self.a / s)
            object.__setattr__(self, "b", self.b / s)
            object.__setattr__(self, "c", self.c / s)
            object.__setattr__(self, "d", self.d / s)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def dilation(cls, length: float) -> "Isometry":
        """Translation by ``length`` along the imaginary axis."""
        e = math.exp(length / 2.0)
        return cls(e, 0.0, 0.0, 1.0 / e)

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def is_hyperbolic(self) -> bool:
        return abs(self.trace) > 2.0

    def apply(self, z):
        z = _as_complex(z)
        den = self.c * z + self.d
        if den == 0:
            raise DomainError("point maps to the boundary at infinity")
        return (self.a * z + self.b) / den

    def apply_array(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        return (self.a * zs + self.b) / (self.c * zs + self.d)

    def apply_boundary(self, x: float) -> float:
        if x == math.inf:
            return self.a / self.c if self.c != 0 else math.inf
        den = self.c * x + self.d
        if den == 0:
            return math.inf
        return (self.a * x + self.b) / den

    def compose(self, other: "Isometry") -> "Isometry":
        return Isometry(self.a * other.a + self.b * other.c,
                        self.a * other.b + self.b * other.d,
                        self.c * other.a + self.d * other.c,
                        self.c * other.b + self.d * other.d)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "Isometry":
        return Isometry(self.d, -self.b, -self.c, self.a)

    def canonical_entries(self, grid: float = 1e-9) -> tuple:
        """Sign-normalized, grid-rounded entries for deduplication."""
        entries = (self.a, self.b, self.c, self.d)
        for e in entries:
            if abs(e) > grid:
                if e < 0:
                    entries = tuple(-x for x in entries)
                break
        return tuple(round(e / grid) * grid for e in entries)


def translation_length(psi: Isometry) -> float:
    """2 arccosh(|trace| / 2); the displacement infimum, attained on the axis."""
    if not psi.is_hyperbolic:
        raise NotHyperbolicError(f"|trace| = {abs(psi.trace)} <= 2")
    return 2.0 * math.acosh(abs(psi.trace) / 2.0)


# ---------------------------------------------------------------------------
# Geodesic lines
# ---------------------------------------------------------------------------

def _line_conjugator(p: float, q: float) -> Isometry:
    """Determinant-positive map sending the line (p, q) to (0, infinity)."""
    if p == q:
        raise ValueError("endpoints must be distinct")
    if q == math.inf:
        return Isometry(1.0, -p, 0.0, 1.0)
    if p == math.inf:
        return Isometry(0.0, -1.0, 1.0, -q)
    if p < q:
        return Isometry(-1.0, p, 1.0, -q)    # (p - z)/(z - q), det = q - p
    return Isometry(1.0, -p, 1.0, -q)        # (z - p)/(z - q), det = p - q


@dataclass(frozen=True)
class GeodesicLine:
    """Oriented geodesic with boundary endpoints and an anchored unit-speed
    parametrization gamma(t) = C^{-1}(i e^{t + t0})."""

    start: float                 # repelling / negative endpoint
    end: float                   # attracting / positive endpoint
    anchor_shift: float = 0.0
    _conj: Isometry = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_conj", _line_conjugator(self.start, self.end))

    @classmethod
    def from_endpoints(cls, p: float, q: float) -> "GeodesicLine":
        return cls(start=p, end=q)

    @classmethod
    def through_points(cls, z, w) -> "GeodesicLine":
        """Geodesic through two interior points, oriented z -> w, gamma(0) = z."""
        z, w = _as_complex(z), _as_complex(w)
        if abs(z - w) == 0:
            raise ValueError("points must be distinct")
        scale = abs(z) + abs(w)
        if abs(z.real - w.real) < 1e-14 * max(scale, 1.0):
            p, q = (z.real, math.inf) if w.imag > z.imag else (math.inf, z.real)
        else:
            cx = (abs(w) ** 2 - abs(z) ** 2) / (2.0 * (w.real - z.real))
            r = abs(z - cx)
            p, q = cx - r, cx + r
        line = cls(start=p, end=q)
        tz = line.parameter_of(z)
        tw = line.parameter_of(w)
        if tw < tz:
            line = cls(start=q, end=p)
            tz = line.parameter_of(z)
        return cls(start=line.start, end=line.end, anchor_shift=tz)

    def parameter_of(self, z) -> float:
        """Axis parameter of the closest-point projection of z (before anchor)."""
        zz = self._conj.apply(_as_complex(z))
        return math.log(abs(zz)) - self.anchor_shift

    def point(self, t: float) -> complex:
        return self._conj.inverse().apply(1j * math.exp(t + self.anchor_shift))

    def points(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        return self._conj.inverse().apply_array(
            1j * np.exp(ts + self.anchor_shift))

    def dist_to(self, z) -> float:
        zz = self._conj.apply(_as_complex(z))
        if zz.imag <= _MIN_IM:
            raise DomainError("point conjugates onto the boundary")
        return math.acosh(max(abs(zz) / zz.imag, 1.0))

    def dist_to_array(self, zs) -> np.ndarray:
        zz = self._conj.apply_array(zs)
        return np.arccosh(np.maximum(np.abs(zz) / zz.imag, 1.0))

    def transform(self, g: Isometry) -> "GeodesicLine":
        p = g.apply_boundary(self.start)
        q = g.apply_boundary(self.end)
        image_anchor = g.apply(self.point(0.0))
        line = GeodesicLine(start=p, end=q)
        return GeodesicLine(start=p, end=q,
                            anchor_shift=line.parameter_of(image_anchor))

    def offset_point(self, t: float, rho: float, side: int = 1) -> complex:
        """The point at perpendicular distance rho from gamma(t).

        In the conjugated frame the equidistant locus at distance rho is the
        ray at angle arccos(1/cosh(rho)) off the vertical.
        """
        if rho < 0:
            raise ValueError("rho must be >= 0")
        ang = math.pi / 2.0 - (1 if side >= 0 else -1) * math.acos(1.0 / math.cosh(rho))
        zz = cmath.exp(1j * ang) * math.exp(t + self.anchor_shift)
        return self._conj.inverse().apply(zz)


def axis(psi: Isometry) -> GeodesicLine:
    """Invariant geodesic, oriented so psi translates toward its end."""
    if not psi.is_hyperbolic:
        raise NotHyperbolicError(f"|trace| = {abs(psi.trace)} <= 2")
    if psi.c == 0:
        x = psi.b / (psi.d - psi.a)
        # z -> (a/d) z + b/d fixes infinity; attracting iff |a/d| > 1
        if abs(psi.a / psi.d) > 1.0:
            return GeodesicLine.from_endpoints(x, math.inf)
        return GeodesicLine.from_endpoints(math.inf, x)
    # fixed points solve c x^2 + (d - a) x - b = 0; pair the stable root with
    # the product of roots -b/c to dodge the cancellation at a - d ~ -+disc
    disc = math.sqrt(psi.trace ** 2 - 4.0)
    u = psi.a - psi.d
    if u >= 0:
        x1 = (u + disc) / (2.0 * psi.c)
    else:
        x1 = (u - disc) / (2.0 * psi.c)
    x2 = -psi.b / (psi.c * x1)
    # attracting fixed point has Mobius derivative 1/(c x + d)^2 below 1
    if abs(psi.c * x1 + psi.d) > 1.0:
        return GeodesicLine.from_endpoints(x2, x1)
    return GeodesicLine.from_endpoints(x1, x2)


def dist_to_geodesic(z, line: GeodesicLine) -> float:
    return line.dist_to(z)


# ---------------------------------------------------------------------------
# Displacement and shadowing checks
# ---------------------------------------------------------------------------

def displacement_bounds_check(psi: Isometry, z) -> dict:
    """Sandwich max{2 d(z, A), |psi|} - 4 delta0 <= d(z, psi z) <= |psi| + 2 d(z, A)."""
    length = translation_length(psi)
    if length < 4.0 * DELTA0:
        raise PreconditionFailedError(
            f"translation length {length} below 4 delta0 = {4 * DELTA0}")
    z = _as_complex(z)
    line = axis(psi)
    dist_axis = line.dist_to(z)
    moved = hyp_distance(z, psi.apply(z))
    lower = max(2.0 * dist_axis, length) - 4.0 * DELTA0
    upper = length + 2.0 * dist_axis
    return {
        "translation_length": length,
        "dist_to_axis": dist_axis,
        "displacement": moved,
        "lower": lower,
        "upper": upper,
        "lower_slack": moved - lower,
        "upper_slack": upper - moved,
        "ok": lower <= moved <= upper,
    }


def shadow_deviation(gamma: GeodesicLine, psi: Isometry, s: float,
                     t0: float, l: float,
                     resolution: float = _SAMPLE_STEP) -> float:
    """max over sampled t in [t0, t0 + l] of d(gamma(s + t), psi gamma(t))."""
    ts = _sample_array(t0, t0 + l, resolution)
    devs = hyp_distance_array(gamma.points(s + ts),
                              psi.apply_array(gamma.points(ts)))
    return float(devs.max())


def _sample_array(lo: float, hi: float, step: float) -> np.ndarray:
    count = max(int(math.floor((hi - lo) / step)), 0)
    ts = lo + step * np.arange(count + 1)
    if lo + count * step < hi:
        ts = np.append(ts, hi)
    return ts


def neighbor_containment_check(gamma: GeodesicLine, half_span: float,
                               alpha: GeodesicLine, big_d: float,
                               epsilon: float,
                               resolution: float = _SAMPLE_STEP) -> dict:
    """Endpoint closeness D at +-half_span forces an epsilon-tube containment
    on the middle segment, trimmed by c = D - log(epsilon)."""
    if not (big_d >= epsilon > 0):
        raise PreconditionFailedError("need D >= epsilon > 0")
    d_lo = alpha.dist_to(gamma.point(-half_span))
    d_hi = alpha.dist_to(gamma.point(half_span))
    if d_lo > big_d or d_hi > big_d:
        raise PreconditionFailedError(
            f"endpoint distances ({d_lo}, {d_hi}) exceed D = {big_d}")
    if half_span < 2.0 * (big_d - math.log(epsilon)):
        raise PreconditionFailedError(
            f"half-span {half_span} below 2 (D - log eps)")
    c = big_d - math.log(epsilon)
    ts = _sample_array(-half_span + c, half_span - c, resolution)
    worst = float(alpha.dist_to_array(gamma.points(ts)).max())
    return {
        "c": c,
        "max_dist": worst,
        "margin": epsilon - worst,
        "ok": worst <= epsilon,
        "endpoint_dists": (d_lo, d_hi),
    }


def closing_constants(eps0: float) -> dict:
    """The shift/length/trim constants attached to the closing check.

    c0 is the stated ceiling 2 delta0 + eps0 - log(eps0 / 8); the minimal
    length combines the stated floor with the side constraint
    s0 + l0 >= 2 c0.
    """
    s0 = 4.0 * eps0 + 6.0 * DELTA0
    c0 = 2.0 * DELTA0 + eps0 - math.log(eps0 / 8.0)
    l0 = max(4.0 * DELTA0 + eps0, 2.0 * c0 - s0)
    return {"s0": s0, "c0": c0, "l0": l0}


def closing_lemma_check(gamma: GeodesicLine, psi: Isometry, eps0: float,
                        s: float, l: float,
                        resolution: float = _SAMPLE_STEP) -> dict:
    """Verify both closing conclusions on one shadowing instance.

    The hypothesis is d(gamma(s + t), psi gamma(t)) <= eps0 sampled over
    t in [0, l]; its failure raises HypothesisFailed (a non-instance, not a
    conclusion failure).  Conclusions: the translation-length sandwich
    s - 2 eps0 <= |psi| <= s + eps0, and the eps0/8-tube containment of
    gamma([c0, s + l - c0]) around the axis.
    """
    if eps0 <= 0:
        raise PreconditionFailedError("eps0 must be positive")
    consts = closing_constants(eps0)
    length = translation_length(psi)
    if length < 4.0 * DELTA0:
        raise PreconditionFailedError(
            f"translation length {length} below 4 delta0")
    if not s > consts["s0"]:
        raise PreconditionFailedError(f"shift {s} not above s0 = {consts['s0']}")
    if l < consts["l0"]:
        raise PreconditionFailedError(f"length {l} below l0 = {consts['l0']}")
    deviation = shadow_deviation(gamma, psi, s, 0.0, l, resolution)
    if deviation > eps0:
        raise HypothesisFailedError(
            f"shadowing deviation {deviation} exceeds eps0 = {eps0}")
    line = axis(psi)
    sandwich_ok = (s - 2.0 * eps0 <= length <= s + eps0)
    ts = _sample_array(consts["c0"], s + l - consts["c0"], resolution)
    tube_worst = float(line.dist_to_array(gamma.points(ts)).max())
    tube_ok = tube_worst <= eps0 / 8.0
    return {
        "constants": consts,
        "hypothesis_deviation": deviation,
        "translation_length": length,
        "sandwich_ok": sandwich_ok,
        "sandwich_slacks": (length - (s - 2.0 * eps0), (s + eps0) - length),
        "tube_max_dist": tube_worst,
        "tube_margin": eps0 / 8.0 - tube_worst,
        "tube_ok": tube_ok,
        "ok": sandwich_ok and tube_ok,
    }


# ---------------------------------------------------------------------------
# Penetration and orbital counting
# ---------------------------------------------------------------------------

def geodesic_penetration(gamma: GeodesicLine, span: float, psi: Isometry,
                         eps0: float, group_elements: Sequence[Isometry],
                         resolution: float = _SAMPLE_STEP) -> list:
    """Tube visits of gamma([0, span]) across the translates g A_psi.

    Returns (g, entry time, penetration length) for the maximal sampled
    parameter interval inside each eps0/2-tube; translates never entered are
    omitted.
    """
    base = axis(psi)
    out = []
    ts = _sample_array(0.0, span, resolution)
    pts = gamma.points(ts)
    for g in group_elements:
        line = base.transform(g)
        inside = line.dist_to_array(pts) <= eps0 / 2.0
        best = None
        run_start = None
        for i, flag in enumerate(inside):
            if flag and run_start is None:
                run_start = i
            if not flag and run_start is not None:
                length = float(ts[i - 1] - ts[run_start])
                if best is None or length > best[1]:
                    best = (float(ts[run_start]), length)
                run_start = None
        if run_start is not None:
            length = float(ts[-1] - ts[run_start])
            if best is None or length > best[1]:
                best = (float(ts[run_start]), length)
        if best is not None:
            out.append((g, best[0], best[1]))
    return out


def penetration_bound(psi: Isometry, phi_inverse) -> float:
    """|psi| + phi^{-1}(|psi|), the classification ceiling for tube visits."""
    length = translation_length(psi)
    return length + phi_inverse(length)


def orbital_growth_estimate(generators: Sequence[Isometry], x, l_values,
                            word_radius: int):
    """Growth-rate fit of log orbital counts against the radius l.

    The slope estimates the volume-entropy-type exponent of the group; the
    counts are word-ball lower bounds, so the slope is one too.
    """
    from .complexity import fit_growth_rate
    ball = word_ball(generators, word_radius)
    x = _as_complex(x)
    samples = []
    for l in l_values:
        count = sum(1 for g in ball if hyp_distance(x, g.apply(x)) <= l)
        if count > 0:
            samples.append((float(l), math.log(count)))
    return fit_growth_rate(samples)


def min_translation_length(generators: Sequence[Isometry],
                           word_radius: int = 3) -> float:
    """Smallest translation length over nontrivial ball elements.

    In a universal-cover-only setup this plays the role the injectivity
    radius plays on a quotient (half of this value).
    """
    best = math.inf
    for g in word_ball(generators, word_radius):
        if abs(g.trace) <= 2.0:
            if abs(abs(g.trace) - 2.0) < 1e-12 and abs(g.b) < 1e-12 \
                    and abs(g.c) < 1e-12:
                continue              # the identity
            return 0.0                # elliptic or parabolic in the ball
        best = min(best, translation_length(g))
    return best


def word_ball(generators: Sequence[Isometry], radius: int,
              dedup_grid: float = 1e-9) -> list:
    """Reduced words up to the radius, deduplicated by matrix up to sign."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    alphabet = []
    for i, g in enumerate(generators):
        alphabet.append((i, 1, g))
        alphabet.append((i, -1, g.inverse()))
    seen = {Isometry.identity().canonical_entries(dedup_grid)}
    out = [Isometry.identity()]
    frontier = [(Isometry.identity(), None)]
    for _ in range(radius):
        new_frontier = []
        for mat, last in frontier:
            for idx, sign, g in alphabet:
                if last is not None and last == (idx, -sign):
                    continue        # immediate cancellation
                nxt = mat @ g
                key = nxt.canonical_entries(dedup_grid)
                if key in seen:
                    continue
                seen.add(key)
                out.append(nxt)
                new_frontier.append((nxt, (idx, sign)))
        frontier = new_frontier
    return out


def orbital_counting(generators: Sequence[Isometry], x, l: float,
                     word_radius: int) -> int:
    """Group elements g in the word ball with d(x, g x) <= l.

    A lower bound for the true orbital count, which ranges over the whole
    group.
    """
    if word_radius < 1:
        raise ValueError("word_radius must be >= 1")
    x = _as_complex(x)
    count = 0
    for g in word_ball(generators, word_radius):
        if hyp_distance(x, g.apply(x)) <= l:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Randomized instance builders
# ---------------------------------------------------------------------------

def random_line(rng: random.Random, spread: float = 5.0) -> GeodesicLine:
    p = rng.uniform(-spread, spread)
    q = p + rng.uniform(0.5, spread)
    if rng.random() < 0.5:
        p, q = q, p
    return GeodesicLine.from_endpoints(p, q)


def random_hyperbolic(rng: random.Random, length_low: float,
                      length_high: float, spread: float = 5.0) -> Isometry:
    """Hyperbolic isometry with a bounded random axis and translation length."""
    line = random_line(rng, spread)
    length = rng.uniform(length_low, length_high)
    conj = line._conj
    return conj.inverse() @ Isometry.dilation(length) @ conj


def build_closing_instance(rng: random.Random, eps0: float,
                           length_low: float | None = None,
                           length_high: float = 20.0) -> dict:
    """A shadowing instance: psi plus a geodesic drifting within eps0/4 of
    the axis over [0, s + l], shifted by s = |psi|.

    Offsets that small keep the sampled hypothesis below eps0 by convexity
    of the distance between geodesics; the caller still runs the check,
    which re-verifies the hypothesis.
    """
    consts = closing_constants(eps0)
    lo = max(4.0 * DELTA0, consts["s0"] + 0.05) if length_low is None else length_low
    psi = random_hyperbolic(rng, lo, max(length_high, lo + 0.5))
    line = axis(psi)
    s = translation_length(psi)
    l = consts["l0"] + rng.uniform(0.2, 5.0)
    rho0 = rng.uniform(0.0, eps0 / 4.0)
    rho1 = rng.uniform(0.0, eps0 / 4.0)
    z0 = line.offset_point(0.0, rho0, side=rng.choice((-1, 1)))
    z1 = line.offset_point(s + l, rho1, side=rng.choice((-1, 1)))
    gamma = GeodesicLine.through_points(z0, z1)
    return {"psi": psi, "gamma": gamma, "s": s, "l": l, "eps0": eps0,
            "offsets": (rho0, rho1)}


def thin_triangle_deviation(z1, z2, z3, resolution: float = 0.05) -> float:
    """Worst distance from a sampled side point to the union of the other
    two sides; delta0-hyperbolicity says this never exceeds delta0."""
    pts = [_as_complex(z) for z in (z1, z2, z3)]
    worst = 0.0
    for i in range(3):
        a, b, c = pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3]
        side = GeodesicLine.through_points(a, b)
        span = hyp_distance(a, b)
        zs = side.points(_sample_array(0.0, span, resolution))
        d = np.minimum(_dist_to_segment_array(zs, a, c),
                       _dist_to_segment_array(zs, b, c))
        worst = max(worst, float(d.max()))
    return worst


def _dist_to_segment_array(zs, a, b):
    line = GeodesicLine.through_points(a, b)
    span = hyp_distance(a, b)
    zz = line._conj.apply_array(zs)
    t = np.log(np.abs(zz)) - line.anchor_shift
    t = np.clip(t, 0.0, span)
    return hyp_distance_array(zs, line.points(t))


# ---------------------------------------------------------------------------
# Cyclic-quotient geodesic system
# ---------------------------------------------------------------------------

class CyclicQuotientGeodesic(DynamicalSystem):
    """Time-one geodesic map on the quotient of H^2 by one hyperbolic isometry.

    Working in the axis frame, the generator is the dilation z -> e^L z and
    the quotient distance between points is minimized over a few powers.  A
    state is the footpoint pair (gamma(0), gamma(1)) of a unit-speed
    geodesic; the state metric is the larger of the two footpoint quotient
    distances, which separates states because two points determine the
    geodesic.  On-axis orbits recur like a circle rotation of circumference
    L; off-axis orbits escape the tube.
    """

    def __init__(self, length: float, tube_radius: float = 0.5, k_window: int = 3):
        if length <= 0:
            raise ValueError("translation length must be positive")
        self.length = length
        self.tube_radius = tube_radius
        self.k_window = k_window
        self.axis_line = GeodesicLine.from_endpoints(0.0, math.inf)
        self.diameter_bound = length / 2.0 + 2.0 * tube_radius + 4.0

    # -- quotient metric -----------------------------------------------------

    def _point_quotient(self, z: complex, w: complex) -> float:
        k0 = round((math.log(abs(w)) - math.log(abs(z))) / self.length)
        best = math.inf
        for k in range(k0 - self.k_window, k0 + self.k_window + 1):
            d = hyp_distance(z * math.exp(k * self.length), w)
            if d < best:
                best = d
        return best

    def distance(self, x, y) -> float:
        return max(self._point_quotient(x[0], y[0]),
                   self._point_quotient(x[1], y[1]))

    def step(self, x):
        z, w = x[1], extend_unit(x[0], x[1])
        # reduce the representative into |z| in [1, e^L): multiplying both
        # footpoints by e^{-kL} is the deck transformation, a quotient no-op,
        # and keeps coordinates bounded along long orbits
        k = math.floor(math.log(abs(z)) / self.length)
        if k != 0:
            scale = math.exp(-k * self.length)
            z, w = z * scale, w * scale
        return (z, w)

    def state_at(self, t: float, rho: float = 0.0, side: int = 1) -> tuple:
        z = self.axis_line.offset_point(t, rho, side)
        w = self.axis_line.offset_point(t + 1.0, rho, side)
        return (z, w)

    def sample_states(self, rng: random.Random, count: int) -> list:
        return [self.state_at(rng.uniform(0.0, self.length),
                              rng.uniform(0.0, self.tube_radius),
                              rng.choice((-1, 1)))
                for _ in range(count)]

    def encode_state(self, state):
        return {"z": [state[0].real, state[0].imag],
                "w": [state[1].real, state[1].imag]}

    def decode_state(self, payload):
        return (complex(*payload["z"]), complex(*payload["w"]))

    # -- packed candidates for nets -------------------------------------------

    def candidate_cloud(self, seed: int, count: int) -> np.ndarray:
        """(count, 2) complex array of tube states along one fundamental span."""
        rng = np.random.default_rng(seed)
        t = rng.uniform(0.0, self.length, size=count)
        rho = rng.uniform(0.0, self.tube_radius, size=count)
        side = rng.choice((-1.0, 1.0), size=count)
        ang = np.pi / 2.0 - side * np.arccos(1.0 / np.cosh(rho))
        z = np.exp(t) * np.exp(1j * ang)
        w = np.exp(t + 1.0) * np.exp(1j * ang)
        return np.stack([z, w], axis=1)

    def _quotient_rows(self, zs: np.ndarray, z: complex) -> np.ndarray:
        k0 = np.round((np.log(np.abs(zs)) - math.log(abs(z))) / self.length)
        best = np.full(zs.shape, np.inf)
        for off in range(-self.k_window, self.k_window + 1):
            w = z * np.exp((k0 + off) * self.length)
            arg = 1.0 + np.abs(zs - w) ** 2 / (2.0 * zs.imag * w.imag)
            np.minimum(best, np.arccosh(np.maximum(arg, 1.0)), out=best)
        return best

    def separated_net_indices(self, candidates, epsilon: float, l: int):
        if not isinstance(candidates, np.ndarray):
            return None
        count = candidates.shape[0]
        orbit = np.empty((count, l + 1, 2), dtype=complex)
        orbit[:, 0, :] = candidates
        for i in range(1, l + 1):
            prev_z = orbit[:, i - 1, 0]
            prev_w = orbit[:, i - 1, 1]
            orbit[:, i, 0] = prev_w
            orbit[:, i, 1] = extend_unit_arrays(prev_z, prev_w)
        kept_orbit = np.empty_like(orbit)
        kept = []
        for c in range(count):
            if kept:
                block = kept_orbit[:len(kept)]
                bowen = np.zeros(len(kept))
                for i in range(l + 1):
                    for slot in (0, 1):
                        np.maximum(bowen,
                                   self._quotient_rows(block[:, i, slot],
                                                       orbit[c, i, slot]),
                                   out=bowen)
                if bool(np.any(bowen < epsilon)):
                    continue
            kept_orbit[len(kept)] = orbit[c]
            kept.append(c)
        return np.array(kept, dtype=np.int64)


def extend_unit(z: complex, w: complex) -> complex:
    """The point one unit past w on the geodesic through z then w."""
    line = GeodesicLine.through_points(z, w)
    t_w = line.parameter_of(w)
    return line.point(t_w + 1.0)


def extend_unit_arrays(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized extend_unit over complex arrays."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(z)
    scale = np.abs(z) + np.abs(w)
    vertical = np.abs(z.real - w.real) < 1e-14 * np.maximum(scale, 1.0)
    if np.any(vertical):
        zv, wv = z[vertical], w[vertical]
        out[vertical] = wv.real + 1j * (wv.imag ** 2 / zv.imag)
    if np.any(~vertical):
        zn, wn = z[~vertical], w[~vertical]
        cx = (np.abs(wn) ** 2 - np.abs(zn) ** 2) / (2.0 * (wn.real - zn.real))
        r = np.abs(zn - cx)
        p, q = cx - r, cx + r
        # conjugate to the imaginary axis: m(t) = (t - p) / (q - t) on angles
        zz = (zn - p) / (q - zn)
        ww = (wn - p) / (q - wn)
        t2 = 2.0 * np.log(np.abs(ww)) - np.log(np.abs(zz))
        uu = 1j * np.exp(t2)
        out[~vertical] = (q * uu + p) / (uu + 1.0)
    return out
