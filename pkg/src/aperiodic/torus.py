"""Rotation / geodesic flow on the flat n-torus and its Diophantine toolkit.

States are pairs ``(base, direction)`` with ``base`` a point of [0,1)^n and
``direction`` a vector of R^n; the time-one map adds the direction to the
base.  The metric is the quotient Euclidean distance between bases plus the
Euclidean distance between directions.  Because translation is an isometry,
every Bowen distance between same-direction states collapses to the base
distance, which is what makes the exact fast paths below valid.

For n = 1 the continued-fraction machinery gives exact convergents in
arbitrary-precision integers; floats only enter at the metric layer.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._kernels import torus_first_below, torus_tail_min
from .core import UNRESOLVED, DynamicalSystem
from .errors import PreconditionFailedError
from .periodic import PeriodicPoint


def _as_vector(x) -> tuple:
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(c) for c in x)


def _lattice_distance(v: tuple) -> float:
    """Euclidean distance from v to Z^n via component-wise rounding."""
    acc = 0.0
    for c in v:
        f = c % 1.0
        f = min(f, 1.0 - f)
        acc += f * f
    return math.sqrt(acc)


def _euclid(a: tuple, b: tuple) -> float:
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def _is_state(x) -> bool:
    return (isinstance(x, tuple) and len(x) == 2
            and isinstance(x[0], tuple) and isinstance(x[1], tuple))


def torus_distance(x, y, n: int | None = None) -> float:
    """Product metric on T^n x R^n; plain base points get the quotient part.

    Accepts either full states ``(base, direction)`` or bare base points
    (scalars for n = 1, sequences otherwise).
    """
    if _is_state(x) and _is_state(y):
        bx, dx = x
        by, dy = y
        return _lattice_distance(tuple(a - b for a, b in zip(bx, by))) + _euclid(dx, dy)
    bx, by = _as_vector(x), _as_vector(y)
    return _lattice_distance(tuple(a - b for a, b in zip(bx, by)))


class TorusRotation(DynamicalSystem):
    """Time-one map (base, direction) -> (base + direction mod 1, direction).

    ``direction_radius`` declares the compact direction window the instance
    models; it only feeds the diameter bound.
    """

    def __init__(self, alpha, continued_fraction: "ContinuedFraction" = None,
                 direction_radius: float = 1.0):
        self.alpha = _as_vector(alpha)
        self.n = len(self.alpha)
        self.cf = continued_fraction
        self.direction_radius = direction_radius
        self.diameter_bound = math.sqrt(self.n) / 2 + 2.0 * direction_radius

    # -- state helpers ------------------------------------------------------

    def state(self, base=None, direction=None) -> tuple:
        base = (0.0,) * self.n if base is None else _as_vector(base)
        direction = self.alpha if direction is None else _as_vector(direction)
        return (tuple(b % 1.0 for b in base), direction)

    def encode_state(self, state):
        return {"base": list(state[0]), "direction": list(state[1])}

    def decode_state(self, payload):
        return (tuple(payload["base"]), tuple(payload["direction"]))

    # -- metric and map -----------------------------------------------------

    def distance(self, x, y) -> float:
        bx, dx = x
        by, dy = y
        return _lattice_distance(tuple(a - b for a, b in zip(bx, by))) + _euclid(dx, dy)

    def step(self, x):
        base, direction = x
        return (tuple((b + a) % 1.0 for b, a in zip(base, direction)), direction)

    # -- exact fast paths (translation invariance) --------------------------

    def bowen_distance(self, x, y, l: int):
        if x[1] == y[1]:
            # same direction: every iterate pair is a translate of the first
            return self.distance(x, y)
        return super().bowen_distance(x, y, l)

    def return_time(self, x, epsilon: float, l: int, s_max: int):
        # d_l(T^s x, x) = dist(s * direction, Z^n) for every l and base
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if s_max < 1:
            raise ValueError("s_max must be >= 1")
        s = torus_first_below(np.array(x[1]), epsilon, s_max)
        return UNRESOLVED if s == 0 else s

    def shift_function(self, x, epsilon: float, l: int, horizon: int, s_max: int):
        # the rotation is an isometry along its orbit, so the return time is
        # the same at every time n and the minimum over the window is free
        return self.return_time(x, epsilon, l, s_max)

    def batch_distance(self, states, y) -> np.ndarray:
        """Distances from every state in the list to y, vectorized."""
        bases = np.array([s[0] for s in states], dtype=float)
        dirs = np.array([s[1] for s in states], dtype=float)
        by = np.array(y[0], dtype=float)
        dy = np.array(y[1], dtype=float)
        frac = (bases - by) % 1.0
        frac = np.minimum(frac, 1.0 - frac)
        base_part = np.sqrt(np.sum(frac * frac, axis=1))
        dir_part = np.sqrt(np.sum((dirs - dy) ** 2, axis=1))
        return base_part + dir_part

    def sample_states(self, rng: random.Random, count: int) -> list:
        out = []
        for _ in range(count):
            base = tuple(rng.random() for _ in range(self.n))
            if rng.random() < 0.5:
                direction = self.alpha
            else:
                direction = tuple(a + rng.uniform(-0.5, 0.5) * self.direction_radius
                                  for a in self.alpha)
            out.append((base, direction))
        return out

    # -- periodic structure --------------------------------------------------

    def periodic_registry(self, max_period: int, base=None) -> list:
        """All rational-direction anchors (base, p/q), q <= max_period, reduced.

        Reduced p/q has primitive period exactly q under the time-one map.
        Only n = 1 enumerates densely; larger n would need a lattice sweep.
        """
        if self.n != 1:
            raise NotImplementedError("dense registry enumeration is 1-D only")
        base = (0.0,) if base is None else _as_vector(base)
        registry = []
        for q in range(1, max_period + 1):
            for p in range(q):
                if math.gcd(p, q) == 1:
                    state = (tuple(b % 1.0 for b in base), (p / q,))
                    registry.append(PeriodicPoint(state=state, period=q,
                                                  residual=0.0, primitive=True))
        return registry


# ---------------------------------------------------------------------------
# Continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuedFraction:
    """[a0; a1, a2, ...] with an optional periodic tail, exact convergents."""

    quotients: tuple          # a1, a2, ... (finite prefix)
    periodic_tail: tuple = () # repeats after the prefix; empty = rational
    a0: int = 0

    def __post_init__(self):
        if any(a < 1 for a in self.quotients) or any(a < 1 for a in self.periodic_tail):
            raise ValueError("partial quotients must be >= 1")

    @classmethod
    def golden(cls) -> "ContinuedFraction":
        return cls(quotients=(), periodic_tail=(1,))

    @classmethod
    def silver(cls) -> "ContinuedFraction":
        # sqrt(2) - 1 = [0; 2, 2, 2, ...]
        return cls(quotients=(), periodic_tail=(2,))

    def quotient(self, k: int) -> int:
        """a_k for k >= 1."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k <= len(self.quotients):
            return self.quotients[k - 1]
        if not self.periodic_tail:
            raise IndexError("finite continued fraction exhausted")
        return self.periodic_tail[(k - 1 - len(self.quotients)) % len(self.periodic_tail)]

    def depth(self, k: int) -> int:
        if self.periodic_tail:
            return k
        return min(k, len(self.quotients))

    def convergents(self, k: int) -> list:
        """(p_j, q_j) for j = 0..depth(k) via the standard recurrence."""
        p_prev, q_prev = 1, 0
        p, q = self.a0, 1
        out = [(p, q)]
        for j in range(1, self.depth(k) + 1):
            a = self.quotient(j)
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            out.append((p, q))
        return out

    def value_fraction(self, extra_depth: int = 40) -> Fraction:
        """Exact-to-working-precision rational value.

        For a rational (finite) fraction this is exact; otherwise the value
        of a convergent ``extra_depth`` levels past the prefix, whose error
        is below 1/(q_K q_{K+1}) and q grows at least like Fibonacci.
        """
        k = len(self.quotients) + (extra_depth if self.periodic_tail else 0)
        p, q = self.convergents(k)[-1]
        return Fraction(p, q)

    def value(self) -> float:
        return float(self.value_fraction())

    def scaled_convergent_errors(self, s_max: int, precision_depth: int = 60) -> list:
        """Exact q_k * |q_k * alpha - p_k| for convergents with q_k <= s_max.

        Rational arithmetic against a much deeper convergent; the induced
        error is below q_k^2 / (q_K q_{K+1}), negligible for the depths used.
        """
        alpha = self.value_fraction(extra_depth=precision_depth)
        out = []
        for p, q in self.convergents(10_000):
            if q == 0:
                continue
            if q > s_max:
                break
            out.append((p, q, float(q * abs(q * alpha - p))))
        return out


# ---------------------------------------------------------------------------
# Diophantine constants
# ---------------------------------------------------------------------------

def badly_approximable_constant(alpha, n: int, s_max: int) -> float:
    """Asymptotic approximation quality: min of s^(1/n) dist(s a, Z^n) over
    the tail window (s_max // 2, s_max].

    Restricting to the tail makes this a liminf estimator, the constant the
    convergent arithmetic q_k ||q_k a|| converges to; early shifts would
    otherwise pin the minimum at small s forever (s = 1 already gives 0.382
    for the golden mean, against a limit of 1/sqrt(5) = 0.4472).
    """
    if s_max < 2:
        raise ValueError("s_max must be >= 2")
    a = np.asarray(_as_vector(alpha))
    if a.shape[0] != n:
        raise ValueError("alpha has wrong dimension")
    value, _ = torus_tail_min(a, s_max // 2 + 1, s_max)
    return value


def uniform_approximation_floor(alpha, n: int, s_max: int) -> tuple:
    """min over all 1 <= s <= s_max of s^(1/n) dist(s a, Z^n), with argmin.

    This is the window certificate behind the aperiodicity bridge: a floor c
    here makes F(eps) = c^n eps^(-n) hold on any window within s_max.
    """
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    a = np.asarray(_as_vector(alpha))
    if a.shape[0] != n:
        raise ValueError("alpha has wrong dimension")
    return torus_tail_min(a, 1, s_max)


def verify_classical_da_equivalence(alpha, x, s: int, epsilon: float) -> tuple:
    """Both sides of the recurrence <-> lattice-approximation equivalence.

    lhs: the orbit of (x, alpha) returns within epsilon at shift s.
    rhs: some integer vector p has ||s alpha - p|| < epsilon (p by rounding).
    The two are asserted equal; the rounding vector is exact for the
    quotient metric at every epsilon.
    """
    alpha_v = _as_vector(alpha)
    sys = TorusRotation(alpha_v)
    state = sys.state(base=x)
    target = state
    for _ in range(s):
        target = sys.step(target)
    lhs_dist = sys.distance(target, state)
    lhs = lhs_dist < epsilon
    err = math.sqrt(sum((s * a - round(s * a)) ** 2 for a in alpha_v))
    rhs = err < epsilon
    # the orbit side accumulates ~s ulps of rounding that the product side
    # does not; a disagreement inside that band is a knife-edge epsilon, not
    # a failure of the equivalence
    slop = 1e-12 * max(1.0, float(s))
    if lhs != rhs and min(abs(lhs_dist - epsilon), abs(err - epsilon)) > slop:
        raise AssertionError(f"equivalence broken: lhs={lhs} rhs={rhs} "
                             f"(s={s}, eps={epsilon})")
    return lhs, rhs


def torus_closing_witness(x, alpha, s: int, epsilon: float) -> tuple:
    """Period-s anchor (x, p/s) with p = round(s alpha), plus certificates.

    Requires the recurrence d(phi^s(x, a), (x, a)) < epsilon; certifies the
    two distance bounds epsilon/s and (1 + 1/s) epsilon.
    """
    alpha_v = _as_vector(alpha)
    n = len(alpha_v)
    sys = TorusRotation(alpha_v)
    state = sys.state(base=x)
    moved = state
    for _ in range(s):
        moved = sys.step(moved)
    recur = sys.distance(moved, state)
    if not recur < epsilon:
        raise PreconditionFailedError(
            f"no epsilon-recurrence at shift {s}: d = {recur} >= {epsilon}")
    p = tuple(round(s * a) for a in alpha_v)
    direction = tuple(pi / s for pi in p)
    anchor_state = (state[0], direction)
    d_start = sys.distance(state, anchor_state)
    d_end = sys.distance(moved, anchor_state)
    bound_start = epsilon / s
    bound_end = (1 + 1 / s) * epsilon
    if not (d_start < bound_start and d_end < bound_end):
        raise AssertionError("closing certificates failed: "
                             f"{d_start} !< {bound_start} or {d_end} !< {bound_end}")
    residual = sys.distance(sys.orbit(anchor_state, s)[-1], anchor_state)
    point = PeriodicPoint(state=anchor_state, period=s, residual=residual,
                          primitive=None)
    certificates = {
        "d_start": d_start, "bound_start": bound_start,
        "d_end": d_end, "bound_end": bound_end,
        "p": list(p), "recurrence": recur, "epsilon": epsilon, "shift": s,
    }
    return point, certificates


def direction_space_radius(c: float, n: int, q: int) -> float:
    """Radius of the rational-direction neighborhood in direction space.

    For the power profile F(eps) = c eps^-n the directions alpha with
    ||alpha - p/q|| below this radius are the ones whose orbit meets the
    anchor's neighborhood; the extra 1/q against the quantile radius
    (c/q)^(1/n)/2 comes from q steps of drift amplification.  The two
    radii deliberately do not coincide; the quantile-based critical
    neighborhood restricted to direction space sits inside this ball.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    return c ** (1.0 / n) / q ** (1.0 + 1.0 / n)


def generate_bad_alpha(bound: int, seed: int, depth: int = 80) -> ContinuedFraction:
    """Pseudorandom bounded partial quotients in [1, bound].

    Bounded quotients realize badly approximable numbers; the resulting
    constant is certified empirically by the brute-force scan, not
    analytically.  bound = 1 is the golden mean.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if bound == 1:
        return ContinuedFraction.golden()
    rng = random.Random(seed)
    quotients = tuple(rng.randint(1, bound) for _ in range(depth))
    return ContinuedFraction(quotients=quotients)
