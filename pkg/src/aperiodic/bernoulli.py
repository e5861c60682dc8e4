"""One-sided full shift on n symbols: exact metric, aperiodic-word search,
closing witnesses and the periodic-distance equivalence.

Every metric decision reduces to integer comparisons of first-disagreement
indices; no float enters any verdict.  Words are finite prefixes with an
optional periodic tail.  A word without a tail is a cylinder: comparisons
beyond its prefix are undecidable and surface as ``UNRESOLVED``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._kernels import word_greedy_net
from .core import (HOLDS_ON_WINDOW, INCONCLUSIVE, UNRESOLVED, VIOLATED,
                   DynamicalSystem, is_resolved)
from .errors import ExhaustedError, PreconditionFailedError
from .periodic import PeriodicPoint


@dataclass(frozen=True)
class SymbolWord:
    """Finite prefix + optional periodic tail over symbols 1..alphabet."""

    alphabet: int
    prefix: tuple = ()
    tail: tuple = ()          # empty tail = pure cylinder

    def __post_init__(self):
        for s in self.prefix + self.tail:
            if not 1 <= s <= self.alphabet:
                raise ValueError(f"symbol {s} outside alphabet 1..{self.alphabet}")

    @classmethod
    def periodic(cls, alphabet: int, block: Sequence[int]) -> "SymbolWord":
        if not block:
            raise ValueError("periodic block must be nonempty")
        return cls(alphabet=alphabet, prefix=(), tail=tuple(block))

    @classmethod
    def constant(cls, alphabet: int, symbol: int) -> "SymbolWord":
        return cls.periodic(alphabet, (symbol,))

    @classmethod
    def from_string(cls, alphabet: int, text: str) -> "SymbolWord":
        """Parse the "prefix|tail" digit serialization ("121|21", "12|", ...)."""
        if alphabet > 9:
            raise ValueError("digit serialization needs alphabet <= 9")
        prefix_text, _, tail_text = text.partition("|")
        return cls(alphabet=alphabet,
                   prefix=tuple(int(c) for c in prefix_text),
                   tail=tuple(int(c) for c in tail_text))

    def to_string(self) -> str:
        if self.alphabet > 9:
            raise ValueError("digit serialization needs alphabet <= 9")
        return ("".join(map(str, self.prefix)) + "|"
                + "".join(map(str, self.tail)))

    @property
    def eventually_periodic(self) -> bool:
        return bool(self.tail)

    @property
    def known_length(self):
        return math.inf if self.tail else len(self.prefix)

    def at(self, i: int):
        """Symbol w(i), 1-based; None when beyond a cylinder's prefix."""
        if i < 1:
            raise ValueError("indices are 1-based")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.tail:
            return self.tail[(i - len(self.prefix) - 1) % len(self.tail)]
        return None

    def shifted(self, s: int = 1) -> "SymbolWord":
        """The word with its first s symbols dropped."""
        if s < 0:
            raise ValueError("shift must be >= 0")
        if s <= len(self.prefix):
            return SymbolWord(self.alphabet, self.prefix[s:], self.tail)
        if not self.tail:
            raise ValueError("cannot shift a cylinder past its prefix")
        r = (s - len(self.prefix)) % len(self.tail)
        return SymbolWord(self.alphabet, (),
                          self.tail[r:] + self.tail[:r])

    def stream(self, length: int) -> tuple:
        """(int8 array of w(1..k), k) with k = min(length, known length)."""
        k = int(min(length, self.known_length))
        out = np.empty(k, dtype=np.int8)
        np_prefix = len(self.prefix)
        head = min(k, np_prefix)
        out[:head] = self.prefix[:head]
        if k > np_prefix:
            tail = np.array(self.tail, dtype=np.int8)
            reps = -(-(k - np_prefix) // len(tail))
            out[np_prefix:] = np.tile(tail, reps)[:k - np_prefix]
        return out, k


def first_disagreement(w: SymbolWord, v: SymbolWord):
    """Smallest 1-based i with w(i) != v(i).

    math.inf when the words are provably equal (two eventually periodic
    words agreeing up to max prefix + lcm of tail periods agree forever);
    UNRESOLVED when a cylinder runs out of symbols first.
    """
    if w.eventually_periodic and v.eventually_periodic:
        bound = (max(len(w.prefix), len(v.prefix))
                 + math.lcm(len(w.tail), len(v.tail)))
        for i in range(1, bound + 1):
            if w.at(i) != v.at(i):
                return i
        return math.inf
    bound = int(min(w.known_length, v.known_length))
    for i in range(1, bound + 1):
        if w.at(i) != v.at(i):
            return i
    return UNRESOLVED


def agrees_through(w: SymbolWord, v: SymbolWord, m: int):
    """Whether w and v agree on indices 1..m; UNRESOLVED past a cylinder."""
    for i in range(1, m + 1):
        a, b = w.at(i), v.at(i)
        if a is None or b is None:
            return UNRESOLVED
        if a != b:
            return False
    return True


def word_distance(w: SymbolWord, v: SymbolWord):
    """0 for equal words, else e^(-first disagreement); exact in the exponent."""
    j = first_disagreement(w, v)
    if not is_resolved(j):
        return UNRESOLVED
    return 0.0 if j == math.inf else math.exp(-j)


def eps_exponent_min(eps: float) -> int:
    """Smallest integer m >= 0 with e^(-m) < eps, exact on floats."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = max(0, int(math.floor(-math.log(eps))))
    while math.exp(-m) >= eps:
        m += 1
    while m > 0 and math.exp(-(m - 1)) < eps:
        m -= 1
    return m


class BernoulliShift(DynamicalSystem):
    """Full one-sided shift on {1..n}^N with d(w, v) = e^(-first disagreement)."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("alphabet size must be >= 1")
        self.n = n
        self.diameter_bound = math.exp(-1)

    def word(self, text: str) -> SymbolWord:
        return SymbolWord.from_string(self.n, text)

    def encode_state(self, state: SymbolWord):
        return state.to_string()

    def decode_state(self, payload) -> SymbolWord:
        return SymbolWord.from_string(self.n, payload)

    def distance(self, x: SymbolWord, y: SymbolWord):
        return word_distance(x, y)

    def step(self, x: SymbolWord) -> SymbolWord:
        return x.shifted(1)

    def bowen_distance(self, x: SymbolWord, y: SymbolWord, l: int):
        """e^(-max(1, J - l)) for first disagreement J.

        For i < J the shifted pair disagrees first at J - i, so the max over
        i <= l is attained at i = l while l < J; once l >= J some earlier
        index already realizes the diameter e^(-1).
        """
        j = first_disagreement(x, y)
        if not is_resolved(j):
            return UNRESOLVED
        if j == math.inf:
            return 0.0
        return math.exp(-max(1, j - l))

    def return_time(self, x: SymbolWord, epsilon: float, l: int, s_max: int):
        m = eps_exponent_min(epsilon)
        if m <= 1:
            return 1
        need_agree = l + m - 1     # d_l(T^s w, w) < eps iff agreement through this
        arr, known = x.stream(s_max + need_agree)
        saw_undecidable = False
        for s in range(1, s_max + 1):
            if s + need_agree <= known:
                if np.array_equal(arr[s:s + need_agree], arr[:need_agree]):
                    return UNRESOLVED if saw_undecidable else s
            else:
                overlap = known - s
                if overlap < 0 or bool(np.array_equal(arr[s:known], arr[:overlap])):
                    saw_undecidable = True
                # a definite disagreement inside the overlap settles this s
        return UNRESOLVED

    def shift_function(self, x: SymbolWord, epsilon: float, l: int,
                       horizon: int, s_max: int):
        """min over n <= horizon of the return time of T^n x, run as one
        agreement-run sweep over the symbol stream."""
        m = eps_exponent_min(epsilon)
        if m <= 1:
            return 1
        L = l + m - 1
        arr, known = x.stream(horizon + s_max + L)
        saw_undecidable = False
        for s in range(1, s_max + 1):
            max_n = min(horizon, known - s - L)
            if max_n < 0:
                saw_undecidable = True
                continue
            eq = arr[s:s + max_n + L] == arr[:max_n + L]
            c = np.zeros(len(eq) + 1, dtype=np.int32)
            np.cumsum(eq, out=c[1:])
            if bool(np.any(c[L:] - c[:-L] == L)):
                return UNRESOLVED if saw_undecidable else s
            if known - s - L < horizon:
                saw_undecidable = True
        return UNRESOLVED

    def sample_states(self, rng: random.Random, count: int) -> list:
        out = []
        for _ in range(count):
            block = tuple(rng.randint(1, self.n)
                          for _ in range(rng.randint(3, 24)))
            prefix = tuple(rng.randint(1, self.n)
                           for _ in range(rng.randint(0, 6)))
            out.append(SymbolWord(self.n, prefix, block))
        return out

    # -- fast candidate machinery for nets -----------------------------------

    def net_agree_length(self, epsilon: float, l: int):
        """Greedy-net rejection threshold: candidates clash iff they agree
        through l + M symbols, M the largest exponent with e^(-M) >= eps.
        None when eps exceeds the diameter (no two points are separated)."""
        m = eps_exponent_min(epsilon)
        if m <= 1:
            return None
        return l + m - 1

    def candidate_matrix(self, candidates: Sequence[SymbolWord], depth: int) -> np.ndarray:
        rows = np.empty((len(candidates), depth), dtype=np.int8)
        for i, w in enumerate(candidates):
            arr, k = w.stream(depth)
            if k < depth:
                raise ValueError("candidate cylinders shorter than net depth")
            rows[i] = arr
        return rows

    def sliding_candidates(self, seed: int, count: int, depth: int) -> np.ndarray:
        """Sliding windows of one long pseudorandom symbol stream.

        Row i is T^i w restricted to its first ``depth`` symbols, i.e. a long
        orbit segment of a random word, packed as an int8 matrix.
        """
        rng = np.random.default_rng(seed)
        stream = rng.integers(1, self.n + 1, size=count + depth, dtype=np.int8)
        view = np.lib.stride_tricks.sliding_window_view(stream, depth)[:count]
        return np.ascontiguousarray(view)

    def separated_net_indices(self, candidates, epsilon: float, l: int):
        """Kept indices of the greedy net; exact via the prefix-clash kernel."""
        agree_len = self.net_agree_length(epsilon, l)
        if isinstance(candidates, np.ndarray):
            mat = candidates
        else:
            depth = agree_len if agree_len is not None else 1
            mat = self.candidate_matrix(candidates, depth)
        if agree_len is None:
            return np.array([0], dtype=np.int64) if len(mat) else np.array([], dtype=np.int64)
        return word_greedy_net(mat, agree_len)

    def periodic_registry(self, max_period: int) -> list:
        """Every periodic word of primitive period <= max_period."""
        registry = []
        for p in range(1, max_period + 1):
            for block in _blocks(self.n, p):
                if _is_primitive(block):
                    registry.append(PeriodicPoint(
                        state=SymbolWord.periodic(self.n, block),
                        period=p, residual=0.0, primitive=True))
        return registry


def _blocks(n, p):
    block = [1] * p
    while True:
        yield tuple(block)
        i = p - 1
        while i >= 0 and block[i] == n:
            block[i] = 1
            i -= 1
        if i < 0:
            return
        block[i] += 1


def _is_primitive(block) -> bool:
    p = len(block)
    for d in range(1, p):
        if p % d == 0 and block == block[:d] * (p // d):
            return False
    return True


# ---------------------------------------------------------------------------
# Aperiodicity certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AperiodicityCertificate:
    """Outcome of checking the recurrence condition on a finite window."""

    word: SymbolWord
    phi_table: tuple                  # sampled (l, phi(l)) rows
    l0: int
    window: dict = field(compare=False)
    status: str = HOLDS_ON_WINDOW
    witness: tuple | None = None      # (n, s, l) of the violating triple
    undecidable: int = 0

    @property
    def holds(self) -> bool:
        return self.status == HOLDS_ON_WINDOW


def is_phi_aperiodic(word: SymbolWord, phi: Callable[[int], float], l0: int,
                     horizon: int, s_max: int, l_max: int) -> AperiodicityCertificate:
    """Check: every agreement of T^n w and T^(n+s) w through l >= l0 symbols
    has s >= phi(l), over the window n <= horizon, s <= s_max, l <= l_max.

    phi is non-decreasing, so per (n, s) only the longest determined
    agreement run matters.  Triples that reach past a cylinder's prefix are
    counted undecidable and degrade the verdict to inconclusive.
    """
    window = dict(horizon=horizon, s_max=s_max, l_max=l_max)
    arr, known = word.stream(horizon + s_max + l_max)
    exact = known >= horizon + s_max + l_max or word.eventually_periodic
    undecidable = 0
    for n in range(horizon + 1):
        for s in range(1, s_max + 1):
            limit = min(l_max, known - n - s)
            run = 0
            while run < limit and arr[n + s + run] == arr[n + run]:
                run += 1
            if run >= max(l0, 1) and s < phi(run):
                return AperiodicityCertificate(
                    word=word, phi_table=_phi_rows(phi, l0, l_max), l0=l0,
                    window=window, status=VIOLATED, witness=(n, s, run),
                    undecidable=undecidable)
            if run == limit and limit < l_max and not exact:
                undecidable += 1
    status = INCONCLUSIVE if (undecidable and not exact) else HOLDS_ON_WINDOW
    return AperiodicityCertificate(word=word, phi_table=_phi_rows(phi, l0, l_max),
                                   l0=l0, window=window, status=status,
                                   undecidable=undecidable)


def _phi_rows(phi, l0, l_max):
    return tuple((l, phi(l)) for l in range(max(l0, 1), l_max + 1))


# ---------------------------------------------------------------------------
# Word search
# ---------------------------------------------------------------------------

def phi_aperiodic_search(n: int, phi: Callable[[int], float], l0: int,
                         target_length: int, seed: int | None = None,
                         max_nodes: int = 5_000_000) -> SymbolWord:
    """Depth-first backtracking for a prefix satisfying the phi-condition.

    Pruning is sound: a partial word dies only on triples fully determined
    by the prefix (the agreement run ending at the newest symbol).  Raises
    ExhaustedError when the tree dies or the node budget runs out, carrying
    how deep the search got.
    """
    if target_length < 1:
        raise ValueError("target_length must be >= 1")
    order = list(range(1, n + 1))
    if seed is not None:
        random.Random(seed).shuffle(order)
    w = []                      # symbols, 0-based list; w[i] = w(i+1)
    last_miss = [0] * (target_length + 1)   # per shift, last disagreeing index
    undo = []                   # per depth, list of (shift, previous last_miss)
    next_choice = [0]
    nodes = 0
    max_depth = 0
    while True:
        m = len(w) + 1          # position being filled, 1-based
        choice = next_choice[-1]
        if choice >= n:
            # exhausted symbols at this depth; backtrack
            next_choice.pop()
            if not w:
                raise ExhaustedError(
                    f"search tree died before length {target_length}",
                    nodes=nodes, max_depth=max_depth)
            for s, old in undo.pop():
                last_miss[s] = old
            w.pop()
            continue
        next_choice[-1] += 1
        sym = order[choice]
        nodes += 1
        if nodes > max_nodes:
            raise ExhaustedError(
                f"node budget {max_nodes} exhausted at depth {len(w)}",
                nodes=nodes, max_depth=max_depth)
        w.append(sym)
        changes = []
        ok = True
        for s in range(1, m):
            if w[m - 1] == w[m - 1 - s]:
                run = m - max(last_miss[s], s)
                if run >= l0 and s < phi(run):
                    ok = False
            else:
                changes.append((s, last_miss[s]))
                last_miss[s] = m
        if not ok:
            for s, old in changes:
                last_miss[s] = old
            w.pop()
            continue
        undo.append(changes)
        max_depth = max(max_depth, len(w))
        if len(w) >= target_length:
            return SymbolWord(n, tuple(w), ())
        next_choice.append(0)


def choose_l0(n: int, phi: Callable[[int], float], l0_candidates=range(1, 13),
              probe_factor: int = 4, probe_budget: int = 200_000) -> int:
    """Smallest l0 whose search survives to depth probe_factor * l0.

    A shallow probe: surviving it does not guarantee survival to a deeper
    target length (the tree can die later); use search_with_l0_sweep when a
    word of a specific length is required.
    """
    for l0 in l0_candidates:
        try:
            phi_aperiodic_search(n, phi, l0, max(probe_factor * l0, 8),
                                 max_nodes=probe_budget)
            return l0
        except ExhaustedError:
            continue
    raise ExhaustedError("no l0 candidate survived its probe")


def search_with_l0_sweep(n: int, phi: Callable[[int], float],
                         target_length: int, l0_candidates=range(1, 13),
                         seed: int | None = None,
                         max_nodes: int = 2_000_000) -> tuple:
    """First (l0, word) along increasing l0 whose full search reaches the
    target length within the node budget."""
    last = None
    for l0 in l0_candidates:
        try:
            word = phi_aperiodic_search(n, phi, l0, target_length, seed=seed,
                                        max_nodes=max_nodes)
            return l0, word
        except ExhaustedError as e:
            last = e
    raise ExhaustedError(
        f"no l0 candidate reached length {target_length}",
        nodes=getattr(last, "nodes", 0), max_depth=getattr(last, "max_depth", 0))


# ---------------------------------------------------------------------------
# Strong closing witness
# ---------------------------------------------------------------------------

def periodic_closing_witness(w: SymbolWord, s: int, l: int) -> tuple:
    """Periodic word w_s repeating w(1..s), certified e^-(l+s+1)-close.

    Requires d(w, T^s w) <= e^-(l+1), i.e. agreement of w with its s-shift
    through l symbols; then w_s matches w through s + l symbols, which is
    penetration at least s + l + 1 in the unit tube.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    pre = agrees_through(w, w.shifted(s), l)
    if pre is not True:
        raise PreconditionFailedError(
            f"d(w, T^s w) <= e^-(l+1) fails for s={s}, l={l} ({pre})")
    block = tuple(w.at(i) for i in range(1, s + 1))
    if any(b is None for b in block):
        raise PreconditionFailedError("first s symbols of w are not all known")
    w_s = SymbolWord.periodic(w.alphabet, block)
    match = agrees_through(w, w_s, s + l)
    if match is not True:
        raise AssertionError("witness construction failed its own certificate")
    j = first_disagreement(w, w_s)
    certificate = {
        "shift": s, "length": l,
        "agreement": j - 1 if is_resolved(j) else s + l,
        "distance_bound": math.exp(-(l + s + 1)),
        "penetration_at_least": s + l + 1,
    }
    return w_s, certificate


# ---------------------------------------------------------------------------
# Periodic-distance equivalence (both directions, window form)
# ---------------------------------------------------------------------------

def verify_periodic_distance_equivalence(w: SymbolWord, phi: Callable[[int], float],
                  phi_inverse: Callable[[float], float],
                  registry: Sequence[PeriodicPoint],
                  horizon: int, s_max: int, l_max: int) -> dict:
    """Window form of the equivalence "phi-aperiodic (l0 = 0)  <=>  the orbit
    keeps distance e^-(s + phi^{-1}(s) + 1) from every period-s word".

    Forward: when the recurrence condition holds on the window, every
    (anchor, time) pair must satisfy the distance bound.  Converse: when the
    distance bound holds for all pairs, the recurrence condition must hold.
    Violations of either implication are reported with their witnesses.
    """
    cert = is_phi_aperiodic(w, phi, l0=1, horizon=horizon, s_max=s_max,
                            l_max=l_max)
    bound_witnesses = []
    for anchor in registry:
        s = anchor.period
        limit = s + phi_inverse(s) + 1
        v = anchor.state
        for n in range(horizon + 1):
            j = first_disagreement(w.shifted(n), v)
            if not is_resolved(j):
                break
            if j > limit:
                bound_witnesses.append(
                    {"period": s, "time": n, "agreement": j - 1,
                     "allowed": limit})
    bound_ok = not bound_witnesses
    forward_violation = cert.holds and not bound_ok
    converse_violation = bound_ok and cert.status == VIOLATED
    return {
        "phi_aperiodic": cert,
        "distance_bound_ok": bound_ok,
        "bound_witnesses": bound_witnesses,
        "forward_violation": forward_violation,
        "converse_violation": converse_violation,
        "window": dict(horizon=horizon, s_max=s_max, l_max=l_max,
                       registry_periods=sorted({a.period for a in registry})),
    }
