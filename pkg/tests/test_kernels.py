import math

import numpy as np
import pytest

from aperiodic._kernels import (BACKEND, compiled_backend, pure_backend,
                                torus_first_below, torus_tail_min,
                                word_greedy_net)

needs_compiled = pytest.mark.skipif(compiled_backend is None,
                                    reason="compiled extension not built")


def reference_tail_min(alpha, s_lo, s_hi):
    best, best_s = math.inf, s_lo
    n = len(alpha)
    for s in range(s_lo, s_hi + 1):
        acc = 0.0
        for a in alpha:
            f = (s * a) % 1.0
            f = min(f, 1.0 - f)
            acc += f * f
        v = s ** (1.0 / n) * math.sqrt(acc)
        if v < best:
            best, best_s = v, s
    return best, best_s


def reference_first_below(alpha, eps, s_max):
    for s in range(1, s_max + 1):
        acc = 0.0
        for a in alpha:
            f = (s * a) % 1.0
            f = min(f, 1.0 - f)
            acc += f * f
        if math.sqrt(acc) < eps:
            return s
    return 0


def reference_greedy(words, agree_len):
    kept = []
    for i in range(len(words)):
        clash = False
        for j in kept:
            if all(words[i][t] == words[j][t] for t in range(agree_len)):
                clash = True
                break
        if not clash:
            kept.append(i)
    return kept


GOLDEN = (math.sqrt(5) - 1) / 2


def test_pure_matches_scalar_reference():
    alpha = np.array([GOLDEN])
    assert pure_backend.torus_tail_min(alpha, 1, 3000) == \
        pytest.approx(reference_tail_min([GOLDEN], 1, 3000))
    assert pure_backend.torus_first_below(alpha, 0.01, 5000) == \
        reference_first_below([GOLDEN], 0.01, 5000)
    alpha2 = np.array([GOLDEN, math.sqrt(2) - 1])
    v, s = pure_backend.torus_tail_min(alpha2, 1, 2000)
    rv, rs = reference_tail_min([GOLDEN, math.sqrt(2) - 1], 1, 2000)
    assert (v, s) == pytest.approx((rv, rs))


@needs_compiled
def test_compiled_matches_pure_torus():
    for alpha in (np.array([GOLDEN]), np.array([0.3718, 0.5342])):
        a = compiled_backend.torus_tail_min(alpha, 1, 40_000)
        b = pure_backend.torus_tail_min(alpha, 1, 40_000)
        assert a[1] == b[1] and a[0] == pytest.approx(b[0], abs=1e-13)
        for eps in (0.05, 0.003):
            assert compiled_backend.torus_first_below(alpha, eps, 40_000) == \
                pure_backend.torus_first_below(alpha, eps, 40_000)


def test_greedy_net_matches_reference():
    rng = np.random.default_rng(42)
    words = rng.integers(1, 4, size=(400, 9)).astype(np.int8)
    for agree_len in (1, 3, 6, 9):
        kept = word_greedy_net(words, agree_len)
        assert list(kept) == reference_greedy(words.tolist(), agree_len)


@needs_compiled
def test_compiled_matches_pure_greedy():
    rng = np.random.default_rng(7)
    words = rng.integers(1, 3, size=(5000, 16)).astype(np.int8)
    for agree_len in (2, 8, 16):
        assert np.array_equal(compiled_backend.word_greedy_net(words, agree_len),
                              pure_backend.word_greedy_net(words, agree_len))


def test_greedy_net_validation():
    words = np.ones((3, 4), dtype=np.int8)
    with pytest.raises(ValueError):
        word_greedy_net(words, 0)
    with pytest.raises(ValueError):
        word_greedy_net(words, 5)


def test_torus_kernel_validation():
    with pytest.raises(ValueError):
        torus_tail_min(np.array([0.5]), 5, 4)
    with pytest.raises(ValueError):
        torus_first_below(np.array([0.5]), -1.0, 10)


def test_backend_is_reported():
    assert BACKEND in ("compiled", "python")
