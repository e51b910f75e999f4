"""Maximal-entropy measures of the Dyck shift, Lyapunov functionals and entropy bounds.

Side words (samples of the Bernoulli measures on the side alphabets) use
branch indices for the specific brackets and ``0`` for the generic symbol:
on side "alpha" the symbols are alpha_1..alpha_m (1..m) and the generic
right bracket beta (0); on side "beta" they are the generic left bracket
alpha (0) and beta_1..beta_m (m+1..2m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .dyck import Window
from .maps import Box, Params, point_from_window

SIDES = ("alpha", "beta")
EXTENSION_CAP = 2**20


class UnmatchedError(ValueError):
    def __init__(self, message, position):
        super().__init__(message)
        self.position = position


class UndersampledError(ValueError):
    pass


@dataclass(frozen=True)
class Seed:
    seed: int
    stream: int = 0

    def rng(self, purpose: int = 0) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.stream, purpose)))


def _check_side(side):
    if side not in SIDES:
        raise ValueError(f"side must be 'alpha' or 'beta', got {side!r}")


def side_alphabet(side: str, m: int) -> tuple[int, ...]:
    _check_side(side)
    if side == "alpha":
        return (0,) + tuple(range(1, m + 1))
    return (0,) + tuple(range(m + 1, 2 * m + 1))


def _draw(side: str, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    draws = rng.integers(0, m + 1, size=n)
    if side == "beta":
        draws = np.where(draws == 0, 0, draws + m)
    return draws.astype(np.int64)


def sample_lambda(side: str, length: int, m: int, seed: Seed | int) -> np.ndarray:
    """I.i.d. uniform word over the ``m+1`` symbols of a side alphabet."""
    _check_side(side)
    if length < 1:
        raise ValueError("length must be >= 1")
    seed = seed if isinstance(seed, Seed) else Seed(seed)
    return _draw(side, m, length, seed.rng(0))


def phi(side: str, word, m: int) -> np.ndarray:
    """Forget which right (side alpha) or left (side beta) bracket was used."""
    _check_side(side)
    w = np.asarray(word, dtype=np.int64)
    if side == "alpha":
        return np.where(w > m, 0, w)
    return np.where(w <= m, 0, w)


def _lift_alpha(sym: list[int], m: int, extend, cap: int) -> list[int]:
    out = list(sym)
    stack: list[int] = []
    pending: list[int] = []
    for t, s in enumerate(sym):
        if s:
            stack.append(s)
        elif stack:
            out[t] = stack.pop() + m
        else:
            pending.append(t)
    # Prepend extension chunks.  Right brackets left unmatched inside earlier
    # chunks sit between a new chunk and the window, so they are served first.
    skip = 0
    used = 0
    chunk = 64
    while pending:
        if extend is None:
            raise UnmatchedError(f"right bracket at window position {pending[0]} is unmatched", pending[0])
        if used >= cap:
            raise UnmatchedError(
                f"right bracket at window position {pending[0]} unmatched after {used} extension symbols",
                pending[0])
        n = min(chunk, cap - used)
        used += n
        chunk *= 2
        st: list[int] = []
        free = 0
        for s in extend(n):
            if s:
                st.append(s)
            elif st:
                st.pop()
            else:
                free += 1
        k = len(st)
        if k <= skip:
            skip = skip - k + free
            continue
        matched = min(k - skip, len(pending))
        for q in range(matched):
            out[pending[q]] = st[-1 - skip - q] + m
        pending = pending[matched:]
        skip = free
    return out


def psi_lift(side: str, window, m: int,
             extend: Callable[[int], Sequence[int]] | None = None,
             cap: int = EXTENSION_CAP) -> np.ndarray:
    """Recover the Dyck word whose forgetful image is ``window``.

    On side alpha each generic right bracket takes the label of its matching
    left bracket, searched leftward; on side beta each generic left bracket
    takes the label of its matching right bracket, searched rightward.  When
    the match lies outside the window, ``extend(n)`` must return ``n`` fresh
    side symbols adjacent to what has been seen so far (to the left on side
    alpha, to the right on side beta), up to ``cap`` symbols in total.
    """
    _check_side(side)
    sym = [int(s) for s in np.asarray(window, dtype=np.int64)]
    if side == "alpha":
        if any(not 0 <= s <= m for s in sym):
            raise ValueError("window is not over the alpha-side alphabet")
        return np.asarray(_lift_alpha(sym, m, extend, cap), dtype=np.int64)
    if any(s != 0 and not m < s <= 2 * m for s in sym):
        raise ValueError("window is not over the beta-side alphabet")

    def to_alpha(seq):
        return [s - m if s else 0 for s in reversed(list(seq))]

    ext = None if extend is None else (lambda n: to_alpha(extend(n)))
    lifted = _lift_alpha(to_alpha(sym), m, ext, cap)
    return np.asarray([s + m if s <= m else s - m for s in reversed(lifted)], dtype=np.int64)


def sample_nu(side: str, length: int, m: int, seed: Seed | int) -> np.ndarray:
    """Window of length ``length`` of a sequence distributed by the side's maximal-entropy measure.

    The side word is exactly ``sample_lambda(side, length, m, seed)``;
    matches outside the window come from an independent stream.
    """
    seed = seed if isinstance(seed, Seed) else Seed(seed)
    lam = sample_lambda(side, length, m, seed)
    rng = seed.rng(1)
    return psi_lift(side, lam, m, extend=lambda n: _draw(side, m, n, rng))


@dataclass(frozen=True)
class OrbitStats:
    n: int
    sum_u: float
    sum_c: float
    count_alpha: int
    count_beta: int

    @property
    def chi_u(self) -> float:
        return self.sum_u / self.n

    @property
    def chi_c(self) -> float:
        return self.sum_c / self.n

    @property
    def bias(self) -> float:
        return abs(self.count_alpha - self.count_beta) / self.n

    @property
    def freq_alpha(self) -> float:
        return self.count_alpha / self.n

    @property
    def freq_beta(self) -> float:
        return self.count_beta / self.n


def empirical_stats(word, params: Params) -> OrbitStats:
    """Birkhoff sums of the unstable and central log-derivatives along a Dyck word."""
    w = np.asarray(word, dtype=np.int64)
    m = params.m
    if w.size == 0:
        raise ValueError("empty word")
    if w.min() < 1 or w.max() > 2 * m:
        raise ValueError("word is not over the pure Dyck alphabet")
    ca = int(np.count_nonzero(w <= m))
    cb = int(w.size - ca)
    a = params.a
    sum_u = ca * -math.log(a) + cb * -math.log(1 - m * a)
    sum_c = -(ca - cb) * math.log(m)
    return OrbitStats(int(w.size), sum_u, sum_c, ca, cb)


def _check_a(a, m):
    if not 0 < a < Fraction(1, m):
        raise ValueError(f"a={a} outside (0, 1/{m})")


def entropy_bound_H(a, m: int) -> float:
    """Unstable exponent of perfectly balanced measures: ``-log sqrt(a (1 - m a))``."""
    _check_a(a, m)
    prod = a * (1 - m * a)
    return -0.5 * math.log(prod)


def biased_bound(params: Params, delta: float) -> float:
    """Entropy ceiling for limits of ergodic measures that are ``delta``-biased."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return (1 + 2 * delta) * entropy_bound_H(params.a, params.m) + delta * math.log(params.m)


def ruelle_bound(stats: OrbitStats) -> float:
    return stats.chi_u + max(stats.chi_c, 0.0)


def _block_counts(word, k: int) -> np.ndarray:
    w = np.asarray(word, dtype=np.int64)
    if k < 1:
        raise ValueError("k must be >= 1")
    if w.size < k:
        raise UndersampledError(f"word of length {w.size} has no {k}-blocks")
    base = int(w.max()) + 1
    n = w.size - k + 1
    codes = np.zeros(n, dtype=np.int64)
    for j in range(k):
        codes = codes * base + w[j:j + n]
    _, counts = np.unique(codes, return_counts=True)
    return counts


def _plugin(counts: np.ndarray) -> float:
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def block_entropy(word, k: int) -> float:
    """Plug-in Shannon entropy of the empirical k-block distribution, divided by k (nats)."""
    counts = _block_counts(word, k)
    if len(word) < 50 * counts.size:
        raise UndersampledError(
            f"length {len(word)} < 50 x {counts.size} distinct {k}-blocks")
    return _plugin(counts) / k


def conditional_block_entropy(word, k: int) -> float:
    """Plug-in ``H_k - H_{k-1}``: entropy of a symbol given the preceding k-1."""
    counts = _block_counts(word, k)
    if len(word) < 50 * counts.size:
        raise UndersampledError(
            f"length {len(word)} < 50 x {counts.size} distinct {k}-blocks")
    prev = _plugin(_block_counts(word, k - 1)) if k > 1 else 0.0
    return _plugin(counts) - prev


def sample_mu_point(params: Params, side: str, depth: int, seed: Seed | int) -> tuple[tuple[float, ...], Box]:
    """Approximate draw from the maximal-entropy measure of the cube map.

    Samples the side's Dyck window on ``[-depth, depth)`` and returns the
    center of its exact cylinder box (as floats) together with the box.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    word = sample_nu(side, 2 * depth, params.m, seed)
    box, center = point_from_window(params, Window(tuple(int(s) for s in word), -depth))
    return tuple(float(c) for c in center), box


def expected_chi_u(params: Params, side: str) -> float:
    """Mean of the unstable log-derivative when the dominant group has weight m/(m+1)."""
    m, a = params.m, params.a
    pa = Fraction(m, m + 1) if side == "alpha" else Fraction(1, m + 1)
    return float(pa) * -math.log(a) + float(1 - pa) * -math.log(1 - m * a)


def expected_chi_c(m: int, side: str) -> float:
    v = (m - 1) / (m + 1) * math.log(m)
    return -v if side == "alpha" else v
