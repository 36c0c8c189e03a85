"""Path maps, the straightness functional T, and scale boosting.

T(f) = d(f(0), f(n)) / (n * max_i d(f(i-1), f(i))) measures how straight the
image of the n-path is; it is submultiplicative under splitting the path into
blocks, which is what lets a single good scale be found ("boosted") inside
any map whose overall T is not too small.
"""
from __future__ import annotations

import math
import warnings
from fractions import Fraction

from ..errors import BoostFailed, LengthMismatch, PreconditionViolated


class PathMap:
    """A map {0..n} -> target metric space."""

    def __init__(self, n, target, assignment):
        self.n = n
        self.target = target
        if callable(assignment):
            assignment = [assignment(i) for i in range(n + 1)]
        if isinstance(assignment, dict):
            assignment = [assignment[i] for i in range(n + 1)]
        self.assignment = list(assignment)
        if len(self.assignment) != n + 1:
            raise LengthMismatch(f"need {n + 1} values, got {len(self.assignment)}")

    def __call__(self, i):
        return self.assignment[i]

    def restrict(self, indices):
        """The composed map along a subsequence of path indices."""
        return PathMap(len(indices) - 1, self.target,
                       [self.assignment[i] for i in indices])

    def step_dists(self, lo=0, hi=None):
        if hi is None:
            hi = self.n
        d = self.target.dist
        return [d(self.assignment[i - 1], self.assignment[i])
                for i in range(lo + 1, hi + 1)]


def t_functional(f):
    """T(f) in [0, 1]; 0 for constant maps by convention."""
    steps = f.step_dists()
    mx = max(steps) if steps else 0
    if mx == 0:
        return 0
    end = f.target.dist(f(0), f(f.n))
    if isinstance(end, (int, Fraction)) and isinstance(mx, (int, Fraction)):
        return Fraction(end) / (f.n * Fraction(mx))
    return float(end) / (f.n * float(mx))


def path_distortion(f):
    """dist(f) viewing the domain as the unit-step path metric; inf on collapse."""
    lip = 0
    colip = 0
    for i in range(f.n + 1):
        for j in range(i + 1, f.n + 1):
            dt = f.target.dist(f(i), f(j))
            if dt == 0:
                return math.inf
            ratio = (Fraction(dt) / (j - i)
                     if isinstance(dt, (int, Fraction)) else float(dt) / (j - i))
            lip = max(lip, ratio)
            colip = max(colip, 1 / ratio)
    return lip * colip


def _block_t(f, lo, hi):
    """T of the restriction of f to the sub-path [lo, hi] (unit steps)."""
    steps = f.step_dists(lo, hi)
    mx = max(steps) if steps else 0
    if mx == 0:
        return 0
    end = f.target.dist(f(lo), f(hi))
    if isinstance(end, (int, Fraction)) and isinstance(mx, (int, Fraction)):
        return Fraction(end) / ((hi - lo) * Fraction(mx))
    return float(end) / ((hi - lo) * float(mx))


def submultiplicative_split(f, m, n):
    """Split f over P_{mn} into the coarse map i -> i*n over P_m and the best
    contiguous length-n block (argmax T, ties to the lowest index).

    Returns (coarse PathMap, best block PathMap, block index); asserts the
    product inequality T(f) <= T(coarse) * T(block).
    """
    if f.n != m * n:
        raise LengthMismatch(f"path length {f.n} != {m} * {n}")
    coarse = f.restrict([i * n for i in range(m + 1)])
    best_i = 0
    best_t = None
    for i in range(m):
        ti = _block_t(f, i * n, (i + 1) * n)
        if best_t is None or ti > best_t:
            best_t = ti
            best_i = i
    block = f.restrict(list(range(best_i * n, (best_i + 1) * n + 1)))
    tf = t_functional(f)
    tc = t_functional(coarse)
    tb = t_functional(block)
    if isinstance(tf, Fraction) and isinstance(tc, Fraction) and isinstance(tb, Fraction):
        assert tf <= tc * tb, f"submultiplicativity violated: {tf} > {tc} * {tb}"
    else:
        assert float(tf) <= float(tc) * float(tb) * (1 + 1e-12) + 1e-15
    return coarse, block, best_i


class BoostResult:
    def __init__(self, grid, t_value, dist, warned):
        self.grid = grid          # the t+1 path indices of the chosen progression
        self.t_value = t_value    # T of the composed map
        self.dist = dist          # directly verified distortion of f o phi
        self.warned = warned      # precondition n >= D^(4 t log t / delta) violated

    def __repr__(self):
        return f"BoostResult(grid={self.grid}, T={float(self.t_value):.6f}, dist={float(self.dist):.6f})"


def path_boost(f, t, delta, D=None):
    """Find an arithmetic progression phi: P_t -> P_n with dist(f o phi) <= 1 + delta.

    Descends the nested chain of maximal-T blocks of length t^j, recording the
    coarse t-grid at every level, and returns the recorded grid with maximal T
    (ties to the shallowest level).  Success requires T(grid) >= 1 - delta/(2t)
    which forces dist <= 1/(1 - t(1 - T)) <= 1 + delta; the distortion is also
    verified directly.  When the sufficient length precondition (with a known
    distortion bound D) is violated a warning is emitted, since the search may
    still succeed; BoostFailed carries the best grid otherwise.
    """
    n = f.n
    k = 0
    while t ** (k + 1) <= n:
        k += 1
    if k < 1:
        raise PreconditionViolated(f"path length {n} shorter than t = {t}")
    if D is not None:
        needed = float(D) ** (4 * t * math.log(t) / float(delta))
        if n < needed:
            warnings.warn(
                f"path length {n} below the sufficient bound {needed:.3g}; "
                "boosting may fail", stacklevel=2)
            warned = True
        else:
            warned = False
    else:
        warned = False

    best_grid = None
    best_t = -1
    base = 0
    for level in range(k, 0, -1):
        step = t ** (level - 1)
        grid = [base + i * step for i in range(t + 1)]
        tg = t_functional(f.restrict(grid))
        if tg > best_t:
            best_t = tg
            best_grid = grid
        # descend into the best block of this level
        blk_best = None
        blk_i = 0
        for i in range(t):
            ti = _block_t(f, base + i * step, base + (i + 1) * step)
            if blk_best is None or ti > blk_best:
                blk_best = ti
                blk_i = i
        base = base + blk_i * step

    threshold = 1 - Fraction(delta) / (2 * t) if not isinstance(delta, float) \
        else 1 - delta / (2 * t)
    if best_t < threshold:
        raise BoostFailed(
            f"best grid T = {float(best_t):.6f} below threshold {float(threshold):.6f}",
            best_grid=best_grid, best_t=best_t)
    composed = f.restrict(best_grid)
    dist = path_distortion(composed)
    # the log-embedding bound: T >= 1 - eps with eps < 1/t gives dist <= 1/(1 - t eps)
    eps = 1 - best_t
    assert eps < Fraction(1, t) if isinstance(eps, Fraction) else eps < 1 / t
    bound = 1 / (1 - t * eps)
    assert dist <= bound if isinstance(dist, Fraction) and isinstance(bound, Fraction) \
        else float(dist) <= float(bound) * (1 + 1e-12)
    assert float(bound) <= 1 + float(delta) * (1 + 1e-12)
    return BoostResult(best_grid, best_t, dist, warned)
