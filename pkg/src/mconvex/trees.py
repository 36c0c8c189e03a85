"""Binary trees, the tree metric, and the horizontally contracted metric d_eps.

Vertices of the (conceptually infinite) rooted binary tree are addressed by
their root path, a finite bit sequence.  The contracted metric is

    d_eps(x, y) = |h(y) - h(x)|
                  + 2 * eps[min(h(x), h(y))] * (min(h(x), h(y)) - h(lca(x, y)))

which is a metric exactly when {eps_n} is non-increasing and {n * eps_n} is
non-decreasing.  With eps identically 1 it coincides with the tree metric
h(x) + h(y) - 2 h(lca(x, y)).
"""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import DepthExceeded, HypothesisViolated, PreconditionViolated, TooLarge
from .metric import FiniteMetricSpace

DEFAULT_MAX_DEPTH = 64
ENUMERATE_LIMIT = 20


class TreeVertex:
    """A vertex of the rooted binary tree, identified by its root path."""

    __slots__ = ("path",)

    def __init__(self, path=()):
        if isinstance(path, str):
            path = tuple(int(c) for c in path)
        self.path = tuple(path)
        if any(b not in (0, 1) for b in self.path):
            raise ValueError("path bits must be 0/1")

    @property
    def depth(self):
        return len(self.path)

    def ancestor(self, height):
        """The ancestor at the given depth (height <= own depth)."""
        if not 0 <= height <= len(self.path):
            raise PreconditionViolated(f"no ancestor at height {height} of depth-{len(self.path)} vertex")
        return TreeVertex(self.path[:height])

    def parent(self):
        return self.ancestor(len(self.path) - 1)

    def child(self, bit):
        return TreeVertex(self.path + (bit,))

    def descend(self, bits):
        return TreeVertex(self.path + tuple(bits))

    def descend_zeros(self, k):
        """The all-zeros descendant k levels down (the deterministic choice)."""
        return TreeVertex(self.path + (0,) * k)

    def lca(self, other):
        p, q = self.path, other.path
        i = 0
        m = min(len(p), len(q))
        while i < m and p[i] == q[i]:
            i += 1
        return TreeVertex(p[:i])

    def lca_depth(self, other):
        p, q = self.path, other.path
        i = 0
        m = min(len(p), len(q))
        while i < m and p[i] == q[i]:
            i += 1
        return i

    def is_ancestor_of(self, other):
        """Non-strict: every vertex is an ancestor of itself."""
        return other.path[:len(self.path)] == self.path

    def is_strict_ancestor_of(self, other):
        return len(self.path) < len(other.path) and self.is_ancestor_of(other)

    def __eq__(self, other):
        return isinstance(other, TreeVertex) and self.path == other.path

    def __hash__(self):
        return hash(self.path)

    def __lt__(self, other):
        return (len(self.path), self.path) < (len(other.path), other.path)

    def __str__(self):
        return "".join(str(b) for b in self.path)

    def __repr__(self):
        return f"TreeVertex({str(self)!r})"


ROOT = TreeVertex(())


def tree_distance(x, y):
    """Unweighted tree metric: h(x) + h(y) - 2 h(lca(x, y))."""
    return x.depth + y.depth - 2 * x.lca_depth(y)


class EpsilonSequence:
    """A contraction schedule eps_0..eps_N of positive rationals.

    Validity (checked on construction): eps non-increasing, n*eps_n
    non-decreasing, eps_n <= 1.  `classifier_ready` additionally requires
    eps_n < 1/4 for all n, the hypothesis of the configuration classifiers.
    """

    def __init__(self, values, check=True):
        self.values = [Fraction(v) for v in values]
        if not self.values:
            raise ValueError("empty epsilon sequence")
        if check:
            bad = epsilon_violations(self.values)
            if bad:
                raise ValueError(f"invalid epsilon sequence: {bad[0]}")

    @property
    def N(self):
        return len(self.values) - 1

    @property
    def classifier_ready(self):
        return all(v < Fraction(1, 4) for v in self.values)

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"EpsilonSequence(N={self.N}, eps0={self.values[0]})"


def epsilon_violations(values):
    """All invariant violations of a raw epsilon sequence (first index reported per kind)."""
    violations = []
    vals = [Fraction(v) for v in values]
    for n, v in enumerate(vals):
        if v <= 0:
            violations.append(("nonpositive", n))
            break
    for n, v in enumerate(vals):
        if v > 1:
            violations.append(("above_one", n))
            break
    for n in range(len(vals) - 1):
        if vals[n + 1] > vals[n]:
            violations.append(("increasing", n + 1))
            break
    for n in range(len(vals) - 1):
        if (n + 1) * vals[n + 1] < n * vals[n]:
            violations.append(("n_eps_decreasing", n + 1))
            break
    return violations


def validate_epsilon(raw):
    """Return an EpsilonSequence if the raw values are valid, else the violation list."""
    violations = epsilon_violations(raw)
    if violations:
        return violations
    return EpsilonSequence(raw, check=False)


def epsilon_from_growth(s, N):
    """eps_n = 1/s(n) for a growth function with s(n) >= 4, s non-decreasing,
    n/s(n) non-decreasing.  Values are rationalized to denominator <= 10^6.

    Raises HypothesisViolated at the first index where the hypothesis fails.
    """
    vals = []
    for n in range(N + 1):
        v = s(n)
        v = Fraction(v).limit_denominator(10 ** 6)
        if v < 4:
            raise HypothesisViolated(n, f"s({n}) = {v} < 4")
        if vals and v < vals[-1]:
            raise HypothesisViolated(n, f"s not non-decreasing at n = {n}")
        # n/s(n) >= (n-1)/s(n-1)  <=>  n * s(n-1) >= (n-1) * s(n)
        if vals and n >= 2 and n * vals[-1] < (n - 1) * v:
            raise HypothesisViolated(n, f"n/s(n) not non-decreasing at n = {n}")
        vals.append(v)
    eps = [1 / v for v in vals]
    seq = validate_epsilon(eps)
    if not isinstance(seq, EpsilonSequence):  # pragma: no cover - guarded above
        raise HypothesisViolated(-1, f"derived sequence invalid: {seq}")
    return seq


class HTreeSpace:
    """The binary tree up to max_depth with the contracted metric d_eps."""

    def __init__(self, eps, max_depth=DEFAULT_MAX_DEPTH):
        if not isinstance(eps, EpsilonSequence):
            eps = EpsilonSequence(eps)
        if max_depth > eps.N:
            raise ValueError(f"max_depth {max_depth} exceeds epsilon horizon {eps.N}")
        self.eps = eps
        self.max_depth = max_depth

    @property
    def classifier_ready(self):
        return self.eps.classifier_ready

    def check_depth(self, *vertices):
        for v in vertices:
            if v.depth > self.max_depth:
                raise DepthExceeded(f"depth {v.depth} > max_depth {self.max_depth}")

    def distance(self, x, y):
        self.check_depth(x, y)
        hx, hy = x.depth, y.depth
        m = min(hx, hy)
        return abs(hy - hx) + 2 * self.eps[m] * (m - x.lca_depth(y))

    # alias so HTreeSpace quacks like FiniteMetricSpace for the classifiers
    dist = distance

    def as_metric_space(self, vertices):
        verts = list(vertices)
        return FiniteMetricSpace(verts, self.distance, exact=True)

    def to_json(self):
        import json
        from .metric import rat_to_str
        return json.dumps({
            "eps": [rat_to_str(v) for v in self.eps.values],
            "max_depth": self.max_depth,
        })

    @classmethod
    def from_json(cls, text):
        import json
        from .metric import rat_from_str
        data = json.loads(text)
        return cls(EpsilonSequence([rat_from_str(v) for v in data["eps"]]),
                   max_depth=data["max_depth"])


def h_tree_distance(space, x, y):
    """d_eps(x, y) in the given HTreeSpace (exact rational)."""
    return space.distance(x, y)


def enumerate_bn(n):
    """All 2^(n+1)-1 vertices of the depth-n binary tree, in BFS order."""
    if n > ENUMERATE_LIMIT:
        raise TooLarge(f"n = {n} > {ENUMERATE_LIMIT}")
    out = []
    level = [ROOT]
    out.extend(level)
    for _ in range(n):
        level = [v.child(b) for v in level for b in (0, 1)]
        out.extend(level)
    return out


def bn_leaves(n):
    return [v for v in enumerate_bn(n) if v.depth == n]


def bn_internal(n):
    return [v for v in enumerate_bn(n) if v.depth < n]


def sp_pairs(n):
    """All unordered pairs {x, y} with x a strict ancestor of y in B_n."""
    for y in enumerate_bn(n):
        for h in range(y.depth):
            yield (y.ancestor(h), y)


# ---------------------------------------------------------------------------
# fast helpers for exhaustive checks: vertices as heap indices
# ---------------------------------------------------------------------------

def heap_lca_depth(i, j):
    """lca depth of heap-indexed vertices (root = 1, children 2k, 2k+1)."""
    di = i.bit_length() - 1
    dj = j.bit_length() - 1
    if di > dj:
        i >>= di - dj
    elif dj > di:
        j >>= dj - di
    d = min(di, dj)
    while i != j:
        i >>= 1
        j >>= 1
        d -= 1
    return d


def heap_lca_depth_block(rows, cols):
    """Vectorized heap_lca_depth: int arrays rows (k,), cols (m,) -> (k, m)."""
    import numpy as np

    A = np.asarray(rows, dtype=np.int64)[:, None]
    B = np.asarray(cols, dtype=np.int64)[None, :]
    dA = np.frexp(A)[1].astype(np.int64) - 1
    dB = np.frexp(B)[1].astype(np.int64) - 1
    A = A >> np.clip(dA - dB, 0, None)
    B = B >> np.clip(dB - dA, 0, None)
    depth = np.minimum(dA, dB)
    while True:
        mask = A != B
        if not mask.any():
            break
        A = np.where(mask, A >> 1, A)
        B = np.where(mask, B >> 1, B)
        depth -= mask
    return depth


def scaled_distance_matrix(eps, depth):
    """Integer-scaled d_eps distance matrix over all vertices to `depth`.

    Returns (numpy int64 matrix in BFS/heap order, common denominator), with
    matrix[i][j] = denom * d_eps(v_i, v_j) exactly.  Used by the exhaustive
    triangle check; exact because all entries share one denominator.
    """
    import numpy as np

    denom = 1
    for v in eps.values[:depth + 1]:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    # 2 * eps_m scaled to integers
    two_eps = np.array([int(2 * eps[m] * denom) for m in range(depth + 1)],
                       dtype=np.int64)
    n = 2 ** (depth + 1) - 1
    idx = np.arange(1, n + 1, dtype=np.int64)
    depths = np.frexp(idx)[1].astype(np.int64) - 1
    lca = heap_lca_depth_block(idx, idx)
    m = np.minimum(depths[:, None], depths[None, :])
    mat = np.abs(depths[:, None] - depths[None, :]) * denom + two_eps[m] * (m - lca)
    return mat, denom


def tree_metric_equality_violations(eps, depth, block=256):
    """Count pairs up to `depth` where d_eps differs from the tree metric.

    Blockwise over heap indices, so depth 12 (8191 vertices, ~33M ordered
    pairs) stays within a modest memory budget.  With eps identically 1 the
    count must be 0: the contraction term 2*eps*(min - lca) then equals the
    full horizontal travel of the shortest path.
    """
    import numpy as np

    denom = 1
    for v in eps.values[:depth + 1]:
        denom = denom * v.denominator // math.gcd(denom, v.denominator)
    two_eps = np.array([int(2 * eps[m] * denom) for m in range(depth + 1)],
                       dtype=np.int64)
    n = 2 ** (depth + 1) - 1
    idx = np.arange(1, n + 1, dtype=np.int64)
    depths = np.frexp(idx)[1].astype(np.int64) - 1
    bad = 0
    for lo in range(0, n, block):
        r = idx[lo:lo + block]
        rd = depths[lo:lo + block]
        lca = heap_lca_depth_block(r, idx)
        m = np.minimum(rd[:, None], depths[None, :])
        d_eps = np.abs(rd[:, None] - depths[None, :]) * denom + two_eps[m] * (m - lca)
        d_tree = (rd[:, None] + depths[None, :] - 2 * lca) * denom
        bad += int((d_eps != d_tree).sum())
    return bad


# ---------------------------------------------------------------------------
# stitching operations
# ---------------------------------------------------------------------------

def stitch_ancestor(x, x_prime, y, y_prime, space):
    """Matched ancestors move no further apart than the originals.

    Requires y ancestor of x, y' ancestor of x', with equal depth offsets.
    Returns (d_eps(y, y'), d_eps(x, x')), asserting the first <= the second.
    """
    if not (y.is_ancestor_of(x) and y_prime.is_ancestor_of(x_prime)):
        raise PreconditionViolated("y, y' must be ancestors of x, x'")
    if x.depth - y.depth != x_prime.depth - y_prime.depth:
        raise PreconditionViolated("depth offsets must match")
    dy = space.distance(y, y_prime)
    dx = space.distance(x, x_prime)
    assert dy <= dx, f"ancestor stitching bound violated: {dy} > {dx}"
    return dy, dx


def stitch_horizontal(x, x_prime, y, space):
    """Produce y' with h(y') - h(x') = h(y) - h(x), d_eps(y, y') <= d_eps(x, x'),
    and |d_eps(y', x') - d_eps(x, y)| <= 2 d_eps(x, x').

    Three constructive cases; "arbitrary descendant" picks the all-zeros
    extension.  Near the root the required ancestor may not exist
    (h(y) - h(x) + h(x') < 0); that raises PreconditionViolated.
    """
    if y.depth > x.depth:
        raise PreconditionViolated("requires h(y) <= h(x)")
    space.check_depth(x, x_prime, y)
    hx, hxp, hy = x.depth, x_prime.depth, y.depth
    if hx >= hxp:
        target = hy - (hx - hxp)
        if target < 0:
            raise PreconditionViolated("required ancestor of y would lie above the root")
        y_prime = y.ancestor(target)
    elif x.lca_depth(x_prime) != x.lca_depth(y):
        y_prime = y.descend_zeros(hxp - hx)
        if y_prime.depth > space.max_depth:
            raise DepthExceeded("required descendant exceeds max_depth")
    else:
        # equal lca depths: place y' on the branch through lca(x, y) and x
        target = hy + hxp - hx
        if target <= hx:
            y_prime = x.ancestor(target)
        else:
            y_prime = x.descend_zeros(target - hx)
            if y_prime.depth > space.max_depth:
                raise DepthExceeded("required descendant exceeds max_depth")
    dxx = space.distance(x, x_prime)
    dyy = space.distance(y, y_prime)
    assert dyy <= dxx, f"horizontal stitching bound violated: {dyy} > {dxx}"
    gap = abs(space.distance(y_prime, x_prime) - space.distance(x, y))
    assert gap <= 2 * dxx, f"horizontal distance drift {gap} > 2*{dxx}"
    return y_prime


def stitch_descendant(x, x_prime, y, y_prime, space):
    """Matched descendants drift by at most the horizontal contraction term.

    Requires y descendant of x, y' descendant of x', equal depth offsets.
    Asserts d_eps(y, y') <= d_eps(x, x') + 2 eps_{h(y)} (h(y) - h(x) + d_eps(x, x'))
    (via the sharper min-height form) and returns (d_eps(y, y'), bound).
    """
    if not (x.is_ancestor_of(y) and x_prime.is_ancestor_of(y_prime)):
        raise PreconditionViolated("y, y' must be descendants of x, x'")
    if y.depth - x.depth != y_prime.depth - x_prime.depth:
        raise PreconditionViolated("depth offsets must match")
    dxx = space.distance(x, x_prime)
    dyy = space.distance(y, y_prime)
    k = y.depth - x.depth
    sharp = dxx + 2 * space.eps[min(y.depth, y_prime.depth)] * k
    loose = dxx + 2 * space.eps[y.depth] * (k + dxx)
    assert dyy <= sharp <= loose, \
        f"descendant stitching bound violated: {dyy} vs {sharp} vs {loose}"
    return dyy, loose
