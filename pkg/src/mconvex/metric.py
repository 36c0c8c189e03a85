"""Finite metric spaces, distortion of point maps, and approximate midpoint sets.

Distances are exact rationals whenever the construction permits (tree metrics,
contracted tree metrics with rational epsilon, Laakso graphs); floating-point
distances carry an explicit tolerance used by verify_metric.
"""
from __future__ import annotations

import json
import math
import random
from fractions import Fraction

from .errors import CollapsedPair

# number of points up to which verify_metric checks every triple
EXHAUSTIVE_LIMIT = 2000
SAMPLED_TRIPLES = 10 ** 6


def rat_to_str(x):
    """Serialize a number: rationals as "p/q", everything else as float."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return f"{x}/1"
    return float(x)


def rat_from_str(s):
    if isinstance(s, str):
        num, _, den = s.partition("/")
        return Fraction(int(num), int(den) if den else 1)
    return float(s)


class FiniteMetricSpace:
    """A finite point set with a symmetric nonnegative distance function.

    `dist` is a callable on pairs of points.  `exact` tags whether the values
    are exact (int/Fraction); `tol` is the relative tolerance applied to the
    metric axioms in floating mode.  An optional `dist_pow(x, y, p)` hook lets
    a space expose exact p-th powers of distances (e.g. squared l2 distances)
    even when the distance itself is irrational.
    """

    def __init__(self, points, dist, exact=True, tol=1e-12, dist_pow=None):
        self.points = list(points)
        self._dist = dist
        self._dist_pow = dist_pow
        self.exact = exact
        self.tol = tol

    def dist(self, x, y):
        return self._dist(x, y)

    def dist_pow(self, x, y, p):
        """d(x, y)**p, exact when possible (integer p and exact distances)."""
        if self._dist_pow is not None:
            return self._dist_pow(x, y, p)
        d = self._dist(x, y)
        if isinstance(p, int) or (isinstance(p, float) and p.is_integer()):
            return d ** int(p)
        return float(d) ** p

    def __len__(self):
        return len(self.points)

    @classmethod
    def from_matrix(cls, points, matrix, exact=True, tol=1e-12):
        points = list(points)
        index = {pt: i for i, pt in enumerate(points)}
        rows = [list(row) for row in matrix]

        def dist(x, y):
            return rows[index[x]][index[y]]

        space = cls(points, dist, exact=exact, tol=tol)
        space._matrix = rows
        return space

    def distance_matrix(self):
        """Row-major list of lists of pairwise distances."""
        cached = getattr(self, "_matrix", None)
        if cached is not None:
            return cached
        pts = self.points
        n = len(pts)
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                d = self._dist(pts[i], pts[j])
                rows[i][j] = d
                rows[j][i] = d
        self._matrix = rows
        return rows

    def to_json(self):
        rows = self.distance_matrix()
        return json.dumps({
            "points": [str(p) for p in self.points],
            "dist": [[rat_to_str(d) for d in row] for row in rows],
            "exact": self.exact,
        })

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        rows = [[rat_from_str(d) for d in row] for row in data["dist"]]
        return cls.from_matrix(data["points"], rows, exact=data["exact"])


class MetricReport:
    """Outcome of verify_metric: list of violations plus the mode used."""

    def __init__(self, violations, mode, triples_checked):
        self.violations = violations
        self.mode = mode
        self.triples_checked = triples_checked

    @property
    def is_metric(self):
        return not self.violations

    def __repr__(self):
        return (f"MetricReport(mode={self.mode!r}, checked={self.triples_checked}, "
                f"violations={len(self.violations)})")


def verify_metric(space, seed=0):
    """Check symmetry, zero diagonal, nonnegativity and the triangle inequality.

    Exhaustive over all triples up to EXHAUSTIVE_LIMIT points; beyond that,
    samples SAMPLED_TRIPLES random triples (the report records the mode).
    Tolerance is 0 in exact mode and `space.tol` (relative) in floating mode.
    """
    pts = space.points
    n = len(pts)
    if n < 1:
        raise ValueError("space must have at least one point")
    violations = []
    tol = 0 if space.exact else space.tol
    rows = space.distance_matrix()

    for i in range(n):
        if rows[i][i] != 0:
            violations.append(("diagonal", pts[i]))
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                violations.append(("symmetry", pts[i], pts[j]))
            if rows[i][j] < 0:
                violations.append(("negative", pts[i], pts[j]))

    def tri_bad(a, b, c):
        # d(a,c) <= d(a,b) + d(b,c), with relative slack in floating mode
        lhs = rows[a][c]
        rhs = rows[a][b] + rows[b][c]
        if tol:
            return lhs > rhs + tol * max(abs(lhs), abs(rhs), 1.0)
        return lhs > rhs

    if n <= EXHAUSTIVE_LIMIT:
        mode = "exhaustive"
        checked = 0
        try:
            import numpy as np
        except ImportError:  # pragma: no cover
            np = None
        as_np = None
        if np is not None and n > 64:
            as_np = _numpy_matrix(rows, space.exact)
        if as_np is not None:
            mat, np_tol = as_np
            checked = n * n * n
            for k in range(n):
                bad = mat > mat[:, k][:, None] + mat[k, :][None, :] + np_tol
                if bad.any():
                    for i, j in zip(*bad.nonzero()):
                        violations.append(("triangle", pts[i], pts[k], pts[j]))
        else:
            for i in range(n):
                for j in range(n):
                    if i == j:
                        continue
                    for k in range(n):
                        if k == i or k == j:
                            continue
                        checked += 1
                        if tri_bad(i, j, k):
                            violations.append(("triangle", pts[i], pts[j], pts[k]))
    else:
        mode = "sampled"
        rng = random.Random(seed)
        checked = SAMPLED_TRIPLES
        for _ in range(SAMPLED_TRIPLES):
            i, j, k = rng.randrange(n), rng.randrange(n), rng.randrange(n)
            if tri_bad(i, j, k):
                violations.append(("triangle", pts[i], pts[j], pts[k]))
    return MetricReport(violations, mode, checked)


def _numpy_matrix(rows, exact):
    """Scale an exact rational matrix to int64 (or fall back to float64).

    Returns (matrix, tolerance-matrix-entry) or None when exact scaling fails.
    """
    import numpy as np

    if not exact:
        mat = np.array([[float(d) for d in row] for row in rows], dtype=np.float64)
        return mat, 1e-12 * max(1.0, float(mat.max()))
    den = 1
    for row in rows:
        for d in row:
            if isinstance(d, Fraction):
                den = den * d.denominator // math.gcd(den, d.denominator)
            elif not isinstance(d, int):
                return None
            if den > 10 ** 9:
                return None
    scaled = [[int(d * den) for d in row] for row in rows]
    top = max(max(row) for row in scaled)
    if top > 2 ** 61:
        return None
    return np.array(scaled, dtype=np.int64), 0


class PointMap:
    """A map from the points of one finite metric space into another."""

    def __init__(self, source, target, assignment):
        self.source = source
        self.target = target
        if callable(assignment):
            assignment = {p: assignment(p) for p in source.points}
        self.assignment = dict(assignment)
        self._stats = None

    def __call__(self, x):
        return self.assignment[x]

    def stats(self):
        """(lip, colip, dist); dist is math.inf when a pair is collapsed."""
        if self._stats is not None:
            return self._stats
        lip = 0
        colip = 0
        collapsed = False
        pts = self.source.points
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                ds = self.source.dist(pts[i], pts[j])
                if ds == 0:
                    raise ValueError("source distances must be positive off-diagonal")
                dt = self.target.dist(self(pts[i]), self(pts[j]))
                if dt == 0:
                    collapsed = True
                    continue
                if isinstance(dt, (int, Fraction)) and isinstance(ds, (int, Fraction)):
                    ratio = Fraction(dt) / Fraction(ds)
                else:
                    ratio = float(dt) / float(ds)
                if ratio > lip:
                    lip = ratio
                inv = 1 / ratio
                if inv > colip:
                    colip = inv
        if collapsed:
            self._stats = (lip, colip, math.inf)
        else:
            self._stats = (lip, colip, lip * colip)
        return self._stats


def distortion(f, strict=False):
    """Return (lip, colip, dist) of a PointMap.

    dist is math.inf when f collapses a pair; with strict=True that raises
    CollapsedPair instead (search loops want the infinite value, not a crash).
    """
    lip, colip, dist_ = f.stats()
    if strict and math.isinf(dist_):
        raise CollapsedPair("map collapses a pair of distinct points")
    return lip, colip, dist_


def midpoint_set(space, x, z, delta):
    """The set of delta-approximate midpoints of x and z.

    { y : max(d(x,y), d(y,z)) <= (1+delta)/2 * d(x,z) }.
    """
    if x == z:
        raise ValueError("midpoint_set requires x != z")
    d = space.dist(x, z)
    if isinstance(d, (int, Fraction)) and not isinstance(delta, float):
        bound = Fraction(1 + Fraction(delta), 2) * d
    else:
        bound = (1 + delta) / 2 * d
    out = set()
    for y in space.points:
        if max(space.dist(x, y), space.dist(y, z)) <= bound:
            out.add(y)
    return out


def is_midpoint(space, x, y, z, delta):
    """Membership test y in Mid(x, z, delta) without enumerating the space."""
    if x == z:
        raise ValueError("midpoints need x != z")
    d = space.dist(x, z)
    delta = Fraction(delta) if not isinstance(delta, float) else delta
    bound = (1 + delta) * d / 2
    return max(space.dist(x, y), space.dist(y, z)) <= bound
