"""Configuration classifiers for approximate midpoints in the contracted tree
metric d_eps.

With eps_n < 1/4 everywhere and delta small, any approximate-midpoint triple
(x, y, z) in (B_infty, d_eps) is, after possibly reversing the roles of x and
z, close to one of two rigid shapes:

  path-type (a, b, c): h(c) <= h(b) <= h(a), a descends from b, and c branches
      off below b's height (h(lca(c, b)) < h(b)) -- the three points lie in
      order along a descending branch;
  tent-type (a, b, c): h(b) <= h(c), b descends from a, and c branches off
      below a's height (h(lca(a, c)) < h(a)) -- a is a high point with b and c
      hanging off opposite sides.

The proofs produce witnesses that are ancestors of the three input points at
one of the three input heights, so certification searches exactly that finite
candidate pool.  Fork quadruples and approximate 3-paths are classified by
combining triple labels through small resolution tables, with two genuinely
constructive cases ("promotions") where a fresh witness is found by a 1-D
search over ancestor heights.
"""
from __future__ import annotations

from fractions import Fraction

from ..errors import NotApproximatePath, PreconditionViolated
from ..metric import is_midpoint
from ..trees import tree_distance
from .vertical import vertical_report

# label characters: 'P' = (x,y,z) path-type, 'T' = (x,y,z) tent-type,
# 'p' = (z,y,x) path-type, 't' = (z,y,x) tent-type.


def _path_type(a, b, c):
    return (c.depth <= b.depth <= a.depth
            and b.is_ancestor_of(a)
            and c.lca_depth(b) < b.depth)


def _tent_type(a, b, c):
    return (b.depth <= c.depth
            and a.is_ancestor_of(b)
            and a.lca_depth(c) < a.depth)


def _certify_labels(space, x, y, z, budget):
    """All labels in {P, T, p, t} certified within `budget`.

    Returns {label: (nearness, (a, b, c))} where (a, b, c) is the exact
    configuration witnessing the label (ordered to match the triple the label
    refers to) and nearness = max over positions of d_eps(point, witness).
    Candidates are the ancestors of x, y, z at heights in {h(x), h(y), h(z)}.
    """
    heights = sorted({x.depth, y.depth, z.depth})
    pool = []
    seen = set()
    for v in (x, y, z):
        for h in heights:
            if h <= v.depth:
                a = v.ancestor(h)
                if a.path not in seen:
                    seen.add(a.path)
                    pool.append(a)
    near = {}
    for v in (x, y, z):
        near[v] = [(c, space.distance(v, c)) for c in pool
                   if space.distance(v, c) <= budget]

    labels = {}
    for label, (o1, o2, o3), check in (
            ("P", (x, y, z), _path_type),
            ("T", (x, y, z), _tent_type),
            ("p", (z, y, x), _path_type),
            ("t", (z, y, x), _tent_type)):
        best = None
        for a, na in near[o1]:
            for b, nb in near[o2]:
                if check is _path_type and not b.is_ancestor_of(a):
                    continue
                if check is _tent_type and not a.is_ancestor_of(b):
                    continue
                for c, nc in near[o3]:
                    if check(a, b, c):
                        n = max(na, nb, nc)
                        if best is None or n < best[0]:
                            best = (n, (a, b, c))
        if best is not None:
            labels[label] = best
    return labels


_VARIANT = {"P": "PathType", "T": "TentType",
            "p": "ReversePathType", "t": "ReverseTentType"}


class MidpointClass:
    def __init__(self, variant, witness, nearness, threshold, labels):
        self.variant = variant      # PathType/TentType/Reverse.../Unclassified
        self.witness = witness      # the exact configuration triple, or None
        self.nearness = nearness
        self.threshold = threshold  # the 3 delta d_eps(x, z) budget
        self.labels = labels        # every certified label

    def __repr__(self):
        return f"MidpointClass({self.variant}, nearness={self.nearness})"


def _require_ready(space, delta, limit, what):
    if not space.classifier_ready:
        raise PreconditionViolated("classifier requires eps_n < 1/4 throughout")
    if not Fraction(delta) < limit:
        raise PreconditionViolated(f"{what} requires delta < {limit}")


def _check_exclusions(space, x, y, z, labels):
    """The certified labels can never combine in geometrically impossible ways
    below the stated nearness thresholds; assert that, since a violation would
    mean the configuration predicates themselves are wrong."""
    dxy = space.distance(x, y)
    dzy = space.distance(z, y)

    def tight(l, bound):
        return l in labels and labels[l][0] <= bound

    if x != y:
        assert not (tight("P", dxy / 5) and tight("T", dxy / 5)), \
            (x, y, z, labels)
        assert not (tight("P", dxy / 11) and tight("p", dxy / 11)), \
            (x, y, z, labels)
        assert not (tight("T", dxy / 11) and tight("t", dxy / 11)), \
            (x, y, z, labels)
    if z != y:
        assert not (tight("p", dzy / 5) and tight("t", dzy / 5)), \
            (x, y, z, labels)


def classify_midpoint(space, x, y, z, delta):
    """Classify the approximate-midpoint triple (x, y, z); the guarantee is
    that (x, y, z) or (z, y, x) is 3*delta*d_eps(x, z)-near path- or tent-type."""
    _require_ready(space, delta, Fraction(1, 16), "midpoint classification")
    space.check_depth(x, y, z)
    if not is_midpoint(space, x, y, z, delta):
        raise PreconditionViolated("y is not a delta-approximate midpoint of x, z")
    budget = 3 * Fraction(delta) * space.distance(x, z)
    labels = _certify_labels(space, x, y, z, budget)
    _check_exclusions(space, x, y, z, labels)
    if not labels:
        return MidpointClass("Unclassified", None, None, budget, labels)
    best = min(labels, key=lambda l: (labels[l][0], "PTpt".index(l)))
    nearness, witness = labels[best]
    return MidpointClass(_VARIANT[best], witness, nearness, budget, labels)


# ---------------------------------------------------------------------------
# forks
# ---------------------------------------------------------------------------

class ForkClass:
    def __init__(self, variant, witnesses, nearness, threshold, prong_bound=None):
        self.variant = variant        # I/II/III/IV/ProngsContracted/Unclassified
        self.witnesses = witnesses    # (witness for (x,y,z), witness for (x,y,w))
        self.nearness = nearness
        self.threshold = threshold
        self.prong_bound = prong_bound  # set for ProngsContracted

    def __repr__(self):
        return f"ForkClass({self.variant}, nearness={self.nearness})"


def _promote_path(space, x_w, y_w, target, budget):
    """Find a strict ancestor of y_w within `budget` of `target`, yielding the
    path-type configuration (x_w, y_w, ancestor).  1-D search over integer
    heights; returns (nearness, ancestor) or None."""
    best = None
    for h in range(y_w.depth):
        cand = y_w.ancestor(h)
        d = space.distance(cand, target)
        if d <= budget and (best is None or d < best[0]):
            best = (d, cand)
    return best


def classify_fork(space, x, y, z, w, delta):
    """Classify the fork (x; y; z, w): y a delta-approximate midpoint of both
    (x, z) and (x, w).

    Every fork is 35*delta*d_eps(x, y)-near one of four rigid shapes, or else
    its prongs are contracted: d_eps(z, w) <= 2(35 delta + eps_h0) d_eps(x, y)
    with h0 the minimum of the four heights.
    """
    _require_ready(space, delta, Fraction(1, 70), "fork classification")
    space.check_depth(x, y, z, w)
    for prong in (z, w):
        if not is_midpoint(space, x, y, prong, delta):
            raise PreconditionViolated("y must be an approximate midpoint of both prongs")
    delta = Fraction(delta)
    d = space.distance(x, y)
    eta = 7 * delta                      # per-triple certification budget
    cap = 35 * delta * d                 # final nearness cap
    sz = _certify_labels(space, x, y, z, eta * d)
    sw = _certify_labels(space, x, y, w, eta * d)
    _check_exclusions(space, x, y, z, sz)
    _check_exclusions(space, x, y, w, sw)

    def result(variant, lz, lw, extra=None):
        nz, wz = lz
        nw, ww = lw
        n = max(nz, nw)
        assert n <= cap, (variant, n, cap)
        return ForkClass(variant, (wz, ww), n, cap, prong_bound=extra)

    # the four direct shapes (both prongs symmetric except where noted)
    if "T" in sz and "T" in sw:
        return result("I", sz["T"], sw["T"])
    if "P" in sz and "P" in sw:
        return result("II", sz["P"], sw["P"])
    if "p" in sz and "T" in sw:
        return result("III", sz["p"], sw["T"])
    if "T" in sz and "p" in sw:
        return result("III", sw["p"], sz["T"])
    if "p" in sz and "t" in sw:
        return result("IV", sz["p"], sw["t"])
    if "t" in sz and "p" in sw:
        return result("IV", sw["p"], sz["t"])
    # contracted prongs: both reversed triples are (nearly) path- or tent-type
    if ("p" in sz and "p" in sw) or ("t" in sz and "t" in sw):
        h0 = min(x.depth, y.depth, z.depth, w.depth)
        bound = 2 * (35 * delta + space.eps[h0]) * d
        dzw = space.distance(z, w)
        assert dzw <= bound, (dzw, bound)
        key = "p" if ("p" in sz and "p" in sw) else "t"
        fc = result("ProngsContracted", sz[key], sw[key], extra=bound)
        return fc
    # promotion: one prong certified path, the other reversed-tent; a fresh
    # path witness for the tent prong is found among the ancestors of the
    # certified path witness's middle point
    for (sa, sb, za, wb, swap) in ((sz, sw, z, w, False), (sw, sz, w, z, True)):
        if "P" in sa and "t" in sb:
            n_p, (xp, yp, _) = sa["P"]
            best = _promote_path(space, xp, yp, wb, cap)
            if best is not None:
                n_b, bar = best
                n = max(n_p, sb["t"][0], n_b)
                assert n <= cap, (n, cap)
                wit_a = sa["P"][1]
                wit_b = (xp, yp, bar)
                wits = (wit_a, wit_b) if not swap else (wit_b, wit_a)
                return ForkClass("II", wits, n, cap)
    return ForkClass("Unclassified", None, None, cap)


# ---------------------------------------------------------------------------
# approximate 3-paths
# ---------------------------------------------------------------------------

class ThreePathClass:
    def __init__(self, variant, witnesses, nearness, threshold, scale_range):
        self.variant = variant        # A/B/C/ReverseA/ReverseB/ReverseC/Unclassified
        self.witnesses = witnesses
        self.nearness = nearness
        self.threshold = threshold
        self.scale_range = scale_range  # feasible [L_min, L_max]

    def __repr__(self):
        return f"ThreePathClass({self.variant}, nearness={self.nearness})"


def path_scale_range(space, pts, delta):
    """Feasible scales L with (j-i) L <= d(x_i, x_j) <= (1+delta)(j-i) L for
    all i < j, or raise NotApproximatePath when the interval is empty."""
    delta = Fraction(delta)
    lo = Fraction(0)
    hi = None
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dij = space.distance(pts[i], pts[j])
            lo = max(lo, dij / ((1 + delta) * (j - i)))
            cur = dij / (j - i)
            hi = cur if hi is None else min(hi, cur)
    if lo > hi or hi == 0:
        raise NotApproximatePath(f"no feasible scale: need L in [{lo}, {hi}]")
    return lo, hi


def classify_3path(space, x0, x1, x2, x3, delta):
    """Classify a (1 + delta)-approximate 3-path (x0, x1, x2, x3).

    The quadruple, forwards or reversed, is 35*delta*d_eps(x0, x1)-near one of
    three shapes built from the triple types of (x0, x1, x2) and (x1, x2, x3):

      A: both triples path-type (a monotone descending staircase);
      B: first triple path-type, second reversed tent-type;
      C: first reversed path-type, second tent-type.
    """
    _require_ready(space, delta, Fraction(1, 200), "3-path classification")
    pts = (x0, x1, x2, x3)
    space.check_depth(*pts)
    scale = path_scale_range(space, pts, delta)
    delta = Fraction(delta)
    d01 = space.distance(x0, x1)
    budget = 8 * delta * d01             # covers the triple guarantees
    cap = 35 * delta * d01
    s1 = _certify_labels(space, x0, x1, x2, budget)   # triple (x0, x1, x2)
    s2 = _certify_labels(space, x1, x2, x3, budget)   # triple (x1, x2, x3)
    _check_exclusions(space, x0, x1, x2, s1)
    _check_exclusions(space, x1, x2, x3, s2)

    def result(variant, l1, l2):
        n = max(l1[0], l2[0])
        assert n <= cap, (variant, n, cap)
        return ThreePathClass(variant, (l1[1], l2[1]), n, cap, scale)

    combos = (
        # forward quadruple: triples (x0,x1,x2) and (x1,x2,x3)
        ("A", s1, "P", s2, "P"),
        ("B", s1, "P", s2, "t"),
        ("C", s1, "p", s2, "T"),
        # reversed quadruple (x3,x2,x1,x0): triples are the reversals, so the
        # labels come from the same two tables with P <-> p and T <-> t
        ("ReverseA", s2, "p", s1, "p"),
        ("ReverseB", s2, "p", s1, "T"),
        ("ReverseC", s2, "P", s1, "t"),
    )
    for variant, sa, la, sb, lb in combos:
        if la in sa and lb in sb:
            return result(variant, sa[la], sb[lb])
    # double-tent promotions: both triples tent-type forces shape C after
    # replacing the outer point by an ancestor of the second tent's apex
    for variant, sa, la, sb, lb, far in (
            ("C", s1, "T", s2, "T", x0),
            ("ReverseC", s2, "t", s1, "t", x3)):
        if la in sa and lb in sb:
            n_b, (a2, b2, _) = sb[lb]
            best = _promote_path(space, b2, a2, far, cap)
            if best is not None:
                n_f, far_w = best
                n = max(sa[la][0], n_b, n_f)
                assert n <= cap, (variant, n, cap)
                path_wit = (b2, a2, far_w)   # path-type for the reversed triple
                return ThreePathClass(variant, (path_wit, sb[lb][1]), n, cap, scale)
    return ThreePathClass("Unclassified", None, None, cap, scale)


# ---------------------------------------------------------------------------
# the depth-4 rigidity bound
# ---------------------------------------------------------------------------

def b4_bound_check(space, f, delta):
    """For a (1 + delta)-vertically faithful map f of B_4 into (B_infty, d_eps)
    with delta < 1/400:  dist(f) >= 1 / (500 delta + eps_h0), where h0 is the
    minimum height in the image.

    Returns (dist, bound, holds); dist is computed over all vertex pairs of
    B_4 (inf when f collapses a non-ancestor pair).
    """
    from ..trees import enumerate_bn
    import math as _math

    if not Fraction(delta) < Fraction(1, 400):
        raise PreconditionViolated("requires delta < 1/400")
    verts = enumerate_bn(4)
    images = {v: f(v) for v in verts}
    space.check_depth(*images.values())
    rep = vertical_report(lambda v: images[v],
                          [(a, b) for b in verts for a in
                           (b.ancestor(h) for h in range(b.depth))],
                          _SpaceAdapter(space))
    if not rep.faithful(delta):
        raise PreconditionViolated(f"f is not (1+delta)-vertically faithful: D = {rep.D}")
    lip = 0
    colip = 0
    collapsed = False
    for i, a in enumerate(verts):
        for b in verts[i + 1:]:
            dt = tree_distance(a, b)
            dx = space.distance(images[a], images[b])
            if dx == 0:
                collapsed = True
                continue
            r = Fraction(dx) / dt
            lip = max(lip, r)
            colip = max(colip, 1 / r)
    dist = _math.inf if collapsed else lip * colip
    h0 = min(v.depth for v in images.values())
    bound = 1 / (500 * Fraction(delta) + space.eps[h0])
    holds = dist >= bound
    return dist, bound, holds


class _SpaceAdapter:
    """Expose HTreeSpace through the .dist attribute vertical_report expects."""

    def __init__(self, space):
        self.dist = space.distance
