"""Vertical faithfulness of tree embeddings.

A map f of B_n into a metric space is (1 + delta)-vertically faithful when all
strict ancestor pairs are stretched by a nearly common factor: with
r(x, y) = d_X(f(x), f(y)) / d_T(x, y) over strict ancestor pairs,
lam = min r and D = max r / min r, faithfulness means D <= 1 + delta.
No constraint is placed on non-ancestor pairs.
"""
from __future__ import annotations

import math
from fractions import Fraction

from ..errors import CollapsedAncestorPair
from ..trees import sp_pairs, tree_distance


class VerticalReport:
    def __init__(self, lam, D, pairs_checked):
        self.lam = lam              # minimal ancestor-pair stretch
        self.D = D                  # max stretch / min stretch (inf on collapse)
        self.pairs_checked = pairs_checked

    def faithful(self, delta):
        return self.D <= 1 + delta

    def __repr__(self):
        return f"VerticalReport(lam={float(self.lam):.6f}, D={float(self.D):.6f})"


def vertical_report(f, pairs, target, strict=True):
    """Stretch statistics of f over the given strict ancestor pairs.

    `f` maps domain vertices to target points; `pairs` is an iterable of
    (ancestor, descendant) TreeVertex pairs.  A collapsed ancestor pair raises
    CollapsedAncestorPair, or yields lam = 0, D = inf with strict=False.
    """
    lo = None
    hi = None
    count = 0
    collapsed = False
    for x, y in pairs:
        count += 1
        dt = tree_distance(x, y)
        dx = target.dist(f(x), f(y))
        if dx == 0:
            if strict:
                raise CollapsedAncestorPair(f"f collapses ancestor pair ({x}, {y})")
            collapsed = True
            continue
        r = Fraction(dx) / dt if isinstance(dx, (int, Fraction)) else float(dx) / dt
        if lo is None or r < lo:
            lo = r
        if hi is None or r > hi:
            hi = r
    if count == 0:
        raise ValueError("no ancestor pairs supplied")
    if collapsed:
        return VerticalReport(0, math.inf, count)
    D = hi / lo if isinstance(hi, Fraction) and isinstance(lo, Fraction) \
        else float(hi) / float(lo)
    return VerticalReport(lo, D, count)


def bn_vertical_report(f, n, target, strict=True):
    """vertical_report over all strict ancestor pairs of B_n."""
    return vertical_report(f, sp_pairs(n), target, strict=strict)
