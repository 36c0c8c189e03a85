import random
from fractions import Fraction

import pytest

from mconvex.embeddings.classify import (b4_bound_check, classify_3path,
                                         classify_fork, classify_midpoint,
                                         path_scale_range)
from mconvex.embeddings.generators import (gen_3path, gen_fork, gen_midpoint,
                                           make_space)
from mconvex.embeddings.search import generate_faithful_b4
from mconvex.errors import NotApproximatePath, PreconditionViolated
from mconvex.trees import ROOT, TreeVertex


def test_midpoint_path_shape():
    sp = make_space(Fraction(1, 128))
    x = TreeVertex((0,) * 12)
    y = x.ancestor(6)
    out = classify_midpoint(sp, x, y, ROOT, Fraction(1, 32))
    assert out.variant in ("PathType", "ReversePathType")
    # witness triple realizes the claimed nearness within budget
    assert out.nearness <= 3 * Fraction(1, 32) * sp.distance(x, ROOT)


def test_midpoint_tent_shape():
    sp = make_space(Fraction(1, 512))
    apex = TreeVertex((1, 0, 1))
    y = apex.descend((0, 0, 0, 0))
    z = TreeVertex((1, 0, 0) + (1,) * 8)
    out = classify_midpoint(sp, apex, y, z, Fraction(1, 32))
    assert out.variant in ("TentType", "ReverseTentType")


def test_midpoint_rejects_large_delta():
    sp = make_space(Fraction(1, 128))
    with pytest.raises(PreconditionViolated):
        classify_midpoint(sp, TreeVertex((0, 0)), TreeVertex((0,)), ROOT,
                          Fraction(1, 8))


def test_midpoint_rejects_non_midpoint():
    sp = make_space(Fraction(1, 128))
    # y far from the midpoint of (x, z)
    x = TreeVertex((0,) * 12)
    with pytest.raises(PreconditionViolated):
        classify_midpoint(sp, x, x.ancestor(1), ROOT, Fraction(1, 32))


def test_midpoint_rejects_wide_epsilon():
    sp = make_space(Fraction(1, 3))  # eps >= 1/4: classifier hypotheses fail
    x = TreeVertex((0,) * 12)
    with pytest.raises(PreconditionViolated):
        classify_midpoint(sp, x, x.ancestor(6), ROOT, Fraction(1, 32))


def test_fork_contracted_prongs():
    sp = make_space(Fraction(1, 2048))
    delta = Fraction(1, 128)
    x = ROOT
    y = TreeVertex((0,) * 6)
    z = y.descend((0,) + (1,) * 5)
    w = y.descend((1,) + (0,) * 5)
    out = classify_fork(sp, x, y, z, w, delta)
    assert out.variant == "ProngsContracted"
    bound = 2 * (35 * delta + sp.eps[0]) * sp.distance(x, y) * 2
    assert sp.distance(z, w) <= bound


def test_fork_soundness_randomized():
    rng = random.Random(0)
    delta = Fraction(1, 128)
    for _ in range(150):
        sp, x, y, z, w = gen_fork(rng, delta)
        out = classify_fork(sp, x, y, z, w, delta)
        assert out.variant != "Unclassified"


def test_midpoint_soundness_randomized():
    rng = random.Random(1)
    delta = Fraction(1, 32)
    for _ in range(150):
        sp, x, y, z = gen_midpoint(rng, delta)
        out = classify_midpoint(sp, x, y, z, delta)
        assert out.variant != "Unclassified"
        # the certified witness stays within the 3*delta*d(x,z) budget
        assert out.nearness <= 3 * delta * sp.distance(x, z)


def test_3path_soundness_randomized():
    rng = random.Random(2)
    delta = Fraction(1, 256)
    for _ in range(150):
        sp, *pts = gen_3path(rng, delta)
        out = classify_3path(sp, *pts, delta)
        assert out.variant != "Unclassified"


def test_3path_rejects_non_path():
    sp = make_space(Fraction(1, 2048))
    pts = [ROOT, TreeVertex((0,)), TreeVertex((1,)), TreeVertex((0, 0))]
    with pytest.raises(NotApproximatePath):
        path_scale_range(sp, pts, Fraction(1, 256))
    with pytest.raises(NotApproximatePath):
        classify_3path(sp, *pts, Fraction(1, 256))


def test_3path_vertical_line_is_type_a():
    sp = make_space(Fraction(1, 2048))
    line = TreeVertex((0, 1) * 9)
    pts = [line, line.ancestor(12), line.ancestor(6), line.ancestor(0)]
    out = classify_3path(sp, *pts, Fraction(1, 256))
    assert out.variant in ("A", "ReverseA")


def test_b4_bound_check_faithful_embedding():
    sp = make_space(Fraction(1, 5), depth=60)
    rng = random.Random(4)
    f = generate_faithful_b4(sp, rng, collide_prob=0.0)
    dist, bound, holds = b4_bound_check(sp, lambda v: f[v], Fraction(1, 512))
    assert holds
    assert bound == 1 / (500 * Fraction(1, 512) + Fraction(1, 5))


def test_b4_bound_check_rejects_unfaithful():
    sp = make_space(Fraction(1, 5), depth=60)
    # heavily warped: one branch stretched 8x, the other 1x
    def f(v):
        bits = sum(((b,) * (8 if b else 1) for b in v.path), ())
        return TreeVertex(bits)
    with pytest.raises(PreconditionViolated):
        b4_bound_check(sp, f, Fraction(1, 512))
