import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mconvex.errors import DepthExceeded, HypothesisViolated, PreconditionViolated
from mconvex.trees import (ROOT, EpsilonSequence, HTreeSpace, TreeVertex,
                           enumerate_bn, epsilon_from_growth, epsilon_violations,
                           heap_lca_depth, heap_lca_depth_block,
                           scaled_distance_matrix, sp_pairs,
                           tree_metric_equality_violations,
                           stitch_ancestor, stitch_descendant, stitch_horizontal,
                           tree_distance, validate_epsilon)

bits = st.lists(st.integers(0, 1), max_size=12).map(tuple)


@given(bits, bits)
def test_tree_distance_is_path_metric(a, b):
    x, y = TreeVertex(a), TreeVertex(b)
    l = x.lca(y)
    assert tree_distance(x, y) == (x.depth - l.depth) + (y.depth - l.depth)
    assert tree_distance(x, y) == tree_distance(y, x)
    assert (tree_distance(x, y) == 0) == (x == y)


@given(bits, bits)
def test_lca_is_common_ancestor(a, b):
    x, y = TreeVertex(a), TreeVertex(b)
    l = x.lca(y)
    assert l.is_ancestor_of(x) and l.is_ancestor_of(y)
    # no deeper common ancestor
    if l.depth < min(x.depth, y.depth):
        assert x.path[l.depth] != y.path[l.depth]


def test_vertex_basics():
    v = TreeVertex((1, 0, 1))
    assert v.depth == 3
    assert v.parent() == TreeVertex((1, 0))
    assert v.ancestor(0) == ROOT
    assert v.child(1) == TreeVertex((1, 0, 1, 1))
    assert v.descend((0, 0)) == TreeVertex((1, 0, 1, 0, 0))
    assert v.descend_zeros(2) == v.descend((0, 0))
    assert ROOT.is_ancestor_of(v) and not ROOT.is_strict_ancestor_of(ROOT)


def test_enumerate_bn_and_pairs():
    verts = enumerate_bn(3)
    assert len(verts) == 2 ** 4 - 1
    assert verts[0] == ROOT
    pairs = list(sp_pairs(3))
    # each depth-h vertex contributes h strict ancestors
    assert len(pairs) == sum(v.depth for v in verts)
    assert all(a.is_strict_ancestor_of(b) for a, b in pairs)


@given(st.integers(1, 500), st.integers(1, 500))
def test_heap_lca_depth_matches_paths(i, j):
    def to_vertex(h):
        path = []
        while h > 1:
            path.append(h & 1)
            h >>= 1
        return TreeVertex(tuple(reversed(path)))
    assert heap_lca_depth(i, j) == to_vertex(i).lca_depth(to_vertex(j))


def test_epsilon_validation():
    good = EpsilonSequence([Fraction(1, 4), Fraction(1, 5), Fraction(1, 6)])
    assert len(good) == 3
    # increasing eps violates monotonicity
    with pytest.raises(ValueError):
        EpsilonSequence([Fraction(1, 8), Fraction(1, 4)])
    # n * eps_n decreasing violates the growth condition
    bad = [Fraction(1, 2), Fraction(1, 2), Fraction(1, 8)]
    assert ("n_eps_decreasing", 2) in epsilon_violations(bad)
    # out of (0, 1]: validate_epsilon returns the violation list
    out = validate_epsilon([Fraction(0), Fraction(0)])
    assert not isinstance(out, EpsilonSequence) and out[0][0] == "nonpositive"
    assert EpsilonSequence([Fraction(1, 5)] * 4).classifier_ready
    assert not EpsilonSequence([Fraction(1, 2)] * 4).classifier_ready


def test_epsilon_from_growth():
    eps = epsilon_from_growth(lambda n: 5, 10)
    assert all(e == Fraction(1, 5) for e in eps.values[1:])
    with pytest.raises(HypothesisViolated):
        epsilon_from_growth(lambda n: 3, 4)   # s(n) >= 4 required
    with pytest.raises(HypothesisViolated):
        epsilon_from_growth(lambda n: 2 ** n + 4, 6)   # n/s(n) decreasing


def htree(eps_val, depth):
    return HTreeSpace(EpsilonSequence([eps_val] * (depth + 1)), depth)


def test_htree_distance_formula():
    sp = htree(Fraction(1, 5), 10)
    x = TreeVertex((0, 0, 1, 1))
    y = TreeVertex((0, 1, 0))
    # lca depth 1, min height 3, formula: |h(y)-h(x)| + 2 eps_3 (3 - 1)
    assert sp.distance(x, y) == 1 + 2 * Fraction(1, 5) * 2
    assert sp.distance(x, x) == 0
    assert sp.distance(x, y) == sp.distance(y, x)
    # ancestor pairs are pure height differences
    assert sp.distance(x, x.ancestor(1)) == 3


def test_htree_eps_one_is_tree_metric():
    sp = htree(Fraction(1), 8)
    rng = random.Random(0)
    for _ in range(300):
        x = TreeVertex(tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 8))))
        y = TreeVertex(tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 8))))
        assert sp.distance(x, y) == tree_distance(x, y)


def test_htree_depth_guard():
    sp = htree(Fraction(1, 5), 4)
    with pytest.raises(DepthExceeded):
        sp.distance(ROOT, TreeVertex((0,) * 5))


def test_htree_json_roundtrip():
    sp = htree(Fraction(1, 7), 6)
    back = HTreeSpace.from_json(sp.to_json())
    x, y = TreeVertex((0, 1, 1)), TreeVertex((1,))
    assert back.distance(x, y) == sp.distance(x, y)
    assert back.max_depth == sp.max_depth


def test_scaled_matrix_matches_distance():
    eps = EpsilonSequence([Fraction(1, 5)] * 7)
    mat, den = scaled_distance_matrix(eps, 6)
    sp = HTreeSpace(eps, 6)
    verts = enumerate_bn(6)
    rng = random.Random(1)
    for _ in range(200):
        i, j = rng.randrange(len(verts)), rng.randrange(len(verts))
        assert Fraction(int(mat[i][j]), den) == sp.distance(verts[i], verts[j])


def test_heap_lca_block_matches_scalar():
    import numpy as np
    rows = np.arange(1, 120)
    cols = np.arange(1, 260)
    blk = heap_lca_depth_block(rows, cols)
    rng = random.Random(3)
    for _ in range(400):
        a, b = rng.randrange(len(rows)), rng.randrange(len(cols))
        assert blk[a, b] == heap_lca_depth(int(rows[a]), int(cols[b]))


def test_tree_metric_equality_counts():
    one = EpsilonSequence([Fraction(1)] * 7)
    assert tree_metric_equality_violations(one, 6) == 0
    contracted = EpsilonSequence([Fraction(1, 5)] * 7)
    assert tree_metric_equality_violations(contracted, 6) > 0


def rand_vertex(rng, depth):
    return TreeVertex(tuple(rng.randint(0, 1) for _ in range(depth)))


@settings(deadline=None)
@given(st.integers(0, 10 ** 6))
def test_stitch_lemmas_randomized(seed):
    rng = random.Random(seed)
    sp = htree(Fraction(1, rng.choice([3, 5, 9])), 20)
    hx = rng.randint(2, 12)
    x = rand_vertex(rng, hx)
    x_prime = rand_vertex(rng, rng.randint(0, 12))
    off = rng.randint(0, min(x.depth, x_prime.depth))
    stitch_ancestor(x, x_prime, x.ancestor(x.depth - off),
                    x_prime.ancestor(x_prime.depth - off), sp)
    k = rng.randint(0, 5)
    y = x.descend(tuple(rng.randint(0, 1) for _ in range(k)))
    y_prime = x_prime.descend(tuple(rng.randint(0, 1) for _ in range(k)))
    stitch_descendant(x, x_prime, y, y_prime, sp)
    z = rand_vertex(rng, rng.randint(0, hx))
    try:
        stitch_horizontal(x, x_prime, z, sp)
    except (PreconditionViolated, DepthExceeded):
        pass  # near-root / max-depth corner cases are allowed to refuse


def test_stitch_ancestor_rejects_mismatched_offsets():
    sp = htree(Fraction(1, 5), 10)
    x = TreeVertex((0, 0, 1))
    with pytest.raises(PreconditionViolated):
        stitch_ancestor(x, x.ancestor(1), x, x.ancestor(2), sp)
