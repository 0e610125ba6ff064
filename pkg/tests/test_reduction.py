import random

import pytest

from annulus import maps, moves, reduction, sparsity
from annulus.errors import InputError, NotTight
from annulus.maps import Dart
from annulus.moves import QuadSplit, TriangleSplit


def test_decompose_bases_trivial():
    for tag, level in (("K", 2), ("K", 1), ("L", 2), ("M", 1)):
        g = maps.make_base(tag)
        seq = reduction.decompose(g, level)
        assert seq.base == tag
        assert seq.steps == ()


def test_decompose_requires_tight():
    l = maps.make_L()
    with pytest.raises(NotTight):
        reduction.decompose(l, 1)


def test_rebuild_base_only():
    seq = reduction.ConstructionSequence(base="K", level=2, steps=())
    assert maps.isomorphic(reduction.rebuild(seq), maps.make_K())


def test_generate_small():
    assert maps.isomorphic(
        reduction.generate_random_tight(1, 1, 5), maps.make_M()
    )
    g = reduction.generate_random_tight(2, 2, 7)
    assert maps.isomorphic(g, maps.make_K()) or maps.isomorphic(g, maps.make_L())


def test_generate_deterministic():
    a = reduction.generate_random_tight(2, 6, 42)
    b = reduction.generate_random_tight(2, 6, 42)
    assert maps.isomorphic(a, b)
    assert a.canonical_key() == b.canonical_key()


def test_generate_tight_and_f():
    for level in (1, 2):
        for seed in range(8):
            n = 3 + seed % 5
            if level == 2 and n < 2:
                continue
            g = reduction.generate_random_tight(level, n, seed)
            assert g.n_vertices == n
            v = sparsity.check_sparse(g, level)
            assert v.tight
            f = maps.f_count_map(g)
            assert f == level or (maps.is_balanced_map(g) and f == 3)


def test_decompose_rebuild_roundtrip():
    for level in (1, 2):
        for seed in range(12):
            n = 3 + (seed % 4)
            g = reduction.generate_random_tight(level, n, seed * 13 + level)
            seq = reduction.decompose(g, level)
            assert len(seq.steps) == g.n_vertices - maps.make_base(seq.base).n_vertices
            back = reduction.rebuild(seq)
            assert maps.isomorphic(back, g), (level, seed, seq)


def test_decompose_balanced_uses_triangles_only():
    for seed in range(6):
        g = reduction.generate_random_tight(2, 5, seed * 7 + 3)
        if not maps.is_balanced_map(g):
            continue
        seq = reduction.decompose(g, 2)
        assert seq.base == "K"
        assert all(isinstance(s, TriangleSplit) for s in seq.steps)


def test_decompose_unbalanced_base():
    seen = {"L": 0, "M": 0}
    for seed in range(10):
        for level in (1, 2):
            g = reduction.generate_random_tight(level, 4, seed * 31 + level)
            seq = reduction.decompose(g, level)
            if maps.is_balanced_map(g):
                assert seq.base == "K"
            else:
                assert seq.base == ("L" if level == 2 else "M")
                seen[seq.base] += 1
    assert seen["L"] > 0 and seen["M"] > 0


def test_sequence_validation():
    with pytest.raises(InputError):
        reduction.ConstructionSequence(base="L", level=1, steps=())
    with pytest.raises(InputError):
        reduction.ConstructionSequence(base="M", level=2, steps=())
    quad = QuadSplit(
        target="a",
        new_vertex="b",
        edge_a="x",
        corner_a="rest_after",
        edge_b="y",
        corner_b="rest_before",
        arc=(),
        insert_after=Dart("e0", 1),
    )
    with pytest.raises(InputError):
        reduction.ConstructionSequence(base="K", level=2, steps=(quad,))


def test_complete_tight_returns_unchanged():
    l = maps.make_L()
    out = reduction.complete_to_tight(l, 2)
    assert out is l


def test_complete_single_edge_to_L():
    edges = [("e0", "a", "b")]
    rot = {"a": [Dart("e0", 1)], "b": [Dart("e0", -1)]}
    g = maps.build_indexed(["a", "b"], edges, rot, (0, 0))
    out = reduction.complete_to_tight(g, 2)
    assert sparsity.check_sparse(out, 2).tight
    assert {e[0] for e in g.edges} <= {e[0] for e in out.edges}
    assert set(out.vertices) == set(g.vertices)


def test_complete_K_at_level_1():
    k = maps.make_K()
    out = reduction.complete_to_tight(k, 1)
    assert sparsity.check_sparse(out, 1).tight
    assert maps.f_count_map(out) == 1
    assert "e0" in {e[0] for e in out.edges}


def test_complete_isolated_vertex():
    g = maps.build(["a"], [], {"a": []}, [])
    for level in (1, 2):
        out = reduction.complete_to_tight(g, level)
        assert sparsity.check_sparse(out, level).tight


def test_complete_random_deletions():
    rng = random.Random(2024)
    for trial in range(10):
        level = 1 + trial % 2
        g = reduction.generate_random_tight(level, 4 + trial % 3, 100 + trial)
        ids = sorted(e[0] for e in g.edges)
        rng.shuffle(ids)
        removed = 0
        cur = g
        for e in ids:
            if removed >= 2:
                break
            trial_map = _delete_edge(cur, e)
            if trial_map is None:
                continue
            if sparsity.check_sparse(trial_map, level).sparse:
                cur = trial_map
                removed += 1
        if removed == 0:
            continue
        out = reduction.complete_to_tight(cur, level)
        assert sparsity.check_sparse(out, level).tight
        assert {e[0] for e in cur.edges} <= {e[0] for e in out.edges}
        assert set(out.vertices) == set(cur.vertices)


def _delete_edge(amap, eid):
    """Spanning edge deletion preserving connectivity, or None."""
    from annulus.moves import _Sheet

    sheet = _Sheet(amap)
    try:
        sheet.delete(eid)
        out = sheet.finish()
    except Exception:
        return None
    if set(out.vertices) != set(amap.vertices):
        return None
    return out


def test_reduce_step_on_fig_b_quad():
    from tests.test_moves import fig_b

    b = fig_b()
    out, rec = reduction.reduce_step(b, 1)
    assert maps.isomorphic(out, maps.make_M())
    assert isinstance(rec, QuadSplit)
