import itertools
import random

import pytest

from annulus import corpus, maps, moves, sparsity
from annulus.errors import (
    BadPartition,
    DiagonalDegenerate,
    LoopPivot,
    NotTriangle,
    UnclassifiedFace,
    WrongDegree,
)
from annulus.maps import Dart


def fig_d():
    """Degenerate triangle: two parallels a-b plus a winding loop at a."""
    edges = [("e0", "a", "b"), ("e1", "a", "b"), ("e2", "a", "a")]
    rot = {
        "a": [Dart("e2", -1), Dart("e0", 1), Dart("e1", 1), Dart("e2", 1)],
        "b": [Dart("e0", -1), Dart("e1", -1)],
    }
    faces, _ = maps._trace_faces(edges, rot)
    winners = []
    for f0 in range(len(faces)):
        for f1 in range(f0, len(faces)):
            g = maps.build_indexed(["a", "b"], edges, rot, (f0, f1))
            if sparsity.oracle_sparse(g, 1).tight:
                winners.append(g)
    assert len(winners) == 1
    return winners[0]


def fig_b():
    """Degenerate loop-quad: d = a-b plus winding loops at both vertices."""
    edges = [("e0", "a", "b"), ("e1", "a", "a"), ("e2", "b", "b")]
    rot = {
        "a": [Dart("e0", 1), Dart("e1", 1), Dart("e1", -1)],
        "b": [Dart("e2", 1), Dart("e0", -1), Dart("e2", -1)],
    }
    faces, _ = maps._trace_faces(edges, rot)
    winners = []
    for f0 in range(len(faces)):
        for f1 in range(f0, len(faces)):
            g = maps.build_indexed(["a", "b"], edges, rot, (f0, f1))
            if sparsity.oracle_sparse(g, 1).tight:
                winners.append(g)
    assert winners
    return winners[0]


def all_cellular(amap, degree):
    return [
        i
        for i in amap.cellular_faces()
        if amap.face(i).degree == degree
    ]


def tri_fixture():
    """Balanced tight map with triangles: two triangles sharing a diagonal."""
    edges = [
        ("e0", "v1", "v2"),
        ("e1", "v2", "v3"),
        ("e2", "v3", "v4"),
        ("e3", "v4", "v1"),
        ("e4", "v2", "v4"),
    ]
    rot = {
        "v1": [Dart("e0", 1), Dart("e3", -1)],
        "v2": [Dart("e0", -1), Dart("e4", 1), Dart("e1", 1)],
        "v3": [Dart("e1", -1), Dart("e2", 1)],
        "v4": [Dart("e4", -1), Dart("e3", 1), Dart("e2", -1)],
    }
    faces, _ = maps._trace_faces(edges, rot)
    outer = max(range(len(faces)), key=lambda i: faces[i].degree)
    return maps.build_indexed(["v1", "v2", "v3", "v4"], edges, rot, (outer, outer))


def test_classify_triangles():
    g = tri_fixture()
    for fi in all_cellular(g, 3):
        assert moves.classify_face(g, fi) == moves.NON_DEGENERATE
    d = fig_d()
    tri = all_cellular(d, 3)
    assert tri
    for fi in tri:
        assert moves.classify_face(d, fi) == moves.TRI_231_LOOP


def test_classify_quad_loop_a():
    b = fig_b()
    quads = all_cellular(b, 4)
    assert quads
    for fi in quads:
        assert moves.classify_face(b, fi) == moves.QUAD_231_LOOP_A


def test_classify_wrong_degree():
    k = maps.make_K()
    with pytest.raises(WrongDegree):
        moves.classify_face(k, 0)


def test_contract_K_has_no_triangle():
    k = maps.make_K()
    with pytest.raises(NotTriangle):
        moves.triangle_contract(k, 0, 0)


def test_triangle_contract_fig2a():
    g = tri_fixture()
    fi = all_cellular(g, 3)[0]
    out, rec = moves.triangle_contract(g, fi, 0)
    assert out.n_vertices == 3 and out.n_edges == 3
    assert maps.f_count_map(out) == 3
    assert sparsity.oracle_sparse(out, 2).tight


def test_triangle_contract_loop_pivot_rejected():
    d = fig_d()
    fi = all_cellular(d, 3)[0]
    walk = d.face(fi)
    loop_pos = next(
        i for i, dart in enumerate(walk.darts) if d.is_loop(dart.edge)
    )
    with pytest.raises(LoopPivot):
        moves.triangle_contract(d, fi, loop_pos)


def test_degenerate_triangle_contract_gives_M():
    d = fig_d()
    fi = all_cellular(d, 3)[0]
    walk = d.face(fi)
    pos = next(
        i for i, dart in enumerate(walk.darts) if not d.is_loop(dart.edge)
    )
    for dq in (1, 2):
        try:
            out, rec = moves.triangle_contract(d, fi, pos, (pos + dq) % 3)
        except BadPartition:
            continue
        assert maps.isomorphic(out, maps.make_M())
        assert sparsity.oracle_sparse(out, 1).tight


def test_quad_contract_fig_b_to_M():
    b = fig_b()
    fi = all_cellular(b, 4)[0]
    outs = 0
    for diag in (0, 1):
        for choice in itertools.product((0, 1), repeat=2):
            try:
                out, rec = moves.quad_contract(b, fi, diag, choice)
            except (DiagonalDegenerate, BadPartition):
                continue
            assert maps.isomorphic(out, maps.make_M())
            outs += 1
    assert outs >= 1


def test_roundtrip_triangle_contract_then_split():
    gs = [tri_fixture(), fig_d()]
    for g in gs:
        for fi in all_cellular(g, 3):
            for p in range(3):
                for dq in (1, 2):
                    try:
                        out, rec = moves.triangle_contract(g, fi, p, (p + dq) % 3)
                    except (LoopPivot, BadPartition):
                        continue
                    back = moves.triangle_split(out, rec)
                    assert maps.isomorphic(back, g), (fi, p, dq, rec)


def test_roundtrip_quad_contract_then_split():
    b = fig_b()
    for fi in all_cellular(b, 4):
        for diag in (0, 1):
            for choice in itertools.product((0, 1), repeat=2):
                try:
                    out, rec = moves.quad_contract(b, fi, diag, choice)
                except (DiagonalDegenerate, BadPartition):
                    continue
                back = moves.quad_split(out, rec)
                assert maps.isomorphic(back, b), (fi, diag, choice)


def test_split_K_and_contract_back():
    k = maps.make_K()
    # split vertex a: arc empty, triangle leaning on the single edge
    rec = moves.TriangleSplit(
        target="a",
        new_vertex="c",
        pivot_edge="p0",
        restore_edge="g0",
        arc=(),
        corner="rest_after",
        insert_after=Dart("e0", 1),
    )
    out = moves.triangle_split(k, rec)
    assert out.n_vertices == 3 and out.n_edges == 3
    assert sparsity.oracle_sparse(out, 2).tight
    tri = [i for i in out.cellular_faces() if out.face(i).degree == 3]
    assert tri
    # contracting the new triangle along the pivot recovers K
    found = False
    for fi in tri:
        walk = out.face(fi)
        for p, dart in enumerate(walk.darts):
            if dart.edge != "p0":
                continue
            for dq in (1, 2):
                try:
                    back, _ = moves.triangle_contract(out, fi, p, (p + dq) % 3)
                except BadPartition:
                    continue
                if maps.isomorphic(back, k):
                    found = True
    assert found


def test_split_M_across_loop_quad():
    m = maps.make_M()
    rec = moves.QuadSplit(
        target="a",
        new_vertex="b",
        edge_a="g0",
        corner_a="rest_after",
        edge_b="g1",
        corner_b="arc_first",
        arc=(Dart("e0", -1),),
        insert_after=None,
    )
    out = moves.quad_split(m, rec)
    assert out.n_vertices == 2 and out.n_edges == 3
    assert sparsity.oracle_sparse(out, 1).tight
    assert maps.isomorphic(out, fig_b())


def test_split_bad_partition_non_contiguous():
    g = tri_fixture()
    rot = g.rotation["v2"]
    rec = moves.TriangleSplit(
        target="v2",
        new_vertex="x",
        pivot_edge="p0",
        restore_edge="g0",
        arc=(rot[0], rot[2]),
        corner="rest_after",
        insert_after=None,
    )
    with pytest.raises(BadPartition):
        moves.triangle_split(g, rec)


def test_split_same_restore_edges_rejected():
    m = maps.make_M()
    rec = moves.QuadSplit(
        target="a",
        new_vertex="b",
        edge_a="g0",
        corner_a="rest_after",
        edge_b="g0",
        corner_b="arc_first",
        arc=(Dart("e0", -1),),
    )
    with pytest.raises(BadPartition):
        moves.quad_split(m, rec)


def test_splits_preserve_f():
    m = maps.make_M()
    rec = moves.QuadSplit(
        target="a",
        new_vertex="b",
        edge_a="g0",
        corner_a="rest_after",
        edge_b="g1",
        corner_b="arc_first",
        arc=(Dart("e0", -1),),
    )
    out = moves.quad_split(m, rec)
    assert maps.f_count_map(out) == maps.f_count_map(m)


def test_classify_232_never_l1_tags():
    rng = random.Random(5150)
    seen = 0
    for _ in range(500):
        amap = corpus.random_connected_map(rng, max_edges=8)
        if not sparsity.check_sparse(amap, 2).sparse:
            continue
        for fi in amap.cellular_faces():
            if amap.face(fi).degree in (3, 4):
                try:
                    tag = moves.classify_face(amap, fi)
                except UnclassifiedFace:
                    continue
                assert tag in (moves.NON_DEGENERATE, moves.QUAD_232_VERTEX_REPEAT)
                seen += 1
    assert seen > 10
