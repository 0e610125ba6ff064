import itertools
import random

import pytest

from annulus import maps
from annulus.errors import (
    BadRotation,
    NotConnected,
    NotGenusZero,
    UnknownEndFace,
)
from annulus.maps import Dart


def fig2a():
    """Two triangles sharing a diagonal, outer face holds both ends."""
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
    faces, face_of = maps._trace_faces(edges, rot)
    outer = max(range(len(faces)), key=lambda i: faces[i].degree)
    return maps.build_indexed(
        ["v1", "v2", "v3", "v4"], edges, rot, (outer, outer)
    )


def test_K_basic():
    k = maps.make_K()
    assert k.n_vertices == 2 and k.n_edges == 1
    assert len(k.faces_list) == 1
    assert k.faces_list[0].degree == 2
    assert maps.is_balanced_map(k)
    assert maps.f_count_map(k) == 3
    assert maps.euler_check(k)


def test_L_basic():
    l = maps.make_L()
    assert [w.degree for w in l.faces_list] == [2, 2]
    assert not maps.is_balanced_map(l)
    assert maps.f_count_map(l) == 2
    assert maps.euler_check(l)
    gains = sorted(abs(g) for g in l.gains.edge_gain.values())
    assert gains == [0, 1]


def test_M_basic():
    m = maps.make_M()
    assert [w.degree for w in m.faces_list] == [1, 1]
    assert not maps.is_balanced_map(m)
    assert maps.f_count_map(m) == 1
    assert maps.euler_check(m)
    assert abs(m.gains.edge_gain["e0"]) == 1


def test_fig2a_faces():
    g = fig2a()
    assert sorted(w.degree for w in g.faces_list) == [3, 3, 4]
    assert maps.is_balanced_map(g)
    assert maps.f_count_map(g) == 3
    assert maps.euler_check(g)
    assert sum(w.degree for w in g.faces_list) == 2 * g.n_edges


def test_face_degree_sum_invariant():
    for g in (maps.make_K(), maps.make_L(), maps.make_M(), fig2a()):
        assert sum(w.degree for w in g.faces_list) == 2 * g.n_edges
        assert g.n_vertices - g.n_edges + len(g.faces_list) == 2


def test_f_count_subsets():
    g = fig2a()
    assert maps.f_count(g.subset([], ["v1"])) == 2
    assert maps.f_count(g.full_subset()) == 3
    k = maps.make_K()
    assert maps.f_count(k.full_subset()) == 3
    m = maps.make_M()
    assert maps.f_count(m.full_subset()) == 1


def test_balance_subsets():
    l = maps.make_L()
    assert not maps.is_balanced(l.full_subset())
    assert maps.is_balanced(l.subset(["e0"]))
    assert maps.is_balanced(l.subset(["e1"]))
    g = fig2a()
    assert maps.is_balanced(g.full_subset())


def test_balance_gain_vs_face_agreement_exhaustive():
    for g in (maps.make_K(), maps.make_L(), maps.make_M(), fig2a()):
        ids = [e[0] for e in g.edges]
        for r in range(len(ids) + 1):
            for combo in itertools.combinations(ids, r):
                sub = g.subset(combo)
                assert maps.is_balanced(sub) == maps.is_balanced_faces(sub)


def test_balance_hereditary():
    rng = random.Random(7)
    for g in (maps.make_L(), maps.make_M(), fig2a()):
        ids = [e[0] for e in g.edges]
        for _ in range(50):
            chosen = [e for e in ids if rng.random() < 0.7]
            sub = g.subset(chosen)
            if maps.is_balanced(sub):
                smaller = [e for e in chosen if rng.random() < 0.5]
                assert maps.is_balanced(g.subset(smaller))


def test_f_modularity():
    g = fig2a()
    ids = [e[0] for e in g.edges]
    rng = random.Random(3)
    for _ in range(100):
        b = g.subset([e for e in ids if rng.random() < 0.5])
        c = g.subset([e for e in ids if rng.random() < 0.5])
        assert maps.f_count(b.union(c)) + maps.f_count(b.intersection(c)) == maps.f_count(
            b
        ) + maps.f_count(c)


def test_isomorphic_relabel():
    l1 = maps.make_L()
    edges = [("x1", "q", "p"), ("x0", "q", "p")]
    rot = {
        "q": [Dart("x1", 1), Dart("x0", 1)],
        "p": [Dart("x1", -1), Dart("x0", -1)],
    }
    l2 = maps.build_indexed(["p", "q"], edges, rot, (0, 1))
    assert maps.isomorphic(l1, l2)


def test_isomorphic_K_vs_L():
    assert not maps.isomorphic(maps.make_K(), maps.make_L())


def test_isomorphic_M_gain_flip():
    m1 = maps.make_M()
    # same loop, opposite end designation order = orientation reversal
    edges = [("e0", "a", "a")]
    rot = {"a": [Dart("e0", 1), Dart("e0", -1)]}
    m2 = maps.build_indexed(["a"], edges, rot, (1, 0))
    assert maps.isomorphic(m1, m2)


def test_isomorphic_end_designation_matters():
    # L with both ends in one face is a different A-graph than L proper
    edges = [("e0", "a", "b"), ("e1", "a", "b")]
    rot = {
        "a": [Dart("e0", 1), Dart("e1", 1)],
        "b": [Dart("e0", -1), Dart("e1", -1)],
    }
    balanced_l = maps.build_indexed(["a", "b"], edges, rot, (0, 0))
    assert maps.is_balanced_map(balanced_l)
    assert not maps.isomorphic(balanced_l, maps.make_L())


def test_isomorphism_equivalence_relation():
    corpus = [maps.make_K(), maps.make_L(), maps.make_M(), fig2a()]
    for g in corpus:
        assert maps.isomorphic(g, g)
    for a, b in itertools.permutations(corpus, 2):
        assert maps.isomorphic(a, b) == maps.isomorphic(b, a)


def test_build_rejects_bad_rotation():
    edges = [("e0", "a", "b")]
    rot = {"a": [Dart("e0", 1), Dart("e0", 1)], "b": [Dart("e0", -1)]}
    with pytest.raises(BadRotation):
        maps.build(["a", "b"], edges, rot, [])


def test_build_rejects_disconnected():
    edges = [("e0", "a", "b")]
    rot = {"a": [Dart("e0", 1)], "b": [Dart("e0", -1)], "c": []}
    with pytest.raises((NotConnected, UnknownEndFace)):
        maps.build(["a", "b", "c"], edges, rot, [])


def test_build_rejects_genus():
    # two loops at one vertex interleaved = torus
    edges = [("e0", "a", "a"), ("e1", "a", "a")]
    rot = {"a": [Dart("e0", 1), Dart("e1", 1), Dart("e0", -1), Dart("e1", -1)]}
    with pytest.raises(NotGenusZero):
        maps.build_indexed(["a"], edges, rot, (0, 0))


def test_witness_corner_roundtrip():
    g = fig2a()
    for idx in range(len(g.faces_list)):
        c = maps.witness_corner(g, idx)
        rebuilt = maps.build(
            list(g.vertices),
            list(g.edges),
            {v: list(r) for v, r in g.rotation.items()},
            [c, c],
        )
        assert rebuilt.end_faces[0] == rebuilt.end_faces[1]


def test_isolated_vertex():
    g = maps.build(["a"], [], {"a": []}, [])
    assert g.n_vertices == 1 and g.n_edges == 0
    assert maps.is_balanced_map(g)


def test_normalized_gains_bounded():
    for g in (maps.make_K(), maps.make_L(), maps.make_M(), fig2a()):
        for gain in g.gains.edge_gain.values():
            assert gain in (-1, 0, 1)
        for e in g.gains.tree_edges:
            assert g.gains.edge_gain[e] == 0
