"""Combinatorial maps on the annulus.

An AnnulusMap is a connected multigraph with a rotation system (counterclockwise
dart order at each vertex) plus two designated "end faces": the faces of the
genus-zero embedding that contain the two topological ends of the annulus.
Integer edge gains (winding numbers about the annulus core) are derived from a
dual path between the two end faces and then normalized along a breadth-first
spanning tree, so tree edges carry gain zero and only cycle gains are
meaningful.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .errors import (
    BadRotation,
    InputError,
    NotConnected,
    NotGenusZero,
    UnknownEndFace,
)


class Dart(NamedTuple):
    """One of the two directed sides of an edge; sign +1 leaves the tail."""

    edge: str
    sign: int

    def rev(self) -> "Dart":
        return Dart(self.edge, -self.sign)

    def __str__(self) -> str:
        return self.edge + ("+" if self.sign > 0 else "-")


def parse_dart(text: str) -> Dart:
    if not text or text[-1] not in "+-−":
        raise InputError(f"bad dart string {text!r}")
    return Dart(text[:-1], 1 if text[-1] == "+" else -1)


class Corner(NamedTuple):
    """A face corner: arrive at `vertex` along `into`, leave along `out`."""

    vertex: str
    into: Dart
    out: Dart


@dataclass(frozen=True)
class FaceWalk:
    darts: tuple[Dart, ...]

    @property
    def degree(self) -> int:
        return len(self.darts)

    def corners(self, amap: "AnnulusMap") -> list[Corner]:
        k = len(self.darts)
        return [
            Corner(amap.head(self.darts[i]), self.darts[i], self.darts[(i + 1) % k])
            for i in range(k)
        ]

    def vertices(self, amap: "AnnulusMap") -> list[str]:
        return [amap.head(d) for d in self.darts]

    def edges(self) -> list[str]:
        return [d.edge for d in self.darts]

    def is_degenerate(self, amap: "AnnulusMap") -> bool:
        vs = self.vertices(amap)
        es = self.edges()
        return len(set(vs)) < len(vs) or len(set(es)) < len(es)

    def key(self) -> tuple[Dart, ...]:
        k = len(self.darts)
        rots = [self.darts[i:] + self.darts[:i] for i in range(k)]
        return min(rots)


@dataclass(frozen=True)
class EdgeSubset:
    """A subgraph selector: edge ids plus optional isolated vertices."""

    parent: "AnnulusMap"
    members: frozenset[str]
    extra_vertices: frozenset[str] = frozenset()

    def __post_init__(self):
        unknown = self.members - set(self.parent._edge_index)
        if unknown:
            raise InputError(f"subset references unknown edges {sorted(unknown)}")
        unknown_v = self.extra_vertices - set(self.parent.vertices)
        if unknown_v:
            raise InputError(f"subset references unknown vertices {sorted(unknown_v)}")

    def spanned_vertices(self) -> frozenset[str]:
        verts = set(self.extra_vertices)
        for e in self.members:
            t, h = self.parent.endpoints(e)
            verts.add(t)
            verts.add(h)
        return frozenset(verts)

    def union(self, other: "EdgeSubset") -> "EdgeSubset":
        return EdgeSubset(
            self.parent,
            self.members | other.members,
            self.spanned_vertices() | other.spanned_vertices(),
        )

    def intersection(self, other: "EdgeSubset") -> "EdgeSubset":
        return EdgeSubset(
            self.parent,
            self.members & other.members,
            self.spanned_vertices() & other.spanned_vertices(),
        )


@dataclass(frozen=True)
class GainView:
    """Tree-normalized gains: spanning-tree edges carry 0."""

    tree_edges: frozenset[str]
    edge_gain: dict[str, int]

    def dart_gain(self, d: Dart) -> int:
        return self.edge_gain[d.edge] * d.sign

    def walk_gain(self, darts: Iterable[Dart]) -> int:
        return sum(self.dart_gain(d) for d in darts)


class AnnulusMap:
    """Immutable after construction; use `build` rather than the constructor."""

    def __init__(
        self,
        vertices: Sequence[str],
        edges: Sequence[tuple[str, str, str]],
        rotation: dict[str, Sequence[Dart]],
        end_faces: tuple[int, int],
        faces: list[FaceWalk],
        face_of: dict[Dart, int],
    ):
        self.vertices: tuple[str, ...] = tuple(vertices)
        self.edges: tuple[tuple[str, str, str], ...] = tuple(edges)
        self._edge_index = {e[0]: (e[1], e[2]) for e in self.edges}
        self.rotation: dict[str, tuple[Dart, ...]] = {
            v: tuple(rotation[v]) for v in self.vertices
        }
        self.faces_list = faces
        self.face_of = face_of
        self.end_faces: tuple[int, int] = end_faces
        self._succ = {}
        for v in self.vertices:
            rot = self.rotation[v]
            for i, d in enumerate(rot):
                self._succ[d] = rot[(i + 1) % len(rot)]
        self._raw_gain: dict[str, int] = {}
        self._gain_view: Optional[GainView] = None
        self._derive_gains()
        self._canon: Optional[tuple] = None

    # -- basic accessors ---------------------------------------------------
    def endpoints(self, edge: str) -> tuple[str, str]:
        return self._edge_index[edge]

    def base(self, d: Dart) -> str:
        t, h = self._edge_index[d.edge]
        return t if d.sign > 0 else h

    def head(self, d: Dart) -> str:
        t, h = self._edge_index[d.edge]
        return h if d.sign > 0 else t

    def is_loop(self, edge: str) -> bool:
        t, h = self._edge_index[edge]
        return t == h

    def darts(self) -> list[Dart]:
        return [Dart(e, s) for e, _, _ in self.edges for s in (1, -1)]

    def next_in_face(self, d: Dart) -> Dart:
        return self._succ[d.rev()]

    def rot_succ(self, d: Dart) -> Dart:
        return self._succ[d]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: str) -> int:
        return len(self.rotation[v])

    def face(self, idx: int) -> FaceWalk:
        return self.faces_list[idx]

    def is_end_face(self, idx: int) -> bool:
        return idx in self.end_faces

    def cellular_faces(self) -> list[int]:
        return [i for i in range(len(self.faces_list)) if i not in self.end_faces]

    def full_subset(self) -> EdgeSubset:
        return EdgeSubset(self, frozenset(self._edge_index), frozenset(self.vertices))

    def subset(self, edges: Iterable[str], extra: Iterable[str] = ()) -> EdgeSubset:
        return EdgeSubset(self, frozenset(edges), frozenset(extra))

    # -- gains ---------------------------------------------------------------
    def _derive_gains(self) -> None:
        if not self.edges:
            self._gain_view = GainView(frozenset(), {})
            return
        f0, f1 = self.end_faces
        raw = {e[0]: 0 for e in self.edges}
        if f0 != f1:
            adj: dict[int, list[tuple[int, str, int]]] = {}
            for e, _, _ in self.edges:
                a = self.face_of[Dart(e, 1)]
                b = self.face_of[Dart(e, -1)]
                if a != b:
                    adj.setdefault(a, []).append((b, e, -1))
                    adj.setdefault(b, []).append((a, e, 1))
            prev: dict[int, tuple[int, str, int]] = {f0: (f0, "", 0)}
            q = deque([f0])
            while q:
                cur = q.popleft()
                if cur == f1:
                    break
                for nxt, e, s in sorted(adj.get(cur, [])):
                    if nxt not in prev:
                        prev[nxt] = (cur, e, s)
                        q.append(nxt)
            if f1 not in prev:
                raise NotGenusZero("end faces not connected in the dual graph")
            cur = f1
            while cur != f0:
                p, e, s = prev[cur]
                raw[e] += s
                cur = p
        self._raw_gain = raw
        # Normalize with a BFS spanning tree rooted at the smallest vertex id.
        theta = {min(self.vertices): 0}
        tree: set[str] = set()
        q = deque([min(self.vertices)])
        order: dict[str, list[Dart]] = {v: [] for v in self.vertices}
        for v in self.vertices:
            order[v] = sorted(self.rotation[v], key=lambda d: (d.edge, -d.sign))
        while q:
            v = q.popleft()
            for d in order[v]:
                w = self.head(d)
                if w not in theta:
                    theta[w] = theta[v] + raw[d.edge] * d.sign
                    tree.add(d.edge)
                    q.append(w)
        gains = {}
        for e, t, h in self.edges:
            gains[e] = raw[e] + theta[t] - theta[h]
        self._gain_view = GainView(frozenset(tree), gains)

    @property
    def gains(self) -> GainView:
        assert self._gain_view is not None
        return self._gain_view

    def canonical_key(self) -> tuple:
        if self._canon is None:
            self._canon = _canonical_key(self)
        return self._canon


# --------------------------------------------------------------------------
# construction


def _validate_structure(vertices, edges, rotation):
    """Shared validation; returns (faces, face_of) of the traced embedding."""
    vertices = list(vertices)
    if len(set(vertices)) != len(vertices):
        raise InputError("duplicate vertex ids")
    ids = [e[0] for e in edges]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate edge ids")
    vset = set(vertices)
    for e, t, h in edges:
        if t not in vset or h not in vset:
            raise InputError(f"edge {e} references unknown vertex")

    # rotation sanity: darts at v are exactly the incident darts, once each
    incident: dict[str, list[Dart]] = {v: [] for v in vertices}
    for e, t, h in edges:
        incident[t].append(Dart(e, 1))
        incident[h].append(Dart(e, -1))
    for v in vertices:
        rot = list(rotation.get(v, ()))
        if sorted(rot) != sorted(incident[v]):
            raise BadRotation(f"rotation at {v} does not list incident darts exactly once")

    # connectivity
    adj: dict[str, set[str]] = {v: set() for v in vertices}
    for e, t, h in edges:
        adj[t].add(h)
        adj[h].add(t)
    seen = {vertices[0]}
    q = deque([vertices[0]])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                q.append(w)
    if len(seen) != len(vertices):
        raise NotConnected("underlying graph is not connected")

    faces, face_of = _trace_faces(edges, rotation)
    euler = len(vertices) - len(ids) + len(faces)
    if euler != 2:
        raise NotGenusZero(f"V-E+F = {euler}, expected 2")
    return faces, face_of


def build(
    vertices: Sequence[str],
    edges: Sequence[tuple[str, str, str]],
    rotation: dict[str, Sequence[Dart]],
    end_faces,
) -> AnnulusMap:
    """Validate and index an annulus map.

    `end_faces` is a pair of witness corners (vertex, in-dart, out-dart); for
    the single-isolated-vertex map it must be an empty sequence.
    """
    vertices = list(vertices)
    if not edges:
        if len(vertices) != 1:
            raise NotConnected("an edgeless map must be a single isolated vertex")
        if list(end_faces):
            raise UnknownEndFace("isolated vertex has no witness corners")
        v = vertices[0]
        if rotation.get(v):
            raise BadRotation("isolated vertex has no darts")
        return AnnulusMap(vertices, [], {v: ()}, (0, 0), [FaceWalk(())], {})

    faces, face_of = _validate_structure(vertices, edges, rotation)

    ends = list(end_faces)
    if len(ends) != 2:
        raise UnknownEndFace("exactly two end-face witnesses required")
    end_idx = []
    succ = {}
    for v in vertices:
        rot = list(rotation[v])
        for i, d in enumerate(rot):
            succ[d] = rot[(i + 1) % len(rot)]
    emap = {e: (t, h) for e, t, h in edges}
    for corner in ends:
        v, din, dout = corner
        if din not in face_of or dout not in face_of:
            raise UnknownEndFace(f"witness corner {corner} references unknown darts")
        t, h = emap[din.edge]
        headv = h if din.sign > 0 else t
        if headv != v:
            raise UnknownEndFace(f"witness corner {corner}: in-dart does not arrive at {v}")
        if succ[din.rev()] != dout:
            raise UnknownEndFace(f"witness corner {corner} is not a face corner")
        end_idx.append(face_of[dout])
    return AnnulusMap(vertices, edges, rotation, (end_idx[0], end_idx[1]), faces, face_of)


def build_indexed(vertices, edges, rotation, end_pair) -> AnnulusMap:
    """Internal builder taking end faces as indices into the traced face list."""
    if not edges:
        return build(vertices, edges, rotation, [])
    faces, face_of = _validate_structure(list(vertices), edges, rotation)
    f0, f1 = end_pair
    if not (0 <= f0 < len(faces) and 0 <= f1 < len(faces)):
        raise UnknownEndFace(f"end indices {end_pair} out of range")
    return AnnulusMap(list(vertices), edges, rotation, (f0, f1), faces, face_of)


def _trace_faces(edges, rotation):
    succ = {}
    for v, rot in rotation.items():
        rot = list(rot)
        for i, d in enumerate(rot):
            succ[d] = rot[(i + 1) % len(rot)]
    all_darts = [Dart(e, s) for e, _, _ in edges for s in (1, -1)]
    face_of: dict[Dart, int] = {}
    faces: list[FaceWalk] = []
    for d0 in all_darts:
        if d0 in face_of:
            continue
        walk = []
        d = d0
        while True:
            walk.append(d)
            face_of[d] = len(faces)
            d = succ[d.rev()]
            if d == d0:
                break
            if d in face_of:
                raise BadRotation("face tracing revisited a dart; rotation is inconsistent")
        faces.append(FaceWalk(tuple(walk)))
    return faces, face_of


def witness_corner(amap: AnnulusMap, face_idx: int) -> Optional[Corner]:
    """A canonical witness corner for a face (None for the edgeless map)."""
    walk = amap.faces_list[face_idx]
    if not walk.darts:
        return None
    k = walk.key()
    din = k[0]
    dout = amap.next_in_face(din)
    return Corner(amap.head(din), din, dout)


# --------------------------------------------------------------------------
# canonical bases


def make_K() -> AnnulusMap:
    """Two vertices joined by one edge; both ends in the unique face."""
    edges = [("e0", "a", "b")]
    rot = {"a": [Dart("e0", 1)], "b": [Dart("e0", -1)]}
    return build_indexed(["a", "b"], edges, rot, (0, 0))


def make_L() -> AnnulusMap:
    """Two parallel edges on opposite sides of the core; the unbalanced 2-vertex base."""
    edges = [("e0", "a", "b"), ("e1", "a", "b")]
    rot = {
        "a": [Dart("e0", 1), Dart("e1", 1)],
        "b": [Dart("e0", -1), Dart("e1", -1)],
    }
    return build_indexed(["a", "b"], edges, rot, (0, 1))


def make_M() -> AnnulusMap:
    """One vertex with a loop winding the annulus; the (2,3,1) unbalanced base."""
    edges = [("e0", "a", "a")]
    rot = {"a": [Dart("e0", 1), Dart("e0", -1)]}
    return build_indexed(["a"], edges, rot, (0, 1))


def make_base(tag: str) -> AnnulusMap:
    try:
        return {"K": make_K, "L": make_L, "M": make_M}[tag]()
    except KeyError:
        raise InputError(f"unknown base tag {tag!r}") from None


# --------------------------------------------------------------------------
# queries


def faces(amap: AnnulusMap) -> list[FaceWalk]:
    return list(amap.faces_list)


def f_count(subset: EdgeSubset) -> int:
    return 2 * len(subset.spanned_vertices()) - len(subset.members)


def f_count_map(amap: AnnulusMap) -> int:
    return 2 * amap.n_vertices - amap.n_edges


def is_balanced(subset: EdgeSubset) -> bool:
    """True iff every cycle of the subset has gain zero."""
    amap = subset.parent
    gains = amap.gains
    comp: dict[str, str] = {}
    theta: dict[str, int] = {}

    verts = subset.spanned_vertices()
    for v in verts:
        comp[v] = v
        theta[v] = 0

    # incremental union with potentials: theta[v] = gain from component root
    def root_gain(v):
        g = 0
        while comp[v] != v:
            g += theta[v]
            v = comp[v]
        return v, g

    for e in sorted(subset.members):
        t, h = amap.endpoints(e)
        g = gains.edge_gain[e]
        rt, gt = root_gain(t)
        rh, gh = root_gain(h)
        if rt == rh:
            if gt + g != gh:
                return False
        else:
            comp[rt] = rh
            theta[rt] = gh - g - gt
    return True


def is_balanced_map(amap: AnnulusMap) -> bool:
    if not amap.edges:
        return True
    return amap.end_faces[0] == amap.end_faces[1]


def is_balanced_faces(subset: EdgeSubset) -> bool:
    """Face-containment balance test: merge parent faces across removed edges."""
    amap = subset.parent
    if not amap.edges:
        return True
    n = len(amap.faces_list)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e, _, _ in amap.edges:
        if e not in subset.members:
            a = find(amap.face_of[Dart(e, 1)])
            b = find(amap.face_of[Dart(e, -1)])
            parent[a] = b
    return find(amap.end_faces[0]) == find(amap.end_faces[1])


def euler_check(amap: AnnulusMap) -> bool:
    """3*f1 + 2*f2 + f3 == 8 - 2*f(G) + sum_{i>=5} (i-4)*f_i for connected maps."""
    if not amap.edges:
        raise InputError("euler_check requires at least one edge")
    counts: dict[int, int] = {}
    for w in amap.faces_list:
        counts[w.degree] = counts.get(w.degree, 0) + 1
    lhs = 3 * counts.get(1, 0) + 2 * counts.get(2, 0) + counts.get(3, 0)
    rhs = 8 - 2 * f_count_map(amap) + sum(
        (i - 4) * c for i, c in counts.items() if i >= 5
    )
    return lhs == rhs


# --------------------------------------------------------------------------
# isomorphism


def _extend_iso(a: AnnulusMap, b: AnnulusMap, d0: Dart, d1: Dart, eta: int):
    """Try to extend d0 -> d1 to a dart bijection commuting with rev and rot^eta."""
    phi = {d0: d1}
    q = deque([d0])
    while q:
        d = q.popleft()
        img = phi[d]
        pairs = [(d.rev(), img.rev())]
        nxt = a.rot_succ(d)
        r = b.rotation[b.base(img)]
        i = r.index(img)
        img_n = r[(i + eta) % len(r)]
        pairs.append((nxt, img_n))
        for x, y in pairs:
            if x in phi:
                if phi[x] != y:
                    return None
            else:
                phi[x] = y
                q.append(x)
    if len(phi) != 2 * a.n_edges:
        return None
    if len(set(phi.values())) != len(phi):
        return None
    # vertex consistency: base classes must match
    vmap: dict[str, str] = {}
    for d, img in phi.items():
        v = a.base(d)
        w = b.base(img)
        if vmap.setdefault(v, w) != w:
            return None
    if len(set(vmap.values())) != len(vmap):
        return None
    # edge pairs must map to edge pairs (rev-commuting ensures it); check edges distinct
    emap: dict[str, str] = {}
    for d, img in phi.items():
        if emap.setdefault(d.edge, img.edge) != img.edge:
            return None
    return phi


def find_isomorphism(a: AnnulusMap, b: AnnulusMap, orientation_preserving=False):
    """Dart bijection realizing `isomorphic`, or None.

    Returns (vertex_map, edge_map, dart_map) from a to b when an isomorphism
    exists (up to global orientation reversal unless `orientation_preserving`,
    end swap, and edge flips).
    """
    if a.n_vertices != b.n_vertices or a.n_edges != b.n_edges:
        return None
    if a.n_edges == 0:
        return {a.vertices[0]: b.vertices[0]}, {}, {}
    if sorted(w.degree for w in a.faces_list) != sorted(w.degree for w in b.faces_list):
        return None
    d0 = Dart(a.edges[0][0], 1)
    etas = (1,) if orientation_preserving else (1, -1)
    for eta in etas:
        for d1 in b.darts():
            phi = _extend_iso(a, b, d0, d1, eta)
            if phi is None:
                continue
            img_ends = set()
            ok = True
            for fi in a.end_faces:
                ds = a.faces_list[fi].darts
                imgs = {b.face_of[phi[d]] for d in ds}
                if len(imgs) != 1:
                    ok = False
                    break
                img_ends.add(imgs.pop())
            if not ok:
                continue
            if a.end_faces[0] == a.end_faces[1]:
                if b.end_faces[0] != b.end_faces[1]:
                    continue
                if img_ends != {b.end_faces[0]}:
                    continue
            else:
                if img_ends != set(b.end_faces) or b.end_faces[0] == b.end_faces[1]:
                    continue
            vmap = {a.base(d): b.base(img) for d, img in phi.items()}
            emap = {d.edge: img.edge for d, img in phi.items()}
            return vmap, emap, dict(phi)
    return None


def isomorphic(a: AnnulusMap, b: AnnulusMap) -> bool:
    """Map isomorphism up to global orientation reversal, end swap and edge flips."""
    return find_isomorphism(a, b) is not None


def _canonical_key(amap: AnnulusMap) -> tuple:
    """Canonical invariant under the same equivalence as `isomorphic`."""
    if amap.n_edges == 0:
        return ("point",)
    best = None
    darts = amap.darts()
    for d0 in darts:
        for eta in (1, -1):
            code = _bfs_code(amap, d0, eta)
            if best is None or code < best:
                best = code
    return best


def _bfs_code(amap: AnnulusMap, d0: Dart, eta: int) -> tuple:
    number: dict[Dart, int] = {d0: 0}
    order = [d0]
    q = deque([d0])
    while q:
        d = q.popleft()
        for nxt in (d.rev(), _rot_step(amap, d, eta)):
            if nxt not in number:
                number[nxt] = len(order)
                order.append(nxt)
                q.append(nxt)
    rev_code = tuple(number[d.rev()] for d in order)
    rot_code = tuple(number[_rot_step(amap, d, eta)] for d in order)
    ends = tuple(
        sorted(
            min(number[d] for d in amap.faces_list[fi].darts) for fi in amap.end_faces
        )
    )
    return (rev_code, rot_code, ends)


def _rot_step(amap: AnnulusMap, d: Dart, eta: int) -> Dart:
    r = amap.rotation[amap.base(d)]
    i = r.index(d)
    return r[(i + eta) % len(r)]
