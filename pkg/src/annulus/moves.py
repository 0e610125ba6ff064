"""Triangle and quadrilateral contractions and their inverse vertex splits.

Contractions collapse a face edge (or a diagonal added inside a quad face) via
a rotation-system splice, then delete boundary edges; parallel and loop edges
created on the way are retained. Every contraction emits the split record that
replays it backwards, and splits validate themselves by retracing the
embedding after each atomic step. End-face designations travel through surgery
as dart sets: contraction never starves an end face, edge deletion merges the
two adjacent faces, and edge insertion keeps ends out of the freshly created
triangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import maps
from .errors import (
    BadPartition,
    DiagonalDegenerate,
    InputError,
    LoopPivot,
    NotQuad,
    NotTriangle,
    UnclassifiedFace,
    WrongDegree,
)
from .maps import AnnulusMap, Dart

NON_DEGENERATE = "NonDegenerate"
QUAD_232_VERTEX_REPEAT = "Quad232_vertexRepeat"
QUAD_231_LOOP_A = "Quad231_loopA"
QUAD_231_LOOP_PLUS_EDGE = "Quad231_loopPlusEdge"
TRI_231_LOOP = "Tri231_loop"

_CORNERS_TRI = ("rest_after", "rest_before", "arc_first", "arc_last")
_CORNERS_A = ("rest_after", "arc_last")
_CORNERS_B = ("rest_before", "arc_first")


@dataclass(frozen=True)
class TriangleSplit:
    target: str
    new_vertex: str
    pivot_edge: str
    restore_edge: str
    arc: tuple[Dart, ...]
    corner: str
    insert_after: Optional[Dart] = None


@dataclass(frozen=True)
class QuadSplit:
    target: str
    new_vertex: str
    edge_a: str
    corner_a: str
    edge_b: str
    corner_b: str
    arc: tuple[Dart, ...]
    insert_after: Optional[Dart] = None


# ---------------------------------------------------------------------------
# face classification


def classify_face(amap: AnnulusMap, face_idx: int) -> str:
    if amap.is_end_face(face_idx):
        raise WrongDegree("face is not cellular (contains an end)")
    walk = amap.face(face_idx)
    k = walk.degree
    if k not in (3, 4):
        raise WrongDegree(f"face has degree {k}, expected 3 or 4")
    d = walk.darts
    w = [amap.base(x) for x in d]
    edges = [x.edge for x in d]
    if len(set(w)) == k and len(set(edges)) == k:
        return NON_DEGENERATE
    if k == 3:
        if len(set(edges)) == 3 and len(set(w)) == 2:
            for r in range(3):
                a, b, c = w[r], w[(r + 1) % 3], w[(r + 2) % 3]
                if a == c and a != b:
                    loop_edge = d[(r + 2) % 3].edge
                    others = [d[r].edge, d[(r + 1) % 3].edge]
                    if amap.is_loop(loop_edge) and not any(
                        amap.is_loop(e) for e in others
                    ):
                        return TRI_231_LOOP
        raise UnclassifiedFace(f"degenerate triangle outside catalogue: {w} {edges}")
    if len(set(edges)) == 4 and len(set(w)) == 3:
        if (w[0] == w[2]) != (w[1] == w[3]):
            if not any(amap.is_loop(e) for e in edges):
                return QUAD_232_VERTEX_REPEAT
        for r in range(4):
            ws = [w[(r + i) % 4] for i in range(4)]
            ds = [d[(r + i) % 4] for i in range(4)]
            if ws[0] == ws[3] and len({ws[0], ws[1], ws[2]}) == 3:
                if amap.is_loop(ds[3].edge) and not any(
                    amap.is_loop(ds[i].edge) for i in range(3)
                ):
                    return QUAD_231_LOOP_PLUS_EDGE
    if len(set(w)) == 2 and len(set(edges)) == 3:
        for r in range(4):
            ws = [w[(r + i) % 4] for i in range(4)]
            ds = [d[(r + i) % 4] for i in range(4)]
            if ws[0] == ws[3] and ws[1] == ws[2] and ws[0] != ws[1]:
                if (
                    ds[0].edge == ds[2].edge
                    and amap.is_loop(ds[1].edge)
                    and amap.is_loop(ds[3].edge)
                ):
                    return QUAD_231_LOOP_A
    raise UnclassifiedFace(f"degenerate quadrilateral outside catalogue: {w} {edges}")


# ---------------------------------------------------------------------------
# mutable worksheet


class _Sheet:
    def __init__(self, amap: AnnulusMap):
        self.vertices = list(amap.vertices)
        self.edges = {e: (t, h) for e, t, h in amap.edges}
        self.rot = {v: list(r) for v, r in amap.rotation.items()}
        self.ends = [set(amap.faces_list[fi].darts) for fi in amap.end_faces]

    def base(self, d: Dart) -> str:
        t, h = self.edges[d.edge]
        return t if d.sign > 0 else h

    def head(self, d: Dart) -> str:
        t, h = self.edges[d.edge]
        return h if d.sign > 0 else t

    def retrace(self):
        edge_list = [(e, t, h) for e, (t, h) in self.edges.items()]
        return maps._trace_faces(edge_list, self.rot)

    def check_genus(self):
        faces, face_of = self.retrace()
        if len(self.vertices) - len(self.edges) + len(faces) != 2:
            raise BadPartition("surgery left the sphere (genus changed)")
        return faces, face_of

    def normalize_ends(self, avoid_keys: tuple = (), fallback_key=None):
        """Re-anchor each end to the full dart set of its current face.

        `avoid_keys` lists canonical keys of freshly created triangle faces,
        which cannot host an end; an end whose darts all sit in an avoided
        face moves to `fallback_key` (the other fragment of the split host).
        """
        faces, face_of = self.retrace()
        avoid = set(avoid_keys)
        keys = [f.key() for f in faces]
        new_ends = []
        for s in self.ends:
            cands = {face_of[d] for d in s if d in face_of}
            if not cands:
                raise BadPartition("end face lost all witness darts")
            allowed = [fi for fi in cands if keys[fi] not in avoid]
            if not allowed and fallback_key is not None:
                allowed = [fi for fi in range(len(faces)) if keys[fi] == fallback_key]
            if len(allowed) != 1:
                raise BadPartition(f"ambiguous end relocation: {sorted(cands)}")
            new_ends.append(set(faces[allowed[0]].darts))
        self.ends = new_ends

    def contract(self, pivot: Dart):
        """Collapse a non-loop edge; the merged vertex keeps the smaller id."""
        u = self.base(pivot)
        v = self.head(pivot)
        if u == v:
            raise LoopPivot("cannot contract a loop")
        z, gone = (u, v) if u < v else (v, u)
        dz = pivot if self.base(pivot) == z else pivot.rev()
        ru = self.rot[z]
        rv = self.rot[gone]
        i = ru.index(dz)
        j = rv.index(dz.rev())
        merged = ru[:i] + rv[j + 1 :] + rv[:j] + ru[i + 1 :]
        del self.rot[gone]
        self.rot[z] = merged
        self.vertices.remove(gone)
        del self.edges[pivot.edge]
        for e, (t, h) in list(self.edges.items()):
            self.edges[e] = (z if t == gone else t, z if h == gone else h)
        dead = {pivot, pivot.rev()}
        for s in self.ends:
            s -= dead
            if not s:
                raise BadPartition("contraction starved an end face")
        return z, gone

    def delete(self, eid: str):
        faces, face_of = self.retrace()
        dp, dm = Dart(eid, 1), Dart(eid, -1)
        merged = set(faces[face_of[dp]].darts) | set(faces[face_of[dm]].darts)
        merged -= {dp, dm}
        if not merged:
            raise BadPartition("cannot delete the only boundary structure")
        t, h = self.edges[eid]
        self.rot[t].remove(dp)
        self.rot[h].remove(dm)
        del self.edges[eid]
        for idx, s in enumerate(self.ends):
            if dp in s or dm in s:
                self.ends[idx] = set(merged)
            else:
                s.discard(dp)
                s.discard(dm)

    def split_vertex(self, target, new_vertex, arc, insert_after, pivot_edge):
        """Move `arc` to a new vertex joined to `target` by `pivot_edge`."""
        if new_vertex in self.vertices:
            raise BadPartition(f"vertex id {new_vertex} already in use")
        if pivot_edge in self.edges:
            raise BadPartition(f"edge id {pivot_edge} already in use")
        if target not in self.rot:
            raise BadPartition(f"unknown target vertex {target}")
        rot = self.rot[target]
        arc = list(arc)
        dz = Dart(pivot_edge, 1)
        dn = Dart(pivot_edge, -1)
        if arc:
            if any(d not in rot for d in arc):
                raise BadPartition("arc contains darts not at the target vertex")
            i = rot.index(arc[0])
            n = len(rot)
            ordered = [rot[(i + k) % n] for k in range(n)]
            if ordered[: len(arc)] != arc:
                raise BadPartition("arc is not a contiguous run in the rotation")
            if insert_after is not None and len(arc) < n:
                if rot[(i - 1) % n] != insert_after:
                    raise BadPartition("insert_after disagrees with the arc position")
            self.rot[target] = [dz] + ordered[len(arc) :]
        else:
            if insert_after is None:
                if rot:
                    raise BadPartition("empty arc needs an insertion position")
                self.rot[target] = [dz]
            else:
                if insert_after not in rot:
                    raise BadPartition("insert_after dart not at the target vertex")
                pos = rot.index(insert_after) + 1
                self.rot[target] = rot[:pos] + [dz] + rot[pos:]
        self.rot[new_vertex] = [dn] + arc
        self.vertices.append(new_vertex)
        self.edges[pivot_edge] = (target, new_vertex)
        arcset = set(arc)
        for e, (t, h) in list(self.edges.items()):
            if e == pivot_edge:
                continue
            nt, nh = t, h
            if Dart(e, 1) in arcset:
                nt = new_vertex
            if Dart(e, -1) in arcset:
                nh = new_vertex
            self.edges[e] = (nt, nh)
        return dz, dn

    def insert_before(self, vertex: str, ref: Dart, new: Dart):
        r = self.rot[vertex]
        r.insert(r.index(ref), new)

    def insert_after(self, vertex: str, ref: Dart, new: Dart):
        r = self.rot[vertex]
        r.insert(r.index(ref) + 1, new)

    def append_dart(self, vertex: str, new: Dart):
        self.rot[vertex].append(new)

    def finish(self) -> AnnulusMap:
        edge_list = sorted((e, t, h) for e, (t, h) in self.edges.items())
        vertices = sorted(self.vertices)
        faces, face_of = maps._trace_faces(edge_list, self.rot)
        idx = []
        for s in self.ends:
            cands = {face_of[d] for d in s if d in face_of}
            if len(cands) != 1:
                raise BadPartition(f"end darts spread over faces {sorted(cands)}")
            idx.append(cands.pop())
        return maps.build_indexed(vertices, edge_list, self.rot, (idx[0], idx[1]))


# ---------------------------------------------------------------------------
# contractions


def _cellular_walk(amap: AnnulusMap, face_idx: int, want: int, exc):
    if face_idx < 0 or face_idx >= len(amap.faces_list):
        raise InputError(f"no face {face_idx}")
    if amap.is_end_face(face_idx):
        raise exc("face contains an end of the annulus")
    walk = amap.face(face_idx)
    if walk.degree != want:
        raise exc(f"face has degree {walk.degree}")
    return walk


def _align_arc(result: AnnulusMap, z: str, darts: tuple[Dart, ...]):
    """Rotate a dart set into the contiguous run order it occupies at z."""
    if not darts:
        return darts
    try:
        rot = result.rotation[z]
        positions = sorted(rot.index(d) for d in darts)
    except ValueError:
        raise BadPartition("arc dart missing from contracted rotation") from None
    n = len(rot)
    want = set(darts)
    for start in positions:
        run = [rot[(start + k) % n] for k in range(len(darts))]
        if set(run) == want:
            return tuple(run)
    raise BadPartition("contraction produced a non-contiguous arc")


def _pred_in_rotation(result: AnnulusMap, z: str, dart: Dart) -> Optional[Dart]:
    rot = result.rotation[z]
    i = rot.index(dart)
    if len(rot) == 1:
        return dart
    return rot[(i - 1) % len(rot)]


def triangle_contract(
    amap: AnnulusMap, face_idx: int, pivot_pos: int, delete_pos: Optional[int] = None
) -> tuple[AnnulusMap, TriangleSplit]:
    """Contract a triangular face along the walk edge at `pivot_pos`.

    Returns the contracted map and the TriangleSplit record replaying the
    inverse move. `delete_pos` picks the removed boundary edge (defaults to
    the walk position after the pivot).
    """
    walk = _cellular_walk(amap, face_idx, 3, NotTriangle)
    d = list(walk.darts)
    p = pivot_pos % 3
    q = ((p + 1) % 3) if delete_pos is None else (delete_pos % 3)
    if q == p:
        raise BadPartition("cannot delete the pivot edge")
    pivot = d[p]
    u, v = amap.base(pivot), amap.head(pivot)
    if u == v:
        raise LoopPivot("pivot edge is a loop")
    deleted = d[q].edge
    if deleted == pivot.edge:
        raise BadPartition("deleted edge coincides with the pivot edge")
    v_side = q == (p + 1) % 3
    side_vertex = v if v_side else u
    corner = "rest_before" if v_side else "rest_after"
    survivor_pos = (p + 2) % 3 if v_side else (p + 1) % 3
    survivor = d[survivor_pos].edge
    if survivor == deleted or survivor == pivot.edge:
        raise BadPartition("triangle walk aliases the surviving edge")

    sheet = _Sheet(amap)
    z, gone = sheet.contract(pivot)
    sheet.delete(deleted)
    result = sheet.finish()

    side_darts = tuple(
        dart
        for dart in amap.rotation[side_vertex]
        if dart.edge not in (pivot.edge, deleted)
    )
    arc = _align_arc(result, z, side_darts)
    if corner == "rest_before":
        # the anchor (survivor dart at the kept side) directly precedes the arc
        insert_after = d[survivor_pos].rev()
    else:
        ref = arc[0] if arc else d[survivor_pos]
        insert_after = _pred_in_rotation(result, z, ref)
    record = TriangleSplit(
        target=z,
        new_vertex=gone,
        pivot_edge=pivot.edge,
        restore_edge=deleted,
        arc=arc,
        corner=corner,
        insert_after=insert_after,
    )
    return result, record


def quad_contract(
    amap: AnnulusMap,
    face_idx: int,
    diagonal: int,
    deletion_choice: tuple[int, int] = (1, 0),
) -> tuple[AnnulusMap, QuadSplit]:
    """Contract a quad face along the diagonal at corner offset `diagonal`.

    `deletion_choice = (da, db)` deletes pair_a[da] from the walk edges
    {e1,e2} and pair_b[db] from {e3,e4}, counted from the diagonal corner.
    """
    walk = _cellular_walk(amap, face_idx, 4, NotQuad)
    d = list(walk.darts)
    off = diagonal % 2
    ds = [d[(off + i) % 4] for i in range(4)]
    v1 = amap.base(ds[0])
    v3 = amap.base(ds[2])
    if v1 == v3:
        raise DiagonalDegenerate("diagonal endpoints coincide")
    da, db = deletion_choice
    pair_a = [ds[0].edge, ds[1].edge]
    pair_b = [ds[2].edge, ds[3].edge]
    deleted_a, survivor_a = pair_a[da], pair_a[1 - da]
    deleted_b, survivor_b = pair_b[db], pair_b[1 - db]
    if deleted_a == deleted_b:
        raise BadPartition("the two deleted edges must be distinct")
    if deleted_a == survivor_a or deleted_b == survivor_b:
        raise BadPartition("a deletion pair repeats a single edge")
    if survivor_a == deleted_b or survivor_b == deleted_a:
        raise BadPartition("deletion choice removes a needed anchor edge")

    sheet = _Sheet(amap)
    delta = "__delta__"
    while delta in sheet.edges:
        delta += "_"
    dp, dm = Dart(delta, 1), Dart(delta, -1)
    sheet.edges[delta] = (v1, v3)
    sheet.insert_before(v1, ds[0], dp)
    sheet.insert_before(v3, ds[2], dm)
    sheet.check_genus()
    z, gone = sheet.contract(dp)
    sheet.delete(deleted_a)
    sheet.delete(deleted_b)
    result = sheet.finish()

    corner_a = "arc_last" if da == 0 else "rest_after"
    corner_b = "rest_before" if db == 0 else "arc_first"
    side_darts = tuple(
        dart
        for dart in amap.rotation[v3]
        if dart.edge not in (deleted_a, deleted_b)
    )
    arc = _align_arc(result, z, side_darts)
    if db == 1:  # e4 deleted: its dart cannot anchor the position
        ref = arc[0] if arc else None
        if ref is None:
            raise BadPartition("quad contraction left no anchor for the record")
        insert_after = _pred_in_rotation(result, z, ref)
    else:
        insert_after = ds[3].rev()  # e4 dart based at v1
    record = QuadSplit(
        target=z,
        new_vertex=gone,
        edge_a=deleted_a,
        corner_a=corner_a,
        edge_b=deleted_b,
        corner_b=corner_b,
        arc=arc,
        insert_after=insert_after,
    )
    return result, record


# ---------------------------------------------------------------------------
# splits


def triangle_split(amap: AnnulusMap, spec: TriangleSplit) -> AnnulusMap:
    """Inverse of triangle_contract; validates and retraces every step."""
    if spec.corner not in _CORNERS_TRI:
        raise BadPartition(f"unknown corner tag {spec.corner}")
    if spec.corner in ("arc_first", "arc_last") and not spec.arc:
        raise BadPartition("arc-anchored corner needs a nonempty arc")
    if spec.pivot_edge == spec.restore_edge:
        raise BadPartition("pivot and restore edges must differ")
    sheet = _Sheet(amap)
    if spec.restore_edge in sheet.edges:
        raise BadPartition(f"edge id {spec.restore_edge} already in use")
    dz, dn = sheet.split_vertex(
        spec.target, spec.new_vertex, spec.arc, spec.insert_after, spec.pivot_edge
    )
    sheet.check_genus()
    sheet.normalize_ends()
    z, vn = spec.target, spec.new_vertex
    rot_z = sheet.rot[z]
    g = spec.restore_edge

    if spec.corner in ("rest_after", "rest_before"):
        if len(rot_z) < 2:
            raise BadPartition("rest-anchored corner needs a dart at the target")
        i = rot_z.index(dz)
        if spec.corner == "rest_after":
            anchor = rot_z[(i + 1) % len(rot_z)]
        else:
            anchor = rot_z[(i - 1) % len(rot_z)]
        w = sheet.head(anchor)
        sheet.edges[g] = (vn, w)
        if spec.corner == "rest_after":
            sheet.append_dart(vn, Dart(g, 1))
            sheet.insert_after(w, anchor.rev(), Dart(g, -1))
            t_dart = dn
        else:
            sheet.insert_after(vn, dn, Dart(g, 1))
            sheet.insert_before(w, anchor.rev(), Dart(g, -1))
            t_dart = dz
    else:
        anchor = spec.arc[0] if spec.corner == "arc_first" else spec.arc[-1]
        w = sheet.head(anchor)
        sheet.edges[g] = (z, w)
        if spec.corner == "arc_first":
            sheet.append_dart(z, Dart(g, 1))
            sheet.insert_after(w, anchor.rev(), Dart(g, -1))
            t_dart = dz
        else:
            sheet.insert_after(z, dz, Dart(g, 1))
            sheet.insert_before(w, anchor.rev(), Dart(g, -1))
            t_dart = dn
    faces, face_of = sheet.check_genus()
    t_face = faces[face_of[t_dart]]
    if t_face.degree != 3:
        raise BadPartition("split did not create a triangle face")
    gx = Dart(g, 1) if face_of[Dart(g, 1)] != face_of[t_dart] else Dart(g, -1)
    sheet.normalize_ends(
        avoid_keys=(t_face.key(),), fallback_key=faces[face_of[gx]].key()
    )
    return sheet.finish()


def quad_split(amap: AnnulusMap, spec: QuadSplit) -> AnnulusMap:
    """Inverse of quad_contract: split, restore two edges, drop the diagonal."""
    if spec.corner_a not in _CORNERS_A or spec.corner_b not in _CORNERS_B:
        raise BadPartition("unknown corner tags")
    if spec.edge_a == spec.edge_b:
        raise BadPartition("the two restored edges must be distinct")
    if (spec.corner_a == "arc_last" or spec.corner_b == "arc_first") and not spec.arc:
        raise BadPartition("arc-anchored corner needs a nonempty arc")
    sheet = _Sheet(amap)
    for eid in (spec.edge_a, spec.edge_b):
        if eid in sheet.edges:
            raise BadPartition(f"edge id {eid} already in use")
    delta = "__delta__"
    while delta in sheet.edges:
        delta += "_"
    dz, dn = sheet.split_vertex(
        spec.target, spec.new_vertex, spec.arc, spec.insert_after, delta
    )
    sheet.check_genus()
    sheet.normalize_ends()
    z, vn = spec.target, spec.new_vertex
    rot_z = sheet.rot[z]
    rest = [d for d in rot_z if d != dz]
    if spec.corner_b == "rest_before" and not rest:
        raise BadPartition("rest_before needs a dart before the diagonal")
    if spec.corner_a == "rest_after" and not rest:
        raise BadPartition("rest_after needs a dart after the diagonal")

    # a-side triangle T1 = (d1: z->v2, d2: v2->vn, delta-)
    if spec.corner_a == "rest_after":
        i = rot_z.index(dz)
        anchor_a = rot_z[(i + 1) % len(rot_z)]
        v2 = sheet.head(anchor_a)
        sheet.edges[spec.edge_a] = (vn, v2)
        sheet.append_dart(vn, Dart(spec.edge_a, 1))
        sheet.insert_after(v2, anchor_a.rev(), Dart(spec.edge_a, -1))
    else:  # arc_last: restore the z--v2 edge
        anchor_a = spec.arc[-1]
        v2 = sheet.head(anchor_a)
        sheet.edges[spec.edge_a] = (z, v2)
        sheet.insert_after(z, dz, Dart(spec.edge_a, 1))
        sheet.insert_before(v2, anchor_a.rev(), Dart(spec.edge_a, -1))
    faces, face_of = sheet.check_genus()
    t1 = faces[face_of[dn]]
    if t1.degree != 3:
        raise BadPartition("a-side restore did not close a triangle")
    ga = Dart(spec.edge_a, 1)
    if face_of[ga] == face_of[dn]:
        ga = ga.rev()
    sheet.normalize_ends(avoid_keys=(t1.key(),), fallback_key=faces[face_of[ga]].key())

    rot_z = sheet.rot[z]
    # b-side triangle T2 = (delta+, d3: vn->v4, d4: v4->z)
    if spec.corner_b == "rest_before":
        i = rot_z.index(dz)
        anchor_b = rot_z[(i - 1) % len(rot_z)]
        v4 = sheet.head(anchor_b)
        sheet.edges[spec.edge_b] = (vn, v4)
        sheet.insert_after(vn, dn, Dart(spec.edge_b, 1))
        sheet.insert_before(v4, anchor_b.rev(), Dart(spec.edge_b, -1))
    else:  # arc_first: restore the z--v4 edge
        anchor_b = spec.arc[0]
        v4 = sheet.head(anchor_b)
        sheet.edges[spec.edge_b] = (z, v4)
        sheet.insert_before(z, dz, Dart(spec.edge_b, 1))
        sheet.insert_after(v4, anchor_b.rev(), Dart(spec.edge_b, -1))
    faces, face_of = sheet.check_genus()
    t2 = faces[face_of[dz]]
    if t2.degree != 3:
        raise BadPartition("b-side restore did not close a triangle")
    gb = Dart(spec.edge_b, 1)
    if face_of[gb] == face_of[dz]:
        gb = gb.rev()
    sheet.normalize_ends(avoid_keys=(t2.key(),), fallback_key=faces[face_of[gb]].key())

    t1_witness = next(d for d in faces[face_of[dn]].darts if d.edge != delta)
    sheet.delete(delta)
    faces, face_of = sheet.check_genus()
    quad = faces[face_of[t1_witness]]
    if quad.degree != 4:
        raise BadPartition("split did not create a quadrilateral face")
    return sheet.finish()
