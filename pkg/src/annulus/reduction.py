"""Decomposition to base graphs, certificate replay, generation, completion.

decompose peels a tight map down to K, L or M with contractions that keep the
map tight at every step (triangles scanned before quad diagonals, in walk
order), recording the inverse splits. The emitted certificate is renamed to
canonical base coordinates so that rebuild replays it verbatim.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Union

from . import maps, moves, sparsity
from .errors import (
    BadPartition,
    CompletionStuck,
    DiagonalDegenerate,
    IllegalStep,
    InputError,
    LoopPivot,
    NoMoveFound,
    NotTight,
)
from .maps import AnnulusMap, Dart
from .moves import QuadSplit, TriangleSplit, _Sheet

Step = Union[TriangleSplit, QuadSplit]

# deletion pairs scanned for quad contractions, "both restores at the split
# vertex" first
_QUAD_CHOICES = ((1, 0), (1, 1), (0, 0), (0, 1))


@dataclass(frozen=True)
class ConstructionSequence:
    base: str
    level: int
    steps: tuple[Step, ...]

    def __post_init__(self):
        if self.base not in ("K", "L", "M"):
            raise InputError(f"unknown base {self.base!r}")
        if self.level not in (1, 2):
            raise InputError("level must be 1 or 2")
        if self.base == "L" and self.level != 2:
            raise InputError("base L belongs to level 2")
        if self.base == "M" and self.level != 1:
            raise InputError("base M belongs to level 1")
        if self.base == "K" and any(isinstance(s, QuadSplit) for s in self.steps):
            raise InputError("balanced certificates use only triangle splits")


def _base_tag(amap: AnnulusMap, level: int) -> Optional[str]:
    if maps.is_balanced_map(amap):
        if amap.n_vertices == 2 and amap.n_edges == 1:
            return "K"
        return None
    if level == 2 and amap.n_vertices == 2 and amap.n_edges == 2:
        return "L"
    if level == 1 and amap.n_vertices == 1 and amap.n_edges == 1:
        return "M"
    return None


def reduce_step(amap: AnnulusMap, level: int, scan_offset: int = 0) -> tuple[AnnulusMap, Step]:
    """One tightness-preserving contraction, scanned in deterministic order.

    `scan_offset` rotates the face scan, giving alternative but equally valid
    decompositions (used by geometric replay retries).
    """
    verdict = sparsity.check_sparse(amap, level)
    if not verdict.tight:
        raise NotTight("reduce_step requires a tight map")
    cells = amap.cellular_faces()
    if cells and scan_offset:
        k = scan_offset % len(cells)
        cells = cells[k:] + cells[:k]
    for fi in cells:
        if amap.face(fi).degree != 3:
            continue
        for p in range(3):
            for dq in (1, 2):
                try:
                    out, rec = moves.triangle_contract(amap, fi, p, (p + dq) % 3)
                except (LoopPivot, BadPartition):
                    continue
                if sparsity.check_sparse(out, level).sparse:
                    return out, rec
    for fi in cells:
        if amap.face(fi).degree != 4:
            continue
        for diag in (0, 1):
            for choice in _QUAD_CHOICES:
                try:
                    out, rec = moves.quad_contract(amap, fi, diag, choice)
                except (DiagonalDegenerate, BadPartition):
                    continue
                if sparsity.check_sparse(out, level).sparse:
                    return out, rec
    raise NoMoveFound(
        "no tight contraction found; the inductive theorems forbid this"
    )


def decompose(amap: AnnulusMap, level: int, scan_offset: int = 0) -> ConstructionSequence:
    """Iterated reduce_step down to the base graph, steps in replay order."""
    verdict = sparsity.check_sparse(amap, level)
    if not verdict.tight:
        raise NotTight("decompose requires a tight map")
    if amap.n_edges == 0:
        raise NotTight("decompose requires at least one edge")
    chain: list[tuple[AnnulusMap, Step]] = []
    cur = amap
    while _base_tag(cur, level) is None:
        pre = cur
        cur, rec = reduce_step(cur, level, scan_offset)
        if not sparsity.check_sparse(cur, level).tight:
            raise NoMoveFound("contraction result lost tightness")
        chain.append((pre, rec))
    tag = _base_tag(cur, level)
    base = maps.make_base(tag)
    iso = maps.find_isomorphism(cur, base, orientation_preserving=True)
    if iso is None:
        raise NoMoveFound("reduced map does not match its base graph")
    _, _, dart_map = iso
    # replay order: pair each contraction with its contracted result
    posts = [chain[i + 1][0] for i in range(len(chain) - 1)] + ([cur] if chain else [])
    triples = [
        (posts[i], chain[i][0], chain[i][1]) for i in range(len(chain))
    ]
    steps = _rename_chain(list(reversed(triples)), tag, dict(dart_map))
    if tag == "K" and any(isinstance(s, QuadSplit) for s in steps):
        # balanced maps stay balanced under tight splits, so quad steps would
        # have broken the f-count; reaching here is a bug
        raise NoMoveFound("balanced decomposition used a quad step")
    return ConstructionSequence(base=tag, level=level, steps=tuple(steps))


def _stage_vertex_map(pre_map: AnnulusMap, replay: AnnulusMap, dart_map):
    """Vertex correspondence induced by the dart map over shared edges."""
    vmap = {}
    unmatched = []
    for x in pre_map.vertices:
        imgs = set()
        for d in pre_map.rotation[x]:
            md = dart_map.get(d)
            if md is not None:
                imgs.add(replay.base(md))
        if len(imgs) == 1:
            vmap[x] = imgs.pop()
        elif not imgs:
            unmatched.append(x)
        else:
            raise NoMoveFound("stage vertex images diverged during renaming")
    if unmatched:
        free = [w for w in replay.vertices if w not in set(vmap.values())]
        if len(unmatched) != 1 or len(free) != 1:
            raise NoMoveFound("ambiguous vertex correspondence during renaming")
        vmap[unmatched[0]] = free[0]
    return vmap


def _rename_chain(triples, tag, dart_map) -> list[Step]:
    """Rewrite contraction-provenance records into canonical replay names.

    Carries the dart-level isomorphism from each original chain map onto the
    replayed canonical chain, extending it over the edges each split creates.
    """
    out: list[Step] = []
    replay = maps.make_base(tag)
    vi = ei = 0
    for post_map, pre_map, rec in triples:
        d0 = post_map.rotation[rec.target][0]
        target = replay.base(dart_map[d0])
        new_v = f"w{vi}"
        vi += 1
        arc = tuple(dart_map[d] for d in rec.arc)
        ins = dart_map[rec.insert_after] if rec.insert_after is not None else None
        if isinstance(rec, TriangleSplit):
            pe, ge = f"f{ei}", f"f{ei + 1}"
            ei += 2
            renamed = TriangleSplit(
                target=target,
                new_vertex=new_v,
                pivot_edge=pe,
                restore_edge=ge,
                arc=arc,
                corner=rec.corner,
                insert_after=ins,
            )
            replay = moves.triangle_split(replay, renamed)
            created = ((rec.pivot_edge, pe), (rec.restore_edge, ge))
        else:
            ea, eb = f"f{ei}", f"f{ei + 1}"
            ei += 2
            renamed = QuadSplit(
                target=target,
                new_vertex=new_v,
                edge_a=ea,
                corner_a=rec.corner_a,
                edge_b=eb,
                corner_b=rec.corner_b,
                arc=arc,
                insert_after=ins,
            )
            replay = moves.quad_split(replay, renamed)
            created = ((rec.edge_a, ea), (rec.edge_b, eb))
        out.append(renamed)
        # extend the dart map over the created edges: endpoints settle the
        # sign except for loops, where the rotation check disambiguates
        vmap = _stage_vertex_map(pre_map, replay, dart_map)
        replay_edges = {e: (t, h) for e, t, h in replay.edges}
        pre_edges = {e: (t, h) for e, t, h in pre_map.edges}
        loops = []
        for old_id, new_id in created:
            ot, oh = pre_edges[old_id]
            nt, nh = replay_edges[new_id]
            if ot == oh:
                if nt != nh or vmap[ot] != nt:
                    raise NoMoveFound("dart correspondence broke during renaming")
                loops.append((old_id, new_id))
                continue
            if vmap[ot] == nt and vmap[oh] == nh:
                flip = 1
            elif vmap[ot] == nh and vmap[oh] == nt:
                flip = -1
            else:
                raise NoMoveFound("dart correspondence broke during renaming")
            dart_map[Dart(old_id, 1)] = Dart(new_id, flip)
            dart_map[Dart(old_id, -1)] = Dart(new_id, -flip)
        for combo in itertools.product((1, -1), repeat=len(loops)):
            for (old_id, new_id), fl in zip(loops, combo):
                dart_map[Dart(old_id, 1)] = Dart(new_id, fl)
                dart_map[Dart(old_id, -1)] = Dart(new_id, -fl)
            try:
                _check_stage_iso(pre_map, replay, dart_map)
                break
            except NoMoveFound:
                continue
        else:
            _check_stage_iso(pre_map, replay, dart_map)
    return out


def _check_stage_iso(orig: AnnulusMap, replay: AnnulusMap, dart_map):
    """Verify the tracked dart map is a rotation-preserving isomorphism."""
    for v in orig.vertices:
        rot = orig.rotation[v]
        if not rot:
            continue
        imgs = [dart_map[d] for d in rot]
        w = replay.base(imgs[0])
        rrot = replay.rotation[w]
        if len(rrot) != len(imgs):
            raise NoMoveFound("stage isomorphism broke: degree mismatch")
        k = rrot.index(imgs[0])
        for i, img in enumerate(imgs):
            if rrot[(k + i) % len(rrot)] != img:
                raise NoMoveFound("stage isomorphism broke: rotation mismatch")


def rebuild(seq: ConstructionSequence) -> AnnulusMap:
    """Replay a certificate from its base; every prefix must be tight."""
    cur = maps.make_base(seq.base)
    for i, step in enumerate(seq.steps):
        try:
            if isinstance(step, TriangleSplit):
                cur = moves.triangle_split(cur, step)
            elif isinstance(step, QuadSplit):
                cur = moves.quad_split(cur, step)
            else:
                raise IllegalStep(f"unknown step type {type(step).__name__}")
        except BadPartition as e:
            raise IllegalStep(f"step {i} is not replayable: {e}") from e
        if not sparsity.check_sparse(cur, seq.level).tight:
            raise IllegalStep(f"prefix after step {i} is not (2,3,{seq.level})-tight")
    return cur


# ---------------------------------------------------------------------------
# random generation


def _fresh_namer(amap: AnnulusMap):
    used_v = set(amap.vertices)
    used_e = {e[0] for e in amap.edges}
    counters = {"v": 0, "e": 0}

    def fresh(kind: str) -> str:
        used = used_v if kind == "v" else used_e
        while True:
            name = f"{kind}{counters[kind]}"
            counters[kind] += 1
            if name not in used:
                used.add(name)
                return name

    return fresh


def _random_arc(rng: random.Random, rot):
    n = len(rot)
    length = rng.randint(0, n)
    start = rng.randrange(n)
    arc = tuple(rot[(start + k) % n] for k in range(length))
    if length == 0:
        return arc, rot[rng.randrange(n)]
    return arc, None


def _random_triangle_spec(rng, amap, fresh) -> TriangleSplit:
    target = rng.choice(sorted(amap.vertices))
    rot = amap.rotation[target]
    arc, ins = _random_arc(rng, rot)
    corners = ["rest_after", "rest_before"]
    if arc:
        corners += ["arc_first", "arc_last"]
    return TriangleSplit(
        target=target,
        new_vertex=fresh("v"),
        pivot_edge=fresh("e"),
        restore_edge=fresh("e"),
        arc=arc,
        corner=rng.choice(corners),
        insert_after=ins,
    )


def _random_quad_spec(rng, amap, fresh) -> QuadSplit:
    target = rng.choice(sorted(amap.vertices))
    rot = amap.rotation[target]
    arc, ins = _random_arc(rng, rot)
    ca = rng.choice(["rest_after", "arc_last"] if arc else ["rest_after"])
    cb = rng.choice(["rest_before", "arc_first"] if arc else ["rest_before"])
    return QuadSplit(
        target=target,
        new_vertex=fresh("v"),
        edge_a=fresh("e"),
        corner_a=ca,
        edge_b=fresh("e"),
        corner_b=cb,
        arc=arc,
        insert_after=ins,
    )


def generate_random_tight(level: int, n_vertices: int, seed: int) -> AnnulusMap:
    """Seeded random (2,3,level)-tight map grown by rejection-sampled splits."""
    if level not in (1, 2):
        raise InputError("level must be 1 or 2")
    rng = random.Random(seed)
    bases = []
    if n_vertices >= 2:
        bases.append("K")
    if level == 2:
        if n_vertices >= 2:
            bases.append("L")
        if not bases:
            raise InputError("level 2 needs at least 2 vertices")
    else:
        bases.append("M")
    tag = rng.choice(sorted(bases))
    cur = maps.make_base(tag)
    fresh = _fresh_namer(cur)
    while cur.n_vertices < n_vertices:
        done = False
        for _ in range(200):
            use_quad = tag != "K" and rng.random() < 0.5
            try:
                if use_quad:
                    spec = _random_quad_spec(rng, cur, fresh)
                    nxt = moves.quad_split(cur, spec)
                else:
                    spec = _random_triangle_spec(rng, cur, fresh)
                    nxt = moves.triangle_split(cur, spec)
            except BadPartition:
                continue
            if sparsity.check_sparse(nxt, level).tight:
                cur = nxt
                done = True
                break
        if not done:
            # 0-extension always preserves tightness
            target = sorted(cur.vertices)[0]
            spec = TriangleSplit(
                target=target,
                new_vertex=fresh("v"),
                pivot_edge=fresh("e"),
                restore_edge=fresh("e"),
                arc=(),
                corner="rest_after",
                insert_after=cur.rotation[target][0],
            )
            cur = moves.triangle_split(cur, spec)
            assert sparsity.check_sparse(cur, level).tight
    return cur


# ---------------------------------------------------------------------------
# completion


def _chord_candidates(amap: AnnulusMap):
    for fi, walk in enumerate(amap.faces_list):
        if not walk.darts:
            continue
        corners = walk.corners(amap)
        k = len(corners)
        for i in range(k):
            for j in range(k):
                yield fi, corners[i], corners[j]


def _insert_chord(amap: AnnulusMap, fi: int, ci, cj, eid: str, end_sides):
    """Add an edge between two corners of one face; end_sides picks the
    fragment (+1/-1 = dart sign of the new edge) for each end living in fi."""
    sheet = _Sheet(amap)
    xi, xj = ci.vertex, cj.vertex
    sheet.edges[eid] = (xi, xj)
    if ci == cj:
        r = sheet.rot[xi]
        pos = r.index(ci.out)
        sheet.rot[xi] = r[:pos] + [Dart(eid, 1), Dart(eid, -1)] + r[pos:]
    else:
        sheet.insert_before(xi, ci.out, Dart(eid, 1))
        sheet.insert_before(xj, cj.out, Dart(eid, -1))
    faces, face_of = sheet.retrace()
    if len(sheet.vertices) - len(sheet.edges) + len(faces) != 2:
        raise BadPartition("chord corners were not on a single face")
    for k in range(2):
        if amap.end_faces[k] == fi:
            side = end_sides[k]
            if side is None:
                raise BadPartition("missing end assignment for a split end face")
            sheet.ends[k] = set(faces[face_of[Dart(eid, side)]].darts)
        else:
            cands = {face_of[d] for d in sheet.ends[k] if d in face_of}
            if len(cands) != 1:
                raise BadPartition("end relocation ambiguous during completion")
            sheet.ends[k] = set(faces[cands.pop()].darts)
    return sheet.finish()


def complete_to_tight(amap: AnnulusMap, level: int) -> AnnulusMap:
    """Greedy sparsity-preserving chord additions until none is possible.

    The result is asserted tight; an unbalanced tight map admits no addition,
    so tight inputs with f = level come back unchanged.
    """
    verdict = sparsity.check_sparse(amap, level)
    if not verdict.sparse:
        raise InputError("complete_to_tight requires a sparse map")
    cur = amap
    fresh = _fresh_namer(amap)
    while True:
        committed = False
        eid = fresh("e")
        for fi, ci, cj in _chord_candidates(cur):
            in_face = [k for k in range(2) if cur.end_faces[k] == fi]
            assignments = [[]]
            for _ in in_face:
                assignments = [a + [s] for a in assignments for s in (1, -1)]
            for assign in assignments:
                sides = {}
                for k, s in zip(in_face, assign):
                    sides[k] = s
                end_sides = [sides.get(0), sides.get(1)]
                try:
                    nxt = _insert_chord(cur, fi, ci, cj, eid, end_sides)
                except BadPartition:
                    continue
                if sparsity.check_sparse(nxt, level).sparse:
                    cur = nxt
                    committed = True
                    break
            if committed:
                break
        if not committed:
            if not sparsity.check_sparse(cur, level).tight:
                raise CompletionStuck(
                    "no sparsity-preserving chord exists but the map is not tight"
                )
            return cur
