"""Geometric replay of vertex splits on symmetric contact systems.

The split vertex's segment is replaced by two straight pieces near the
original line: the target keeps one, the new vertex gets the other. Old
contacts re-hang by trimming or extending the touching tip onto the piece
that inherits them (order and sides around a piece are preserved
automatically for small displacements); new contacts place a piece endpoint
onto the partner's body, with the partner instance chosen from the anchor
contact's group power; self-contacts intersect a piece line with its own
group image. The abstract split result dictates, through the rotation gaps
around each vertex, which piece end realizes each new contact. Candidates
are certified by revalidating the system and matching the extracted quotient
against the abstract result; scales follow the halving schedule.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Optional

from . import contact as ct
from . import maps, moves
from .errors import AnnulusError, EpsilonExhausted, ValidationFailed
from .groups import coerce_coord
from .maps import AnnulusMap, Dart
from .moves import QuadSplit, TriangleSplit
from .numbers import dot, line_intersection, sgn, vadd, vscale, vsub

_CAP_LO = (2, 0)  # kappa of the low-parameter cap
_CAP_HI = (0, 0)  # kappa of the high-parameter cap


def match_quotient(abstract: AnnulusMap, concrete: AnnulusMap):
    """Vertex-fixing, orientation-preserving dart isomorphism, or None."""
    if set(abstract.vertices) != set(concrete.vertices):
        return None
    if abstract.n_edges != concrete.n_edges:
        return None
    if abstract.n_edges == 0:
        return {}
    d0 = Dart(abstract.edges[0][0], 1)
    v0 = abstract.base(d0)
    for cand in concrete.darts():
        if concrete.base(cand) != v0:
            continue
        phi = maps._extend_iso(abstract, concrete, d0, cand, 1)
        if phi is None:
            continue
        if any(abstract.base(d) != concrete.base(img) for d, img in phi.items()):
            continue
        ends_img = set()
        ok = True
        for fi in abstract.end_faces:
            imgs = {concrete.face_of[phi[d]] for d in abstract.faces_list[fi].darts}
            if len(imgs) != 1:
                ok = False
                break
            ends_img.add(imgs.pop())
        if not ok:
            continue
        if abstract.end_faces[0] == abstract.end_faces[1]:
            if concrete.end_faces[0] != concrete.end_faces[1]:
                continue
        else:
            if ends_img != set(concrete.end_faces):
                continue
        return phi
    return None


def apply_triangle_split_geometry(
    system: ct.ContactSystem,
    step: TriangleSplit,
    pre_map: Optional[AnnulusMap] = None,
    budget: int = 2600,
) -> ct.ContactSystem:
    return _apply_split(system, step, pre_map, is_quad=False, budget=budget)


def apply_quad_split_geometry(
    system: ct.ContactSystem,
    step: QuadSplit,
    pre_map: Optional[AnnulusMap] = None,
    budget: int = 2600,
) -> ct.ContactSystem:
    return _apply_split(system, step, pre_map, is_quad=True, budget=budget)


def _apply_split(system, step, pre_map, is_quad, budget=2600) -> ct.ContactSystem:
    cert = ct.build_quotient(system)
    gq = cert.quotient_graph
    if pre_map is None:
        pre_map = gq
    phi = match_quotient(pre_map, gq)
    if phi is None:
        raise ValidationFailed("system quotient does not match the step's graph")
    if is_quad:
        expected = moves.quad_split(pre_map, step)
    else:
        expected = moves.triangle_split(pre_map, step)

    total_attempts = 0
    for rec, rec_quad in _equivalent_records(pre_map, expected, step, is_quad):
        try:
            if rec_quad:
                rec_expected = moves.quad_split(pre_map, rec)
                new_edges = [rec.edge_a, rec.edge_b]
                pivot_edge = None
            else:
                rec_expected = moves.triangle_split(pre_map, rec)
                new_edges = [rec.pivot_edge, rec.restore_edge]
                pivot_edge = rec.pivot_edge
        except AnnulusError:
            continue
        if match_quotient(expected, rec_expected) is None:
            continue
        builder = _SplitBuilder(
            system, cert, phi, rec, rec_expected, new_edges, pivot_edge
        )
        attempts = 0
        for cand in builder.candidates():
            attempts += 1
            total_attempts += 1
            if attempts > max(budget // 4, 200) or total_attempts > budget:
                break
            if not _changed_pairs_ok(system, cand):
                continue
            try:
                cert2 = ct.build_quotient(cand)
            except AnnulusError:
                continue
            if match_quotient(expected, cert2.quotient_graph) is not None:
                cand.provenance = expected
                return cand
        if total_attempts > budget:
            break
    raise EpsilonExhausted(
        f"could not realize the split at {step.target} within the placement budget"
    )


def _changed_pairs_ok(old: ct.ContactSystem, cand: ct.ContactSystem) -> bool:
    """Genericity of pairs touching a changed segment (cheap rejection)."""
    from .numbers import seg_intersections

    exact = cand.group.number_system != "float"
    changed = [
        k
        for k in cand.reps
        if k not in old.reps or old.reps[k] != cand.reps[k]
    ]
    if not changed:
        return True
    window = ct.window_bound(cand)
    g = cand.group
    if g.kind == "rotation":
        powers = list(range(g.order))
    else:
        powers = list(range(-window, window + 1))
    ids = sorted(cand.reps)
    changed_set = set(changed)
    for i in changed:
        a, b = cand.reps[i]
        if a == b:
            return False
        for j in ids:
            for t in powers:
                if i == j and t == 0:
                    continue
                if j in changed_set and j < i:
                    continue
                c, d = cand.instance(j, t)
                if seg_intersections(a, b, c, d, exact) == "bad":
                    return False
    return True


def _equivalent_records(pre_map, expected, step, is_quad):
    """The given record first, then records of other contractions of the
    expected map that reverse onto the same (target, new vertex) pair."""
    yield step, is_quad
    z, vn = step.target, step.new_vertex
    seen = {_record_key(step)}
    from .errors import AnnulusError as _AE

    fresh_counter = [0]

    def fresh(_e=fresh_counter):
        _e[0] += 1
        return f"__r{_e[0]}"

    for fi in expected.cellular_faces():
        deg = expected.face(fi).degree
        plans = []
        if deg == 3:
            plans = [("tri", p, dq) for p in range(3) for dq in (1, 2)]
        elif deg == 4:
            plans = [
                ("quad", d, c)
                for d in (0, 1)
                for c in ((1, 0), (1, 1), (0, 0), (0, 1))
            ]
        for kind, a, b in plans:
            try:
                if kind == "tri":
                    out, rec = moves.triangle_contract(expected, fi, a, (a + b) % 3)
                else:
                    out, rec = moves.quad_contract(expected, fi, a, b)
            except _AE:
                continue
            if {rec.target, rec.new_vertex} != {z, vn}:
                continue
            if rec.target != z:
                out = _rename_vertex(out, rec.target, z)
                rec = _swap_record_names(rec, z)
            psi = match_quotient(out, pre_map)
            if psi is None:
                continue
            rec2 = _transport_record(rec, psi, vn, fresh)
            key = _record_key(rec2)
            if key in seen:
                continue
            seen.add(key)
            yield rec2, isinstance(rec2, QuadSplit)


def _record_key(rec):
    if isinstance(rec, TriangleSplit):
        return ("t", rec.target, rec.arc, rec.corner, rec.insert_after)
    return ("q", rec.target, rec.arc, rec.corner_a, rec.corner_b, rec.insert_after)


def _rename_vertex(amap: AnnulusMap, old: str, new: str) -> AnnulusMap:
    ren = lambda v: new if v == old else v
    edges = [(e, ren(t), ren(h)) for e, t, h in amap.edges]
    rotation = {ren(v): list(r) for v, r in amap.rotation.items()}
    vertices = [ren(v) for v in amap.vertices]
    return maps.build_indexed(vertices, edges, rotation, amap.end_faces)


def _swap_record_names(rec, z):
    if isinstance(rec, TriangleSplit):
        return TriangleSplit(
            target=z,
            new_vertex=rec.target,
            pivot_edge=rec.pivot_edge,
            restore_edge=rec.restore_edge,
            arc=rec.arc,
            corner=rec.corner,
            insert_after=rec.insert_after,
        )
    return QuadSplit(
        target=z,
        new_vertex=rec.target,
        edge_a=rec.edge_a,
        corner_a=rec.corner_a,
        edge_b=rec.edge_b,
        corner_b=rec.corner_b,
        arc=rec.arc,
        insert_after=rec.insert_after,
    )


def _transport_record(rec, psi, vn, fresh):
    """Rewrite a record emitted on one map into the matched map's darts."""
    arc = tuple(psi[d] for d in rec.arc)
    ins = psi[rec.insert_after] if rec.insert_after is not None else None
    if isinstance(rec, TriangleSplit):
        return TriangleSplit(
            target=rec.target,
            new_vertex=vn,
            pivot_edge=fresh(),
            restore_edge=fresh(),
            arc=arc,
            corner=rec.corner,
            insert_after=ins,
        )
    return QuadSplit(
        target=rec.target,
        new_vertex=vn,
        edge_a=fresh(),
        corner_a=rec.corner_a,
        edge_b=fresh(),
        corner_b=rec.corner_b,
        arc=arc,
        insert_after=ins,
    )


def _kappa_lt(a, b):
    return a < b


def _in_open_cyclic(lo, hi, x):
    if lo == hi:
        return x != lo
    if lo < hi:
        return lo < x < hi
    return x > lo or x < hi


class _SplitBuilder:
    def __init__(self, system, cert, phi, step, expected, new_edges, pivot_edge):
        self.system = system
        self.group = system.group
        self.exact = system.group.number_system != "float"
        self.cert = cert
        self.phi = phi
        self.step = step
        self.expected = expected
        self.new_edges = new_edges
        self.pivot_edge = pivot_edge
        self.z = step.target
        self.vn = step.new_vertex

        p, q = system.reps[self.z]
        self.p, self.q = p, q
        self.dirv = vsub(q, p)
        self.nrm = (-self.dirv[1], self.dirv[0])
        self.dd = dot(self.dirv, self.dirv)

        gq = cert.quotient_graph
        self.arc_darts = [phi[d] for d in step.arc]
        arc_set = set(self.arc_darts)
        self.rest_darts = [d for d in gq.rotation[self.z] if d not in arc_set]
        self.features = {d: cert.dart_info[d] for d in gq.rotation[self.z]}
        self.pos_of = {dart: key for key, dart in cert.entries[self.z]}
        # kappa keys usable for the abstract->geometric gap analysis; new
        # darts get looked through when walking rotation neighborhoods
        self.inv_phi = {v: k for k, v in phi.items()}

    # -- frame helpers -------------------------------------------------------
    def pt(self, t, h):
        c = lambda x: coerce_coord(self.group, x)
        return vadd(self.p, vadd(vscale(c(t), self.dirv), vscale(c(h), self.nrm)))

    def param(self, point):
        return dot(vsub(point, self.p), self.dirv) / self.dd

    def _geo_kappa(self, vertex, abstract_dart):
        """Kappa key of an old dart around the piece circle of `vertex`."""
        gd = self.phi.get(abstract_dart)
        if gd is None:
            return None
        key = self.pos_of.get(gd)
        if key is None:
            return None
        kind, par = key
        if kind == "cap1":
            return _CAP_HI
        if kind == "cap0":
            return _CAP_LO
        return (1, -par) if kind == "north" else (3, par)

    def _gap_around(self, vertex, dart):
        """Kappa interval available to `dart` in the expected rotation."""
        rot = self.expected.rotation[vertex]
        i = rot.index(dart)
        n = len(rot)
        lo = hi = None
        for k in range(1, n):
            cand = self._geo_kappa(vertex, rot[(i - k) % n])
            if cand is not None:
                lo = cand
                break
        for k in range(1, n):
            cand = self._geo_kappa(vertex, rot[(i + k) % n])
            if cand is not None:
                hi = cand
                break
        return lo, hi

    def _cap_allowed(self, vertex, dart, cap):
        lo, hi = self._gap_around(vertex, dart)
        if lo is None or hi is None:
            return True  # no old anchors: unconstrained (tiny vertices)
        return _in_open_cyclic(lo, hi, cap)

    # -- planning ------------------------------------------------------------
    def _piece_feats(self, darts):
        ins, outs = [], []
        for d in darts:
            role, rec = self.features[d]
            if role == "in":
                ins.append(rec)
            else:
                outs.append(rec)
        return ins, outs

    def _anchor_powers(self, body):
        powers = []
        for r in self.cert.contacts:
            if r.tip == self.z and r.body == body:
                powers.append(-r.power)
            if r.tip == body and r.body == self.z:
                powers.append(r.power)
        out = []
        for p in powers + [0, 1, -1]:
            if self.group.kind == "rotation":
                p %= self.group.order
            if p not in out:
                out.append(p)
        return out[:4]

    def _loop_powers(self):
        if self.group.kind == "rotation":
            k = self.group.order
            return list(dict.fromkeys([1 % k, (-1) % k, 2 % k, (-2) % k]))
        return [1, -1, 2, -2]

    def _dart_of_edge_at(self, eid, vertex):
        d = Dart(eid, 1)
        if self.expected.base(d) == vertex:
            return d
        return Dart(eid, -1)

    def candidates(self):
        z, vn = self.z, self.vn
        exp_edges = {e: (t, h) for e, t, h in self.expected.edges}
        arc_ins, arc_outs = self._piece_feats(self.arc_darts)
        rest_ins, rest_outs = self._piece_feats(self.rest_darts)

        arc_params = [r.param for r in arc_ins]
        arc_params += [Fraction(r.tip_end) for r in arc_outs]
        rest_params = [r.param for r in rest_ins]
        rest_params += [Fraction(r.tip_end) for r in rest_outs]

        base = _min_gap_scale(arc_params + rest_params, self.exact)
        # contacts of z sitting near a body endpoint shrink the usable scale
        body_feats = {}
        for r in self.cert.contacts:
            body_feats.setdefault(r.body, []).append(r.param)
        for r in arc_outs + rest_outs:
            others = [Fraction(0), Fraction(1)] + [
                p for p in body_feats.get(r.body, []) if p != r.param
            ]
            for p in others:
                margin = r.param - p if r.param > p else p - r.param
                if sgn(margin, self.exact) > 0:
                    margin = margin / 8
                    if margin < base:
                        base = margin
        base = _dyadic_below(base, self.exact)
        t_gap_opts = self._gap_candidates(arc_params, base)

        # assignment pruning: the tip side of a new contact needs a cap whose
        # kappa position fits the expected rotation gap
        fixed_out = {z: set(), vn: set()}
        for rec in arc_outs:
            fixed_out[vn].add("hi" if rec.tip_end == 1 else "lo")
        for rec in rest_outs:
            fixed_out[z].add("hi" if rec.tip_end == 1 else "lo")

        def cap_options(eid, tip_piece):
            dart = self._dart_of_edge_at(eid, tip_piece)
            opts = []
            for sd, cap in (("lo", _CAP_LO), ("hi", _CAP_HI)):
                if sd in fixed_out[tip_piece]:
                    continue
                if self._cap_allowed(tip_piece, dart, cap):
                    opts.append(sd)
            return opts

        per_edge_options = []
        for eid in self.new_edges:
            t, h = exp_edges[eid]
            opts = []
            for tip, body in ((t, h), (h, t)):
                if tip not in (z, vn):
                    continue
                for sd in cap_options(eid, tip):
                    if eid == self.pivot_edge:
                        pws = [0]
                    elif body in (z, vn):
                        if body == tip or (t == h):
                            pws = self._loop_powers()
                        else:
                            pws = [0, 1, -1]
                    else:
                        pws = self._anchor_powers(body)
                    for pw in pws:
                        opts.append(("cap", tip, sd, body, pw))
            # donor realizations: an old in-contact from the far endpoint W
            # flips (our piece takes over the touch), freeing W's tip to land
            # on the piece hosting the new edge
            other = t if t not in (z, vn) else h
            host = h if other == t else t
            if other not in (z, vn) and host in (z, vn):
                for rec in self.cert.contacts:
                    if rec.tip != other or rec.body != z:
                        continue
                    rec_dart = None
                    for dart, (role, r2) in self.features.items():
                        if role == "in" and r2 is rec:
                            rec_dart = dart
                    if rec_dart is None:
                        continue
                    flip_piece = vn if rec_dart in set(self.arc_darts) else z
                    flip_abs = self.inv_phi.get(rec_dart)
                    for sd, cap in (("lo", _CAP_LO), ("hi", _CAP_HI)):
                        if sd in fixed_out[flip_piece]:
                            continue
                        if flip_abs is not None and not self._cap_allowed(
                            flip_piece, flip_abs, cap
                        ):
                            continue
                        opts.append(("donor", rec, host, flip_piece, sd))
            if not opts:
                return
            per_edge_options.append((eid, opts))

        deltas = [base / (2**j) for j in range(8)]
        for delta in deltas:
            for tau in (1, -1):
                for t_gap0 in t_gap_opts:
                    for z_off in (False, True):
                        combos = itertools.product(*[o for _, o in per_edge_options])
                        for combo in combos:
                            plan = {
                                per_edge_options[i][0]: combo[i]
                                for i in range(len(combo))
                            }
                            # distinct caps / donors per piece
                            used = set()
                            for p in (z, vn):
                                used |= {(p, s) for s in fixed_out[p]}
                            ok = True
                            for eid, opt in plan.items():
                                if opt[0] == "cap":
                                    _, tip, sd, body, pw = opt
                                    keys = [(tip, sd)]
                                else:
                                    _, rec, host, fp, fs = opt
                                    keys = [(fp, fs), ("rec", id(rec))]
                                for key in keys:
                                    if key in used:
                                        ok = False
                                        break
                                    used.add(key)
                                if not ok:
                                    break
                            if not ok:
                                continue
                            cand = self._build(
                                plan,
                                delta,
                                tau,
                                t_gap0,
                                z_off,
                                arc_ins,
                                arc_outs,
                                rest_ins,
                                rest_outs,
                                arc_params,
                                rest_params,
                            )
                            if cand is not None:
                                yield cand

    def _gap_candidates(self, arc_params, base):
        opts = []
        if arc_params:
            lo = min(arc_params)
            hi = max(arc_params)
            opts.extend([lo - base, hi + base])
        if self.pivot_edge is not None:
            # the pivot contact's circle position is pinned by the expected
            # rotation gap at either endpoint
            for host in (self.vn, self.z):
                dart = self._dart_of_edge_at(self.pivot_edge, host)
                lo, hi = self._gap_around(host, dart)
                opts.extend(self._params_from_gap(lo, hi, base))
        if not arc_params:
            ref = self.step.insert_after
            if ref is not None:
                key = self.pos_of.get(self.phi.get(ref))
                if key is not None:
                    kind, par = key
                    if kind in ("north", "south"):
                        opts.extend([par + base, par - base])
                    elif kind == "cap1":
                        opts.extend([Fraction(1) + base, Fraction(1) - base])
                    else:
                        opts.extend([Fraction(0) - base, Fraction(0) + base])
            opts.extend([Fraction(1) + base, Fraction(0) - base, Fraction(1, 2)])
        out = []
        for t in opts:
            if t not in out:
                out.append(t)
        return out[:8]

    def _params_from_gap(self, lo, hi, base):
        def par_of(key):
            if key is None:
                return None
            if key == _CAP_HI:
                return Fraction(1) + base
            if key == _CAP_LO:
                return Fraction(0) - base
            kind, val = key
            return -val if kind == 1 else val

        pa, pb = par_of(lo), par_of(hi)
        cands = []
        if pa is not None and pb is not None:
            cands.append((pa + pb) / 2)
        for p in (pa, pb):
            if p is not None:
                cands.extend([p + base, p - base])
        return cands

    # -- construction ----------------------------------------------------------
    def _build(
        self,
        plan,
        delta,
        tau,
        t_gap,
        z_off,
        arc_ins,
        arc_outs,
        rest_ins,
        rest_outs,
        arc_params,
        rest_params,
    ):
        g = self.group
        z, vn = self.z, self.vn
        if z_off:
            h0 = -tau * delta / 4
            line_z = (self.pt(0, h0), self.pt(1, h0 + delta * delta / 8))
        else:
            line_z = (self.pt(0, 0), self.pt(1, 0))
        # the v piece crosses the z piece's line at t_gap
        zg = _point_at(line_z, self.param, t_gap, self.group)
        far = _point_at(line_z, self.param, t_gap + 1, self.group)
        line_v = (zg, vadd(far, vscale(coerce_coord(self.group, tau * delta), self.nrm)))
        lines = {z: line_z, vn: line_v}

        # feasibility: opposite-side arc tips extend across the original line
        for r in arc_ins:
            if r.tip == z:
                continue
            hv = (r.param - t_gap) * tau
            s = sgn(hv, self.exact)
            if s != 0 and s != r.side and rest_params:
                if min(rest_params) < r.param < max(rest_params):
                    return None

        new_reps = dict(self.system.reps)
        trims = {}
        body_hits = {z: [], vn: []}

        def do_trim(rec, piece):
            tip_rep = self.system.reps[rec.tip]
            a = g.apply(rec.power, tip_rep[rec.tip_end])
            b = g.apply(rec.power, tip_rep[1 - rec.tip_end])
            hit = line_intersection(a, b, *lines[piece])
            if hit is None:
                return False
            key = (rec.tip, rec.tip_end)
            if key in trims:
                return False
            trims[key] = g.apply(-rec.power, hit)
            body_hits[piece].append(self.param(hit))
            return True

        flips = {}
        for eid, opt in plan.items():
            if opt[0] == "donor":
                _, rec, host, fp, fs = opt
                flips[id(rec)] = (rec, fp, fs)

        for rec in arc_ins:
            if rec.tip == z or id(rec) in flips:
                continue
            if not do_trim(rec, vn):
                return None
        if z_off:
            for rec in rest_ins:
                if rec.tip == z or id(rec) in flips:
                    continue
                if not do_trim(rec, z):
                    return None

        cap_jobs = {z: {}, vn: {}}
        for rec in arc_outs:
            cap_jobs[vn]["hi" if rec.tip_end == 1 else "lo"] = ("old_out", rec)
        for rec in rest_outs:
            cap_jobs[z]["hi" if rec.tip_end == 1 else "lo"] = ("old_out", rec)
        for eid, opt in plan.items():
            if opt[0] == "donor":
                _, rec, host, fp, fs = opt
                # flipped contact: the keeping piece's end takes the touch
                if fs in cap_jobs[fp]:
                    return None
                cap_jobs[fp][fs] = ("flip_out", rec)
                # the freed tip lands on the piece hosting the new edge
                if not do_trim(rec, host):
                    return None
                continue
            _, tip, sd, body, pw = opt
            if sd in cap_jobs[tip]:
                return None
            if eid == self.pivot_edge:
                cap_jobs[tip][sd] = ("pivot", vn if tip == z else z)
            else:
                cap_jobs[tip][sd] = ("new", eid, body, pw)

        seg_ends = {}
        has_pivot = self.pivot_edge is not None
        pivot_host = None
        if has_pivot:
            for piece in (z, vn):
                for job in cap_jobs[piece].values():
                    if job[0] == "pivot":
                        pivot_host = vn if piece == z else z
        for piece in (z, vn):
            ins = arc_ins if piece == vn else rest_ins
            outs = arc_outs if piece == vn else rest_outs
            params = [r.param for r in ins if r.tip != z and id(r) not in flips]
            params += [r.param for r in ins if r.tip == z]
            params += [Fraction(r.tip_end) for r in outs]
            params += body_hits[piece]
            if piece == pivot_host:
                params.append(t_gap)
            if not params:
                params = [t_gap + delta if piece == vn else Fraction(1, 2)]
            lo_t, hi_t = min(params), max(params)
            res = {}
            for sd in ("lo", "hi"):
                job = cap_jobs[piece].get(sd)
                if job is None:
                    t_end = lo_t - delta if sd == "lo" else hi_t + delta
                    # keep free ends from crossing the partner at t_gap
                    if sd == "lo" and t_end <= t_gap < lo_t:
                        t_end = (t_gap + lo_t) / 2
                    if sd == "hi" and hi_t < t_gap <= t_end:
                        t_end = (t_gap + hi_t) / 2
                    res[sd] = self._on_line(lines[piece], t_end)
                else:
                    ptk = self._cap_point(piece, job, lines, t_gap)
                    if ptk is None:
                        return None
                    res[sd] = ptk
            if sgn(self.param(res["hi"]) - self.param(res["lo"]), self.exact) <= 0:
                return None
            seg_ends[piece] = (res["lo"], res["hi"])

        if not has_pivot:
            # the piece lines cross at t_gap; both spanning it is a crossing
            zl = self.param(seg_ends[z][0])
            zh = self.param(seg_ends[z][1])
            vl = self.param(seg_ends[vn][0])
            vh = self.param(seg_ends[vn][1])
            if zl < t_gap < zh and vl < t_gap < vh:
                return None

        new_reps[z] = seg_ends[z]
        new_reps[vn] = seg_ends[vn]
        for (orbit, e), ptx in trims.items():
            pp, qq = new_reps[orbit]
            new_reps[orbit] = (ptx, qq) if e == 0 else (pp, ptx)
        return ct.ContactSystem(group=self.group, reps=new_reps)

    def _on_line(self, line_pts, t):
        a, b = line_pts
        ta = self.param(a)
        tb = self.param(b)
        tt = coerce_coord(self.group, t)
        return vadd(a, vscale((tt - ta) / (tb - ta), vsub(b, a)))

    def _cap_point(self, piece, job, lines, t_gap):
        g = self.group
        if job[0] == "old_out":
            rec = job[1]
            if rec.body in (self.z, self.vn):
                in_dart = None
                for dart, (role, r2) in self.features.items():
                    if role == "in" and r2 is rec:
                        in_dart = dart
                if in_dart is None:
                    return None
                host = self.vn if in_dart in set(self.arc_darts) else self.z
                ba, bb = lines[host]
            else:
                ba, bb = self.system.reps[rec.body]
            ba, bb = g.apply(-rec.power, ba), g.apply(-rec.power, bb)
            return line_intersection(ba, bb, *lines[piece])
        if job[0] == "pivot":
            other = job[1]
            return self._on_line(lines[other], t_gap)
        if job[0] == "flip_out":
            rec = job[1]
            ba, bb = self.system.reps[rec.tip]
            ba, bb = g.apply(rec.power, ba), g.apply(rec.power, bb)
            return line_intersection(ba, bb, *lines[piece])
        _, eid, body, pw = job
        if body in (self.z, self.vn):
            if body == piece and pw == 0:
                return None
            ba, bb = lines[body]
        else:
            ba, bb = self.system.reps[body]
        ba, bb = g.apply(pw, ba), g.apply(pw, bb)
        return line_intersection(ba, bb, *lines[piece])


def _point_at(line_pts, param_fn, t, group):
    a, b = line_pts
    ta = param_fn(a)
    tb = param_fn(b)
    tt = coerce_coord(group, t)
    return vadd(a, vscale((tt - ta) / (tb - ta), vsub(b, a)))


def _min_gap_scale(params, exact):
    vals = [Fraction(0), Fraction(1)]
    vals.extend(params)
    vals = sorted(set(vals)) if exact else sorted(set(float(v) for v in vals))
    best = None
    for a, b in zip(vals, vals[1:]):
        gap = b - a
        if sgn(gap, exact) > 0 and (best is None or gap < best):
            best = gap
    if best is None:
        best = Fraction(1)
    return best / 8


def _dyadic_below(x, exact) -> Fraction:
    """Largest power of two at most x; keeps placement scales simple."""
    f = float(x)
    if f <= 0:
        return Fraction(1, 2**60)
    k = 0
    val = Fraction(1)
    while float(val) > f and k < 400:
        val /= 2
        k += 1
    while (val > x) if exact else (float(val) > f):
        val /= 2
        k += 1
        if k > 4000:
            break
    return val


# ---------------------------------------------------------------------------
# full certificate replay


def realize(seq, group, budget: int = 2600) -> ct.ContactSystem:
    """Replay a construction certificate into a validated contact system."""
    from .errors import GroupLevelMismatch

    if group.level() != seq.level:
        raise GroupLevelMismatch(
            f"group pairs with level {group.level()}, certificate has {seq.level}"
        )
    system = ct.realize_base(seq.base, group)
    cur = maps.make_base(seq.base)
    for step in seq.steps:
        if isinstance(step, TriangleSplit):
            system = apply_triangle_split_geometry(system, step, cur, budget)
        elif isinstance(step, QuadSplit):
            system = apply_quad_split_geometry(system, step, cur, budget)
        else:
            raise ValidationFailed(f"unknown step type {type(step).__name__}")
        cur = (
            moves.triangle_split(cur, step)
            if isinstance(step, TriangleSplit)
            else moves.quad_split(cur, step)
        )
    system.provenance = seq
    return system


def realize_map(amap: AnnulusMap, group, retries: int = 4) -> ct.ContactSystem:
    """Decompose-and-realize, trying alternative decompositions cheaply first."""
    from . import reduction

    level = group.level()
    seqs = [reduction.decompose(amap, level, scan_offset=off) for off in range(retries)]
    last = None
    for budget in (420, 2600):
        for seq in seqs:
            try:
                return realize(seq, group, budget=budget)
            except EpsilonExhausted as e:
                last = e
    raise last
