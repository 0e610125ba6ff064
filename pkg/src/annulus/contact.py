"""Symmetric contact systems of segments and their quotient A-graphs.

A ContactSystem stores one representative segment per vertex orbit plus the
symmetry group. Validation checks the genericity conditions (group-invariant
family, finite orbits, no point interior to two segments or an endpoint of
two, trivial stabilisers) inside a finite checking window, and extraction
rebuilds the quotient combinatorial map: vertices are segment orbits, edges
are contact orbits, the rotation comes from the order of contact points
around each segment, and the two end faces are located by exact ray shooting
toward the two ends of the quotient annulus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import maps
from .errors import GroupLevelMismatch, InputError, ValidationFailed
from .groups import SymmetryGroup, coerce_point
from .maps import AnnulusMap, Dart
from .numbers import (
    cross,
    dot,
    on_segment,
    seg_intersections,
    sgn,
    solve2x2,
    vadd,
    vscale,
    vsub,
)

Segment = tuple  # (point, point)


@dataclass
class ContactSystem:
    group: SymmetryGroup
    reps: dict[str, Segment]
    provenance: Optional[object] = None

    def instance(self, orbit: str, power: int) -> Segment:
        p, q = self.reps[orbit]
        return (self.group.apply(power, p), self.group.apply(power, q))


@dataclass
class ContactRecord:
    """Endpoint `tip_end` of gamma^power rep[tip] lies inside rep[body]."""

    edge: str
    tip: str
    tip_end: int
    power: int
    body: str
    point: tuple
    param: object
    side: int


@dataclass
class ContactCert:
    quotient_graph: AnnulusMap
    free_end_orbit_count: int
    log: list[str] = field(default_factory=list)
    contacts: list[ContactRecord] = field(default_factory=list)
    dart_info: dict = field(default_factory=dict)
    entries: dict = field(default_factory=dict)


def _exact(system: ContactSystem) -> bool:
    return system.group.number_system != "float"


def window_bound(system: ContactSystem) -> int:
    """Translation powers that can interact; rotations use the full group."""
    g = system.group
    if g.kind == "rotation":
        return g.order
    v = g.vector
    vv = dot(v, v)
    spans = []
    for p, q in system.reps.values():
        spans.append((min(dot(p, v), dot(q, v)), max(dot(p, v), dot(q, v))))
    t = 1
    for lo1, hi1 in spans:
        for lo2, hi2 in spans:
            # gamma^t moves proj by t*vv; overlap needs lo2 + t*vv <= hi1
            reach = (hi1 - lo2) / vv
            t = max(t, int(reach) + 2)
    return t


def _pairs(system: ContactSystem, window: int):
    ids = sorted(system.reps)
    if system.group.kind == "rotation":
        powers = [p for p in range(system.group.order)]
    else:
        powers = [p for p in range(-window, window + 1)]
    for i_idx, i in enumerate(ids):
        for j in ids[i_idx:]:
            for t in powers:
                if i == j and t == 0:
                    continue
                if system.group.kind == "rotation" or i != j or t > 0:
                    yield i, j, t


def validate_system(system: ContactSystem, window: Optional[int] = None) -> list[str]:
    """Genericity (generic contact system + trivial stabilisers); raises on failure."""
    exact = _exact(system)
    log = []
    for orbit, (p, q) in system.reps.items():
        if p == q or sgn(sqnorm(vsub(p, q)), exact) == 0:
            raise ValidationFailed(f"segment {orbit} is degenerate")
    if window is None:
        window = window_bound(system)
    g = system.group
    if g.kind == "rotation" and g.order >= 2:
        ctr = g.center
        for orbit in system.reps:
            p, q = system.reps[orbit]
            if on_segment(ctr, p, q, exact) != "off":
                raise ValidationFailed(
                    f"segment {orbit} passes through the rotation center"
                )
    for i, j, t in _pairs(system, window):
        a, b = system.reps[i]
        c, d = system.instance(j, t)
        kind = seg_intersections(a, b, c, d, exact)
        if kind == "bad":
            raise ValidationFailed(
                f"segments {i} and {j}^({t}) intersect non-generically"
            )
    log.append(f"window={window} pairwise genericity ok")
    return log


def sqnorm(v):
    return dot(v, v)


def _param_of(p, a, b):
    d = vsub(b, a)
    return dot(vsub(p, a), d) / dot(d, d)


def collect_contacts(system: ContactSystem, window: Optional[int] = None):
    """All contact records, tips normalized onto representative bodies."""
    exact = _exact(system)
    if window is None:
        window = window_bound(system)
    g = system.group
    if g.kind == "rotation":
        powers = list(range(g.order))
    else:
        powers = list(range(-window, window + 1))
    recs = []
    ids = sorted(system.reps)
    for i in ids:
        for e in (0, 1):
            for j in ids:
                for t in powers:
                    if i == j and t == 0:
                        continue
                    tip = g.apply(t, system.reps[i][e])
                    a, b = system.reps[j]
                    if on_segment(tip, a, b, exact) == "interior":
                        other = g.apply(t, system.reps[i][1 - e])
                        side = sgn(cross(vsub(b, a), vsub(other, tip)), exact)
                        if side == 0:
                            raise ValidationFailed(
                                f"collinear contact between {i} and {j}"
                            )
                        recs.append(
                            ContactRecord(
                                edge="",
                                tip=i,
                                tip_end=e,
                                power=t,
                                body=j,
                                point=tip,
                                param=_param_of(tip, a, b),
                                side=side,
                            )
                        )
    recs.sort(key=lambda r: (r.tip, r.tip_end))
    for n, r in enumerate(recs):
        r.edge = f"c{n}"
    # genericity: each endpoint belongs to at most one contact
    seen = set()
    for r in recs:
        key = (r.tip, r.tip_end)
        if key in seen:
            raise ValidationFailed(f"endpoint {key} touches two segments")
        seen.add(key)
    return recs


def _kappa(entry):
    """Cyclic position on the circle around a collapsed segment."""
    kind, param = entry
    if kind == "cap1":
        return (0, 0)
    if kind == "north":
        return (1, -param)
    if kind == "cap0":
        return (2, 0)
    return (3, param)


def build_quotient(system: ContactSystem, window: Optional[int] = None) -> ContactCert:
    """Trace the quotient map; raises ValidationFailed on non-generic input."""
    log = validate_system(system, window)
    recs = collect_contacts(system, window)
    if system.group.kind == "translation" and window is None:
        # window stability: recompute one layer wider and compare
        wide = collect_contacts(system, window_bound(system) + 1)
        key = lambda rs: sorted((r.tip, r.tip_end, r.power, r.body) for r in rs)
        if key(recs) != key(wide):
            raise ValidationFailed("checking window too small for this system")
        log.append("window stable under enlargement")

    ids = sorted(system.reps)
    out_at: dict[tuple[str, int], ContactRecord] = {}
    ons: dict[str, list[ContactRecord]] = {i: [] for i in ids}
    for r in recs:
        out_at[(r.tip, r.tip_end)] = r
        ons[r.body].append(r)

    edges = []
    rotation: dict[str, list[Dart]] = {i: [] for i in ids}
    dart_info = {}
    entries: dict[str, list] = {i: [] for i in ids}
    for i in ids:
        # out-darts at caps
        if (i, 1) in out_at:
            r = out_at[(i, 1)]
            entries[i].append((("cap1", 0), Dart(r.edge, 1)))
            dart_info[Dart(r.edge, 1)] = ("out", r)
        if (i, 0) in out_at:
            r = out_at[(i, 0)]
            entries[i].append((("cap0", 0), Dart(r.edge, 1)))
            dart_info[Dart(r.edge, 1)] = ("out", r)
        for r in ons[i]:
            kind = "north" if r.side > 0 else "south"
            entries[i].append(((kind, r.param), Dart(r.edge, -1)))
            dart_info[Dart(r.edge, -1)] = ("in", r)
        entries[i].sort(key=lambda kv: _kappa(kv[0]))
        rotation[i] = [d for _, d in entries[i]]
    for r in recs:
        edges.append((r.edge, r.tip, r.body))
    edges.sort()

    # connectivity check before end location
    if not edges and len(ids) != 1:
        raise ValidationFailed("contact system has no contacts but several orbits")
    end0, end1 = _locate_ends(system, recs, entries, edges, rotation)
    quotient = maps.build_indexed(ids, edges, rotation, (end0, end1))
    free = 2 * len(ids) - sum(1 for _ in out_at)
    if free != maps.f_count_map(quotient):
        raise ValidationFailed("free end count disagrees with the f-count")
    log.append(f"contacts={len(recs)} free_end_orbits={free}")
    return ContactCert(
        quotient_graph=quotient,
        free_end_orbit_count=free,
        log=log,
        contacts=recs,
        dart_info=dart_info,
        entries=entries,
    )


def _face_at(entries, faces, face_of, orbit, kappa_star, succ):
    """Face owning the circle gap that contains kappa_star at this orbit."""
    darts = entries[orbit]
    if not darts:
        raise ValidationFailed("ray hit an isolated segment region")
    n = len(darts)
    prev = None
    for idx in range(n):
        if _kappa(darts[idx][0]) < kappa_star:
            prev = darts[idx][1]
        else:
            break
    if prev is None:
        prev = darts[-1][1]
    return face_of[succ[prev]]


def _locate_ends(system, recs, entries, edges, rotation):
    faces, face_of = maps._trace_faces(edges, rotation)
    if not edges:
        return 0, 0
    succ = {}
    for v, rot in rotation.items():
        for i, d in enumerate(rot):
            succ[d] = rot[(i + 1) % len(rot)]
    exact = _exact(system)
    g = system.group
    window = window_bound(system)
    instances = []
    ids = sorted(system.reps)
    if g.kind == "rotation":
        powers = list(range(g.order))
    else:
        powers = list(range(-window, window + 1))
    for i in ids:
        for t in powers:
            instances.append((i, t, system.instance(i, t)))

    def side_portion(orbit, t, param, side):
        # normalize instance hit to the representative (isometries preserve
        # param and side for orientation-preserving maps)
        kind = "north" if side > 0 else "south"
        return _face_at(entries, faces, face_of, orbit, _kappa((kind, param)), succ)

    if g.kind == "translation":
        v = g.vector
        hits = _generic_transversal_hits(system, instances, v, exact)
        # maximize/minimize height h = cross(v, P)
        up = max(hits, key=lambda rec: rec[0])
        down = min(hits, key=lambda rec: rec[0])
        end_up = side_portion(
            up[1], up[2], up[3], up[4]
        )
        end_down = side_portion(down[1], down[2], down[3], -down[4])
        return end_up, end_down
    # rotation: ray from the center outward
    ctr = g.center
    hits = _generic_ray_hits(system, instances, ctr, exact)
    first = min(hits, key=lambda rec: rec[0])
    last = max(hits, key=lambda rec: rec[0])
    end_center = side_portion(first[1], first[2], first[3], -first[4])
    end_inf = side_portion(last[1], last[2], last[3], last[4])
    return end_inf, end_center


def _generic_transversal_hits(system, instances, v, exact):
    """Cross the whole system with a generic line parallel to v's normal.

    The crossing instances are enumerated per orbit from the exact power
    range whose u-span contains the transversal, so no crossing is lost to
    window truncation.
    """
    n = (-v[1], v[0])
    g = system.group
    uv = dot(v, v)
    spans = {}
    for orbit, (p, q) in system.reps.items():
        up, uq = dot(p, v), dot(q, v)
        spans[orbit] = (min(up, uq), max(up, uq), (p, q))
    base_events = sorted({dot(p, v) for _, (p, q) in system.reps.items()}
                         | {dot(q, v) for _, (p, q) in system.reps.items()})
    candidates = []
    for a, b in zip(base_events, base_events[1:]):
        if sgn(b - a, exact) > 0:
            candidates.append((a + b) / 2)
    for j in range(1, 8):
        candidates.append(base_events[0] + Fraction(1, 2**j) * uv)
    for u_star in candidates:
        hits = []
        ok = True
        for orbit, (lo, hi, (p, q)) in spans.items():
            # powers t with lo + t*uv <= u_star <= hi + t*uv
            t_min = _ceil_div(u_star - hi, uv)
            t_max = _floor_div(u_star - lo, uv)
            t = t_min
            while t <= t_max:
                pp = g.apply(t, p)
                qq = g.apply(t, q)
                up, uq = dot(pp, v), dot(qq, v)
                if sgn(up - u_star, exact) == 0 or sgn(uq - u_star, exact) == 0:
                    ok = False
                    break
                if sgn(up - u_star, exact) != sgn(uq - u_star, exact):
                    s = (u_star - up) / (uq - up)
                    pt = vadd(pp, vscale(s, vsub(qq, pp)))
                    h = cross(v, pt)
                    side_up = sgn(cross(vsub(qq, pp), n), exact)
                    hits.append((h, orbit, t, s, side_up))
                t += 1
            if not ok:
                break
        if ok and hits:
            return hits
    raise ValidationFailed("no generic transversal found for end location")


def _ceil_div(a, b):
    from math import ceil

    return int(ceil(a / b)) if isinstance(a / b, float) else -int((-a) // b)


def _floor_div(a, b):
    from math import floor

    return int(floor(a / b)) if isinstance(a / b, float) else int(a // b)


def _generic_ray_hits(system, instances, ctr, exact):
    # aim the ray at interior points of the first instance: finitely many
    # aims are spoiled by endpoint alignments, so some denominator works
    p0, q0 = instances[0][2]
    aims = []
    for den in range(2, 64):
        for num in range(1, den):
            if _gcd(num, den) == 1:
                aims.append(Fraction(num, den))
    for lam in aims:
        target = vadd(p0, vscale(_like(p0[0], lam), vsub(q0, p0)))
        d = vsub(target, ctr)
        if sgn(dot(d, d), exact) == 0:
            continue
        hits = []
        ok = True
        for orbit, t, (p, q) in instances:
            cp = cross(d, vsub(p, ctr))
            cq = cross(d, vsub(q, ctr))
            sp, sq = sgn(cp, exact), sgn(cq, exact)
            if sp == 0 or sq == 0:
                ok = False
                break
            if sp == sq:
                continue
            # ray ctr + s*d crosses segment at param u along pq
            u = cp / (cp - cq)
            pt = vadd(p, vscale(u, vsub(q, p)))
            s = dot(vsub(pt, ctr), d)
            if sgn(s, exact) <= 0:
                continue  # crossing behind the ray start
            side_fwd = sgn(cross(vsub(q, p), d), exact)
            hits.append((s / dot(d, d), orbit, t, u, side_fwd))
        if ok and hits:
            return hits
    raise ValidationFailed("no generic ray found for end location")


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _like(sample, frac: Fraction):
    """Bring a rational constant into the number system of `sample`."""
    if isinstance(sample, float):
        return float(frac)
    if hasattr(sample, "sign"):
        from .numbers import QSqrt3

        return QSqrt3(frac)
    return frac


def extract_quotient_graph(system: ContactSystem) -> ContactCert:
    return build_quotient(system)


# ---------------------------------------------------------------------------
# sweep validator (monotone traversal terminates at a free end)


def sweep_to_free_end(system: ContactSystem, cert: ContactCert, start_orbit: str):
    """Walk upward (translation) or outward (rotation) along contacts."""
    exact = _exact(system)
    g = system.group
    out_at = {}
    for r in cert.contacts:
        out_at[(r.tip, r.tip_end)] = r

    def height(pt):
        if g.kind == "translation":
            return cross(g.vector, pt)
        return sqnorm(vsub(pt, g.center))

    orbit = start_orbit
    power = 0
    steps = 0
    limit = 4 * (len(system.reps) + 2) * (window_bound(system) * 2 + 2)
    while True:
        steps += 1
        if steps > limit:
            raise ValidationFailed("monotone sweep failed to terminate")
        p, q = system.instance(orbit, power)
        hp, hq = height(p), height(q)
        e = 1 if sgn(hq - hp, exact) >= 0 else 0
        rec = out_at.get((orbit, e))
        if rec is None:
            return orbit, e
        # the tip of gamma^rec.power rep[orbit] sits on rep[rec.body]; our
        # instance is gamma^power rep[orbit], so the body instance follows
        if g.kind == "rotation":
            new_power = (power - rec.power) % g.order
        else:
            new_power = power - rec.power
        orbit, power = rec.body, new_power


# ---------------------------------------------------------------------------
# base realizations


def realize_base(base: str, group: SymmetryGroup) -> ContactSystem:
    """Hand-placed configurations for K, L, M, validated before returning."""
    g = group
    if base == "K":
        system = _base_K(g)
    elif base == "L":
        if not (g.kind == "translation" or g.order == 2):
            raise GroupLevelMismatch("L pairs with a translation or 2-fold rotation")
        system = _base_L(g)
    elif base == "M":
        if g.kind != "rotation" or g.order < 3:
            raise GroupLevelMismatch("M pairs with a rotation of order >= 3")
        system = _base_M(g)
    else:
        raise InputError(f"unknown base {base!r}")
    cert = build_quotient(system)
    expected = maps.make_base(base)
    if not maps.isomorphic(cert.quotient_graph, expected):
        raise ValidationFailed(f"base {base} realization has the wrong quotient")
    return system


def _base_K(g: SymmetryGroup) -> ContactSystem:
    pt = lambda x, y: coerce_point(g, x, y)
    if g.kind == "rotation" and g.order >= 2:
        # keep the configuration far from the center so copies stay disjoint
        shift = Fraction(10)
    else:
        shift = Fraction(0)
    a0 = pt(shift, 0)
    a1 = pt(shift + Fraction(1, 2), Fraction(1, 2))
    b0 = pt(shift + Fraction(1, 4), Fraction(1, 4))
    b1 = pt(shift + Fraction(5, 8), Fraction(1, 8))
    return ContactSystem(group=g, reps={"a": (a0, a1), "b": (b0, b1)})


def _base_L(g: SymmetryGroup) -> ContactSystem:
    pt = lambda x, y: coerce_point(g, x, y)
    if g.kind == "translation":
        base = ContactSystem(
            group=g,
            reps={
                "a": (pt(0, 0), pt(Fraction(1, 2), Fraction(1, 2))),
                "b": (
                    pt(Fraction(2, 5), Fraction(2, 5)),
                    pt(Fraction(11, 10), Fraction(1, 10)),
                ),
            },
        )
        if g.vector != (Fraction(1), Fraction(0)):
            # map the unit-x design through the linear map sending (1,0) to v
            v = g.vector
            w = (-v[1], v[0])
            remap = lambda p: vadd(vscale(p[0], v), vscale(p[1], w))
            base.reps = {k: (remap(p), remap(q)) for k, (p, q) in base.reps.items()}
        return base
    # order-2 rotation about the center
    ctr = g.center
    pt2 = lambda x, y: vadd(ctr, pt(x, y))
    return ContactSystem(
        group=g,
        reps={
            "a": (pt2(1, 1), pt2(1, -1)),
            "b": (pt2(1, Fraction(1, 3)), pt2(-1, 0)),
        },
    )


def _base_M(g: SymmetryGroup) -> ContactSystem:
    # endpoints p0=(1,0)+ctr and p1 solving rho(p1) = midpoint(p0, p1)
    c, s = g.rotation_matrix(g.order - 1)
    one = c - c + 1 if not isinstance(c, float) else 1.0
    p0 = (one, one - one)
    m00 = 1 - c / 2
    m01 = s / 2
    m10 = -s / 2
    m11 = 1 - c / 2
    r0 = (c * p0[0] - s * p0[1]) / 2
    r1 = (s * p0[0] + c * p0[1]) / 2
    sol = solve2x2(m00, m01, m10, m11, r0, r1)
    if sol is None:
        raise ValidationFailed("degenerate loop construction")
    ctr = g.center
    return ContactSystem(
        group=g, reps={"a": (vadd(ctr, p0), vadd(ctr, sol))}
    )
