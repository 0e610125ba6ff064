"""Exact coordinate arithmetic: rationals, the field Q(sqrt 3), float fallback.

Rotations of finite order have rational matrices only for orders 1, 2 and 4;
orders 3 and 6 live in Q(sqrt 3). Everything else runs on floats behind
conservative tolerance predicates.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

TAU = 1e-9


class QSqrt3:
    """a + b*sqrt(3) with rational a, b; exact field arithmetic."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __add__(self, other):
        other = _coerce(other)
        return QSqrt3(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return QSqrt3(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return QSqrt3(
            self.a * other.a + 3 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        den = other.a * other.a - 3 * other.b * other.b
        if den == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt3)")
        inv = QSqrt3(other.a / den, -other.b / den)
        return self * inv

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def sign(self) -> int:
        a, b = self.a, self.b
        if a == 0 and b == 0:
            return 0
        if a >= 0 and b >= 0:
            return 1
        if a <= 0 and b <= 0:
            return -1
        # opposite signs: compare a^2 with 3 b^2
        lhs = a * a
        rhs = 3 * b * b
        if a > 0:
            return 1 if lhs > rhs else -1
        return -1 if lhs > rhs else 1

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __lt__(self, other):
        return (self - _coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - _coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - _coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - _coerce(other)).sign() >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(3.0)

    def __repr__(self):
        return f"QSqrt3({self.a}, {self.b})"


def _coerce(x) -> QSqrt3:
    if isinstance(x, QSqrt3):
        return x
    if isinstance(x, (int, Fraction)):
        return QSqrt3(x, 0)
    raise TypeError(f"cannot coerce {type(x).__name__} into Q(sqrt3)")


Number = Union[int, Fraction, QSqrt3, float]
Vec = tuple  # (Number, Number)


def sgn(x, exact: bool = True) -> int:
    if isinstance(x, QSqrt3):
        return x.sign()
    if isinstance(x, float) or not exact:
        if abs(x) <= TAU:
            return 0
        return 1 if x > 0 else -1
    return (x > 0) - (x < 0)


def vadd(p: Vec, q: Vec) -> Vec:
    return (p[0] + q[0], p[1] + q[1])


def vsub(p: Vec, q: Vec) -> Vec:
    return (p[0] - q[0], p[1] - q[1])


def vscale(c, p: Vec) -> Vec:
    return (c * p[0], c * p[1])


def cross(p: Vec, q: Vec):
    return p[0] * q[1] - p[1] * q[0]


def dot(p: Vec, q: Vec):
    return p[0] * q[0] + p[1] * q[1]


def sqdist(p: Vec, q: Vec):
    d = vsub(p, q)
    return dot(d, d)


def orient(o: Vec, a: Vec, b: Vec, exact: bool = True) -> int:
    """Sign of the cross product (a-o) x (b-o)."""
    return sgn(cross(vsub(a, o), vsub(b, o)), exact)


def on_segment(p: Vec, a: Vec, b: Vec, exact: bool = True) -> str:
    """'interior', 'end', or 'off' for point p against segment ab."""
    if orient(a, b, p, exact) != 0:
        return "off"
    d = vsub(b, a)
    t = dot(vsub(p, a), d)
    full = dot(d, d)
    st = sgn(t, exact)
    sf = sgn(t - full, exact)
    if st == 0 or sf == 0:
        return "end"
    if st > 0 and sf < 0:
        return "interior"
    return "off"


def seg_intersections(a: Vec, b: Vec, c: Vec, d: Vec, exact: bool = True):
    """Classify how segments ab and cd meet.

    Returns one of: 'disjoint', 'touch' (a single point that is an endpoint
    of exactly one and interior to the other), or 'bad' (anything else:
    proper crossing, endpoint-endpoint, overlap, ...).
    """
    r = vsub(b, a)
    s = vsub(d, c)
    denom = cross(r, s)
    if sgn(denom, exact) == 0:
        # parallel: bad iff collinear with overlapping closures
        if orient(a, b, c, exact) != 0:
            return "disjoint"
        t0 = dot(vsub(c, a), r)
        t1 = dot(vsub(d, a), r)
        lo, hi = min(t0, t1), max(t0, t1)
        full = dot(r, r)
        if sgn(hi, exact) < 0 or sgn(lo - full, exact) > 0:
            return "disjoint"
        return "bad"
    qp = vsub(c, a)
    t_num = cross(qp, s)
    u_num = cross(qp, r)
    # intersection at t = t_num/denom along ab, u = u_num/denom along cd
    if sgn(denom, exact) < 0:
        t_num, u_num, denom = -t_num, -u_num, -denom
    st0 = sgn(t_num, exact)
    st1 = sgn(t_num - denom, exact)
    su0 = sgn(u_num, exact)
    su1 = sgn(u_num - denom, exact)
    if st0 < 0 or st1 > 0 or su0 < 0 or su1 > 0:
        return "disjoint"
    t_end = st0 == 0 or st1 == 0
    u_end = su0 == 0 or su1 == 0
    if t_end and u_end:
        return "bad"
    if t_end or u_end:
        return "touch"
    return "bad"


def line_intersection(a: Vec, b: Vec, c: Vec, d: Vec):
    """Intersection point of lines ab and cd; None if parallel."""
    r = vsub(b, a)
    s = vsub(d, c)
    denom = cross(r, s)
    if denom == 0:
        return None
    t = cross(vsub(c, a), s) / denom
    return vadd(a, vscale(t, r))


def solve2x2(m00, m01, m10, m11, r0, r1):
    """Solve the 2x2 system m x = r; None when singular."""
    det = m00 * m11 - m01 * m10
    if det == 0:
        return None
    x = (r0 * m11 - r1 * m01) / det
    y = (m00 * r1 - m10 * r0) / det
    return (x, y)
