"""Symmetry groups: a translation or a finite-order rotation about a center."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InputError, UnsupportedGroup
from .numbers import QSqrt3, Vec, vadd, vscale, vsub


@dataclass(frozen=True)
class SymmetryGroup:
    kind: str  # "translation" | "rotation"
    vector: Optional[Vec] = None
    order: Optional[int] = None
    center: Optional[Vec] = None

    def __post_init__(self):
        if self.kind == "translation":
            if self.vector is None or (self.vector[0] == 0 and self.vector[1] == 0):
                raise InputError("translation needs a nonzero vector")
        elif self.kind == "rotation":
            if self.order is None or self.order < 1:
                raise InputError("rotation order must be >= 1")
        else:
            raise InputError(f"unknown group kind {self.kind!r}")

    @property
    def exact(self) -> bool:
        if self.kind == "translation":
            return True
        return self.order in (1, 2, 3, 4, 6)

    @property
    def number_system(self) -> str:
        if self.kind == "translation" or self.order in (1, 2, 4):
            return "rational"
        if self.order in (3, 6):
            return "quadratic_sqrt3"
        return "float"

    def level(self) -> int:
        """Sparsity level paired with this group by the main theorems."""
        if self.kind == "translation" or self.order == 2:
            return 2
        if self.order is not None and self.order >= 3:
            return 1
        raise UnsupportedGroup("trivial rotation pairs with balanced maps only")

    def rotation_matrix(self, power: int):
        k = self.order
        p = power % k
        c, s = _COS_SIN_EXACT.get((k, p), (None, None))
        if c is None:
            ang = 2.0 * math.pi * p / k
            c, s = math.cos(ang), math.sin(ang)
        return c, s

    def apply(self, power: int, point: Vec) -> Vec:
        if self.kind == "translation":
            return vadd(point, vscale(power, self.vector))
        ctr = self.center if self.center is not None else (Fraction(0), Fraction(0))
        c, s = self.rotation_matrix(power)
        x, y = vsub(point, ctr)
        return vadd(ctr, (c * x - s * y, s * x + c * y))

    def powers(self, window: int):
        if self.kind == "translation":
            return range(-window, window + 1)
        return range(self.order)


def _build_exact_tables():
    F = Fraction
    table = {}
    base = {
        1: [(F(1), F(0))],
        2: [(F(1), F(0)), (F(-1), F(0))],
        4: [(F(1), F(0)), (F(0), F(1)), (F(-1), F(0)), (F(0), F(-1))],
        3: [
            (QSqrt3(1), QSqrt3(0)),
            (QSqrt3(F(-1, 2)), QSqrt3(0, F(1, 2))),
            (QSqrt3(F(-1, 2)), QSqrt3(0, F(-1, 2))),
        ],
        6: [
            (QSqrt3(1), QSqrt3(0)),
            (QSqrt3(F(1, 2)), QSqrt3(0, F(1, 2))),
            (QSqrt3(F(-1, 2)), QSqrt3(0, F(1, 2))),
            (QSqrt3(-1), QSqrt3(0)),
            (QSqrt3(F(-1, 2)), QSqrt3(0, F(-1, 2))),
            (QSqrt3(F(1, 2)), QSqrt3(0, F(-1, 2))),
        ],
    }
    for k, rows in base.items():
        for p, (c, s) in enumerate(rows):
            table[(k, p)] = (c, s)
    return table


_COS_SIN_EXACT = _build_exact_tables()


def translation(vx, vy) -> SymmetryGroup:
    return SymmetryGroup(kind="translation", vector=(Fraction(vx), Fraction(vy)))


def rotation(order: int, center: Optional[Vec] = None) -> SymmetryGroup:
    if center is None:
        if order in (3, 6):
            center = (QSqrt3(0), QSqrt3(0))
        elif order in (1, 2, 4):
            center = (Fraction(0), Fraction(0))
        else:
            center = (0.0, 0.0)
    return SymmetryGroup(kind="rotation", order=order, center=center)


def coerce_coord(group: SymmetryGroup, value):
    """Bring a number into the group's working number system."""
    if group.number_system == "quadratic_sqrt3":
        return value if isinstance(value, QSqrt3) else QSqrt3(Fraction(value))
    if group.number_system == "float":
        return float(value)
    return Fraction(value)


def coerce_point(group: SymmetryGroup, x, y) -> Vec:
    return (coerce_coord(group, x), coerce_coord(group, y))
