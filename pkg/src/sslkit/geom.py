"""Planar vectors, poses and field geometry.

All lengths are millimeters, all angles radians. The field frame is centered,
with x along the field length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class GeometryError(ValueError):
    """Raised when a geometric quantity is undefined for the given input."""


class Vec2(NamedTuple):
    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":  # type: ignore[override]
        return Vec2(self.x + other[0], self.y + other[1])

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other[0], self.y - other[1])

    def __mul__(self, k: float) -> "Vec2":  # type: ignore[override]
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> "Vec2":
        return Vec2(self.x / k, self.y / k)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def dot(self, other: "Vec2") -> float:
        return self.x * other[0] + self.y * other[1]

    def cross(self, other: "Vec2") -> float:
        return self.x * other[1] - self.y * other[0]

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> "Vec2":
        n = self.norm()
        if n == 0.0:
            raise GeometryError("cannot normalize a zero-length vector")
        return Vec2(self.x / n, self.y / n)

    def rotate(self, angle: float) -> "Vec2":
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)

    def dist(self, other: "Vec2") -> float:
        return math.hypot(self.x - other[0], self.y - other[1])


def normalize_angle(theta: float) -> float:
    """Wrap ``theta`` into (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose:
    pos: Vec2
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", Vec2(*self.pos))
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class FieldGeometry:
    """Rectangular playing area centered on the origin."""

    length: float = 12000.0
    width: float = 9000.0

    def __post_init__(self) -> None:
        if not (self.length > 0 and self.width > 0):
            raise ValueError("field length and width must be positive")

    @property
    def half_length(self) -> float:
        return self.length / 2.0

    @property
    def half_width(self) -> float:
        return self.width / 2.0

    def contains(self, p: Vec2, tol: float = 0.0) -> bool:
        return (abs(p[0]) <= self.half_length + tol
                and abs(p[1]) <= self.half_width + tol)


def angle_between(a: Vec2, b: Vec2) -> float:
    """Unsigned angle in [0, pi] between two nonzero vectors."""
    na = math.hypot(a[0], a[1])
    nb = math.hypot(b[0], b[1])
    if na == 0.0 or nb == 0.0:
        raise GeometryError("angle between zero-length vectors is undefined")
    # atan2 of (|cross|, dot) stays accurate near 0 and pi where acos does not
    cross = a[0] * b[1] - a[1] * b[0]
    dot = a[0] * b[0] + a[1] * b[1]
    return math.atan2(abs(cross), dot)


def ray_field_exit(origin: Vec2, direction: Vec2, field: FieldGeometry) -> Vec2:
    """First point where the ray from ``origin`` along ``direction`` meets the
    field boundary."""
    if not field.contains(origin, tol=1e-9):
        raise GeometryError(f"ray origin {tuple(origin)} lies outside the field")
    dx, dy = direction[0], direction[1]
    if dx == 0.0 and dy == 0.0:
        raise GeometryError("ray direction must be nonzero")
    hl, hw = field.half_length, field.half_width
    sx = sy = math.inf
    if dx != 0.0:
        sx = (math.copysign(hl, dx) - origin[0]) / dx
    if dy != 0.0:
        sy = (math.copysign(hw, dy) - origin[1]) / dy
    if sx <= sy:
        s = max(sx, 0.0)
        return Vec2(math.copysign(hl, dx), min(max(origin[1] + s * dy, -hw), hw))
    s = max(sy, 0.0)
    return Vec2(min(max(origin[0] + s * dx, -hl), hl), math.copysign(hw, dy))
