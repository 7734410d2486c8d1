"""Quaternion model of SU(2) and su(2).

SU(2) is the group of unit quaternions ``w + x i + y j + z k`` and su(2) the
space of pure quaternions, always in the ordered basis (i, j, k).  The inner
product on su(2) is ``<u, v> = -1/2 Tr(uv)``, which in these coordinates is
the Euclidean dot product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CentralElement

EPS_NORM = 1e-12
EPS_CENTER = 1e-9


def _raw_mul(a, b):
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return (
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    )


@dataclass(frozen=True)
class PureQuaternion:
    """An element ``x i + y j + z k`` of su(2)."""

    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, v) -> "PureQuaternion":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def __neg__(self):
        return PureQuaternion(-self.x, -self.y, -self.z)

    def __add__(self, other):
        return PureQuaternion(self.x + other.x, self.y + other.y, self.z + other.z)

    def __mul__(self, s):
        return PureQuaternion(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__


@dataclass(frozen=True)
class UnitQuaternion:
    """An element of SU(2) as a norm-one quaternion ``w + x i + y j + z k``.

    The constructor rejects components whose squared norm is off by more than
    ``EPS_NORM``; use :meth:`normalized` for user data.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > EPS_NORM:
            raise ValueError(f"quaternion is not of unit norm (|q|^2 = {n2!r})")

    @classmethod
    def normalized(cls, w, x, y, z) -> "UnitQuaternion":
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("cannot normalize the zero quaternion")
        return cls(w / n, x / n, y / n, z / n)

    @classmethod
    def from_array(cls, v) -> "UnitQuaternion":
        w, x, y, z = (float(c) for c in v)
        return cls.normalized(w, x, y, z)

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_axis_angle(cls, theta: float, axis) -> "UnitQuaternion":
        """``cos(theta) + sin(theta) * axis`` for a unit pure quaternion axis."""
        if isinstance(axis, PureQuaternion):
            axis = axis.to_array()
        a = np.asarray(axis, dtype=float)
        a = a / np.linalg.norm(a)
        s = math.sin(theta)
        return cls.normalized(math.cos(theta), s * a[0], s * a[1], s * a[2])

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_list(self) -> list:
        return [self.w, self.x, self.y, self.z]

    def vector_part(self) -> PureQuaternion:
        return PureQuaternion(self.x, self.y, self.z)

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    inverse = conjugate

    def __neg__(self):
        return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        return quat_mul(self, other)

    def __pow__(self, n: int) -> "UnitQuaternion":
        base = self if n >= 0 else self.conjugate()
        result = UnitQuaternion.identity()
        for _ in range(abs(n)):
            result = quat_mul(result, base)
        return result

    def distance(self, other) -> float:
        return float(np.linalg.norm(self.to_array() - other.to_array()))

    def is_central(self, tol: float = EPS_CENTER) -> bool:
        return abs(self.w) > 1.0 - tol

    def act(self, v):
        """Adjoint action ``v -> a v a^-1`` on a pure quaternion or 3-vector."""
        arr = v.to_array() if isinstance(v, PureQuaternion) else np.asarray(v, float)
        out = adjoint_matrix(self) @ arr
        return PureQuaternion.from_array(out) if isinstance(v, PureQuaternion) else out


@dataclass(frozen=True)
class AxisAngle:
    theta: float
    axis: PureQuaternion

    def to_quaternion(self) -> UnitQuaternion:
        return UnitQuaternion.from_axis_angle(self.theta, self.axis)


def quat_mul(a: UnitQuaternion, b: UnitQuaternion) -> UnitQuaternion:
    w, x, y, z = _raw_mul((a.w, a.x, a.y, a.z), (b.w, b.x, b.y, b.z))
    n2 = w * w + x * x + y * y + z * z
    if abs(n2 - 1.0) > EPS_NORM / 2:
        n = math.sqrt(n2)
        w, x, y, z = w / n, x / n, y / n, z / n
    return UnitQuaternion(w, x, y, z)


def axis_angle(a: UnitQuaternion, eps_center: float = EPS_CENTER) -> AxisAngle:
    """Unique ``(theta, P)`` in ``(0, pi) x S^2`` with ``a = cos(theta) + sin(theta) P``."""
    if abs(a.w) >= 1.0 - eps_center:
        raise CentralElement("axis/angle decomposition of +-1 is not unique")
    v = np.array([a.x, a.y, a.z])
    s = float(np.linalg.norm(v))
    # atan2 keeps full precision near both ends of (0, pi)
    theta = math.atan2(s, a.w)
    return AxisAngle(theta, PureQuaternion.from_array(v / s))


def adjoint_matrix(a: UnitQuaternion) -> np.ndarray:
    """Matrix of ``Ad_a : v -> a v a^-1`` in the basis (i, j, k)."""
    w, x, y, z = a.w, a.x, a.y, a.z
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def su2_inner(u, v) -> float:
    """``<u, v> = -1/2 Tr(uv)``; equal to the dot product of (i, j, k) coordinates."""
    ua = u.to_array() if isinstance(u, PureQuaternion) else np.asarray(u, float)
    va = v.to_array() if isinstance(v, PureQuaternion) else np.asarray(v, float)
    return float(ua @ va)


def random_unit_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    v = rng.standard_normal(4)
    return UnitQuaternion.normalized(*v)
