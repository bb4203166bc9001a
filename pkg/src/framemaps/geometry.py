"""Coordinate machinery on the cube (-1, 1)^n.

The cube is split into 2n pyramidal cones, one per face; a point belongs to
the cone of the coordinate that attains its max-norm.  Faces are identified
with the (n-1)-cube by dropping the fixed coordinate, and a face is split
into 2^(n-1) quadrants of half the size.

Scalar helpers take plain sequences; the ``*_batch`` variants work on
``(N, n)`` arrays and are what the map evaluators use internally.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MinDimension, NotOnFace, ZeroPoint


@dataclass(frozen=True)
class ConeId:
    """Cone (equivalently face) of the cube: ``axis`` is 1-based."""

    axis: int
    sign: int

    def __post_init__(self):
        if self.axis < 1:
            raise ValueError(f"axis must be >= 1, got {self.axis}")
        if self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def index(self) -> int:
        """Position in the canonical 2n ordering (+x1, -x1, +x2, ...)."""
        return 2 * (self.axis - 1) + (0 if self.sign > 0 else 1)

    @classmethod
    def from_index(cls, index: int) -> "ConeId":
        return cls(index // 2 + 1, 1 if index % 2 == 0 else -1)


@dataclass(frozen=True)
class QuadrantId:
    signs: tuple[int, ...]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * np.asarray(self.signs, dtype=float)


def _as_point(x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise MinDimension("a point needs at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def inf_norm(x: Sequence[float]) -> float:
    return float(np.max(np.abs(_as_point(x))))


def cone_of(x: Sequence[float]) -> ConeId:
    """Cone containing ``x``; ties go to the smallest axis."""
    arr = _as_point(x)
    i = int(np.argmax(np.abs(arr)))
    if arr[i] == 0.0:
        raise ZeroPoint("the origin belongs to no cone")
    return ConeId(i + 1, 1 if arr[i] > 0 else -1)


def face_chart(c: ConeId, x: Sequence[float]) -> np.ndarray:
    arr = _as_point(x)
    if arr.size < 2:
        raise MinDimension("face chart needs dimension >= 2")
    if c.axis > arr.size:
        raise ValueError(f"axis {c.axis} out of range for dimension {arr.size}")
    if arr[c.axis - 1] != c.sign:
        raise NotOnFace(f"x[{c.axis}] = {arr[c.axis - 1]!r} is not {c.sign}")
    return np.delete(arr, c.axis - 1)


def face_unchart(c: ConeId, y: Sequence[float]) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise MinDimension("face coordinates must have dimension >= 1")
    if c.axis > arr.size + 1:
        raise ValueError(f"axis {c.axis} out of range for dimension {arr.size + 1}")
    return np.insert(arr, c.axis - 1, float(c.sign))


def quadrant_of(y: Sequence[float]) -> QuadrantId:
    """Quadrant of the face point ``y``; a zero coordinate counts as positive."""
    arr = _as_point(y)
    return QuadrantId(tuple(int(s) for s in np.where(arr >= 0, 1, -1)))


# -- batch versions --------------------------------------------------------

def other_axes(d: int) -> np.ndarray:
    """Row ``a`` lists the axes other than ``a`` in increasing order."""
    return np.array([[j for j in range(d) if j != a] for a in range(d)], dtype=np.intp)


def cone_of_batch(x: np.ndarray):
    """Return ``(axis, sign, radius, runner_up)`` for every row of ``x``.

    ``axis`` is 0-based.  ``runner_up`` is the second largest absolute
    coordinate, used to measure the distance to the cone boundary.
    """
    ax = np.abs(x)
    axis = np.argmax(ax, axis=1)
    rows = np.arange(x.shape[0])
    r = ax[rows, axis]
    sign = np.where(x[rows, axis] >= 0, 1, -1)
    if x.shape[1] > 1:
        runner_up = np.partition(ax, -2, axis=1)[:, -2]
    else:
        runner_up = np.zeros_like(r)
    return axis, sign, r, runner_up
