"""Dyadic Whitney decomposition of D = (-3, 3)^n into cube shells.

Generation 1 is the central cube (-1, 1)^n.  For k >= 2 the shell

    Q_k \\ Q_{k-1},   Q_k = (-(3 - 2^(2-k)), 3 - 2^(2-k))^n,

is one cube thick and tiled by lattice cubes of side h_k = 2^(2-k).  Since the
inner and outer shell radii are integer multiples of h_k, every shell cube is
a cell ``[m h_k, (m+1) h_k)`` of the lattice h_k Z^n.  Cubes are identified by
``(generation, m)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DepthExceeded, OutOfDomain
from .geometry import ConeId

DOMAIN_HALF_WIDTH = 3.0
DEFAULT_K_MAX = 40


class NeighborKind(enum.Enum):
    SAME = "Same"
    LARGER = "Larger"
    SMALLER = "Smaller"
    OUTER = "Outer"


@dataclass(frozen=True)
class DyadicCube:
    generation: int
    index: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return 2.0 if self.generation == 1 else 2.0 ** (2 - self.generation)

    @property
    def half_side(self) -> float:
        return 0.5 * self.side

    @property
    def center(self) -> np.ndarray:
        if self.generation == 1:
            return np.zeros(self.dim)
        return (np.asarray(self.index, dtype=float) + 0.5) * self.side

    @property
    def is_central(self) -> bool:
        return self.generation == 1

    def contains(self, y: Sequence[float]) -> bool:
        """Closed containment test."""
        y = np.asarray(y, dtype=float)
        return bool(np.all(np.abs(y - self.center) <= self.half_side))

    def volume(self) -> float:
        return self.side ** self.dim


def central_cube(n: int) -> DyadicCube:
    return DyadicCube(1, (0,) * n)


def ring_bounds(k: int) -> tuple[float, float]:
    """Inner and outer half-widths of shell ``k`` (its cubes have side 2^(2-k))."""
    if k < 1:
        raise ValueError(f"generation must be >= 1, got {k}")
    if k == 1:
        return 0.0, 1.0
    return 3.0 - 2.0 ** (3 - k), 3.0 - 2.0 ** (2 - k)


def ring_cube_count(k: int, n: int) -> int:
    """Number of cubes of generation ``k`` in dimension ``n``.

    Shell volume divided by cube volume, in exact integer arithmetic:
    (6/h - 2)^n - (6/h - 4)^n with 6/h = 3 * 2^(k-1).
    """
    if k < 2:
        raise ValueError(f"shell generations start at 2, got {k}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    m = 3 * 2 ** (k - 1)
    return (m - 2) ** n - (m - 4) ** n


# -- batch location --------------------------------------------------------

def ring_of_batch(norm: np.ndarray) -> np.ndarray:
    """Generation of the shell containing points with the given max-norms.

    Shells are closed below and open above.  Points with norm >= 3 get -1.
    """
    norm = np.asarray(norm, dtype=float)
    gen = np.ones(norm.shape, dtype=np.int64)
    outer = norm >= 1.0
    inside = norm < DOMAIN_HALF_WIDTH
    sel = outer & inside
    if np.any(sel):
        t = DOMAIN_HALF_WIDTH - norm[sel]
        k = np.floor(3.0 - np.log2(t)).astype(np.int64)
        k = np.maximum(k, 2)
        # log2 may be off by an ulp; the bounds themselves are exact dyadics.
        for _ in range(2):
            lo = DOMAIN_HALF_WIDTH - np.ldexp(1.0, 3 - k)
            hi = DOMAIN_HALF_WIDTH - np.ldexp(1.0, 2 - k)
            k = np.where(norm[sel] < lo, k - 1, k)
            k = np.where(norm[sel] >= hi, k + 1, k)
        gen[sel] = k
    gen[~inside] = -1
    return gen


@dataclass
class LocatedBatch:
    generation: np.ndarray      # (N,)
    index: np.ndarray           # (N, n) lattice index, zeros for the central cube
    center: np.ndarray          # (N, n)
    half_side: np.ndarray       # (N,)


def locate_batch(y: np.ndarray) -> LocatedBatch:
    """Vectorised :func:`locate` without the depth cap; ``generation`` is -1
    for points outside D."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    N, n = y.shape
    norm = np.max(np.abs(y), axis=1)
    gen = ring_of_batch(norm)
    shell = gen >= 2
    side = np.where(shell, np.ldexp(1.0, 2 - np.maximum(gen, 2)), 2.0)
    index = np.zeros((N, n), dtype=np.int64)
    if np.any(shell):
        ys, hs = y[shell], side[shell][:, None]
        m = np.floor(ys / hs).astype(np.int64)
        # On the negative side a point with |y_i| equal to the inner radius
        # lands in a cell of the previous shell; move it outwards.
        inner_cells = (DOMAIN_HALF_WIDTH - 2.0 * hs[:, 0]) / hs[:, 0]
        inner_cells = np.rint(inner_cells).astype(np.int64)
        in_hole = np.all((m >= -inner_cells[:, None]) & (m + 1 <= inner_cells[:, None]), axis=1)
        if np.any(in_hole):
            rows = np.nonzero(in_hole)[0]
            hit = ys[rows] == -(inner_cells[rows, None] * hs[rows])
            first = np.argmax(hit, axis=1)
            m[rows, first] -= 1
        index[shell] = m
    center = np.where(shell[:, None], (index + 0.5) * side[:, None], 0.0)
    return LocatedBatch(gen, index, center, 0.5 * side)


def smaller_faces_batch(generation: np.ndarray, center: np.ndarray,
                        half_side: np.ndarray) -> np.ndarray:
    """Boolean ``(N, 2n)`` mask of faces adjacent to finer cubes.

    Column ``2a`` is the face ``+x_{a+1}``, column ``2a+1`` the face
    ``-x_{a+1}``.  Classification probes the generation just beyond the face
    centre, exactly like :func:`face_neighbor_kind`.
    """
    N, n = center.shape
    out = np.zeros((N, 2 * n), dtype=bool)
    step = 1.5 * half_side
    for a in range(n):
        for j, s in enumerate((1.0, -1.0)):
            probe = center.copy()
            probe[:, a] += s * step
            g = ring_of_batch(np.max(np.abs(probe), axis=1))
            out[:, 2 * a + j] = g > generation
    return out


# -- scalar API ------------------------------------------------------------

def locate(x: Sequence[float], k_max: int = DEFAULT_K_MAX) -> DyadicCube:
    """Whitney cube (or the central cube) whose half-open cell contains ``x``."""
    y = np.asarray(x, dtype=float)
    if np.max(np.abs(y)) >= DOMAIN_HALF_WIDTH:
        raise OutOfDomain(f"|x|_inf = {np.max(np.abs(y))} is not < 3")
    loc = locate_batch(y[None, :])
    gen = int(loc.generation[0])
    if gen > k_max:
        raise DepthExceeded(f"point needs generation {gen} > K_max = {k_max}")
    return DyadicCube(gen, tuple(int(v) for v in loc.index[0]))


def face_neighbor_kind(cube: DyadicCube, face: ConeId) -> NeighborKind:
    """Classify a face by the generation of the cubes across it."""
    if face.axis > cube.dim:
        raise ValueError(f"face axis {face.axis} out of range for dimension {cube.dim}")
    probe = cube.center.copy()
    probe[face.axis - 1] += face.sign * 1.5 * cube.half_side
    if np.max(np.abs(probe)) >= DOMAIN_HALF_WIDTH:
        return NeighborKind.OUTER
    other = int(ring_of_batch(np.array([np.max(np.abs(probe))]))[0])
    if other == cube.generation:
        return NeighborKind.SAME
    return NeighborKind.SMALLER if other > cube.generation else NeighborKind.LARGER


def subdivided_cones(cube: DyadicCube) -> frozenset[ConeId]:
    """Cones of ``cube`` whose faces touch finer cubes."""
    return frozenset(
        ConeId(a + 1, s)
        for a in range(cube.dim)
        for s in (1, -1)
        if face_neighbor_kind(cube, ConeId(a + 1, s)) is NeighborKind.SMALLER
    )


def ring_cubes(k: int, n: int) -> list[DyadicCube]:
    """Enumerate the cubes of shell ``k`` (exponential in n; small cases only)."""
    if k == 1:
        return [central_cube(n)]
    h = 2.0 ** (2 - k)
    outer = round((3.0 - h) / h)
    inner = round((3.0 - 2 * h) / h)
    rng = np.arange(-outer, outer)
    grids = np.stack(np.meshgrid(*([rng] * n), indexing="ij"), axis=-1).reshape(-1, n)
    in_hole = np.all((grids >= -inner) & (grids + 1 <= inner), axis=1)
    return [DyadicCube(k, tuple(int(v) for v in m)) for m in grids[~in_hole]]
