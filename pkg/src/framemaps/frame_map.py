"""Frame-collapsing maps on the cube Q = (-1, 1)^n.

Four families are evaluated here:

* ``base``: x / |x|_inf, which sends Q minus the origin onto its boundary;
* ``u``: the cone map.  Each point is pushed radially onto a face and the
  lower-dimensional map is applied inside that face;
* ``v``: the same cone map, except that on selected cones the face is split
  into 2^(n-1) quadrants and a half-size copy of the lower map is used in
  each quadrant;
* ``w``: the Whitney-assembled map.  ``3x`` is located in a dyadic cube of
  D = (-3, 3)^n, a rescaled ``v`` is applied in that cube (subdividing
  exactly the faces that touch finer cubes) and the result is scaled back by
  1/3.  In dimension ``k`` it reduces to ``base``.

With frame parameter ``k = 2`` the image is a one-dimensional frame and the
Jacobian has rank one almost everywhere; general ``k`` gives a
(k-1)-dimensional frame.

Every evaluator works on ``(N, d)`` arrays and returns an :class:`Evaluation`
carrying values, optionally Jacobians, and the bookkeeping needed elsewhere:
the discrete piece key, the local radial coordinate at each recursion level,
and the distance to the nearest surface across which the Jacobian jumps.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DepthExceeded, OutOfDomain, SingularSet, ZeroPoint
from .geometry import ConeId, cone_of_batch, other_axes
from .whitney import (
    DEFAULT_K_MAX,
    DyadicCube,
    locate_batch,
    smaller_faces_batch,
)

MAX_DIM = 8
RESCALE = 3.0

STATUS_OK = 0
STATUS_ZERO = 1
STATUS_DEPTH = 2
STATUS_OUTSIDE = 3


@dataclass(frozen=True)
class MapSpec:
    """Construction parameters.

    ``n`` is the ambient dimension and ``k`` the frame parameter: the image
    of the map is a (k-1)-dimensional frame.  ``k_max`` caps the Whitney
    generation and ``d_max`` the dimension recursion.
    """

    n: int
    k: int = 2
    k_max: int = DEFAULT_K_MAX
    d_max: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension n must be >= 2, got {self.n}")
        if not 2 <= self.k <= self.n:
            raise ValueError(f"frame parameter must satisfy 2 <= k <= n, got k={self.k}, n={self.n}")
        if self.k_max < 1:
            raise ValueError("k_max must be positive")
        cap = MAX_DIM if self.d_max is None else self.d_max
        if cap < 1:
            raise ValueError("d_max must be positive")
        if self.n > cap:
            raise ValueError(f"dimension {self.n} exceeds the recursion cap {cap}")

    def lower(self) -> "MapSpec":
        return MapSpec(self.n - 1, self.k, self.k_max, self.d_max)

    @property
    def levels(self) -> tuple[int, ...]:
        """Dimensions of the radial levels, outermost first."""
        return tuple(range(self.n, self.k - 1, -1))


@dataclass(frozen=True)
class AffineMap:
    offset: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.offset, dtype=float).reshape(-1)
        xi = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if xi.shape[0] != z.shape[0]:
            raise ValueError(f"offset has length {z.shape[0]} but matrix has {xi.shape[0]} rows")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(xi))):
            raise ValueError("affine map entries must be finite")
        object.__setattr__(self, "offset", z)
        object.__setattr__(self, "matrix", xi)

    def __call__(self, x):
        return self.offset + np.asarray(x, dtype=float) @ self.matrix.T


@dataclass
class Evaluation:
    """Batch evaluation result; row ``i`` describes input point ``i``.

    ``margin`` is the smallest distance, in the local coordinates of any
    recursion level, to a surface where the Jacobian is discontinuous
    (cone boundaries, quadrant boundaries, Whitney cube faces, cone
    vertices).  ``scale`` is the same quantity converted to input units.
    ``rho[:, j]`` is the max-norm of the local coordinate at radial level j,
    whose dimension is ``dims[j]``; the Jacobian is homogeneous of degree -1
    in each of them.
    """

    value: np.ndarray
    jac: np.ndarray | None
    status: np.ndarray
    margin: np.ndarray
    scale: np.ndarray
    rho: np.ndarray
    dims: tuple[int, ...]
    key: np.ndarray
    layout: tuple[tuple[str, int], ...]
    generation: np.ndarray = field(default=None)

    @property
    def ok(self) -> np.ndarray:
        return self.status == STATUS_OK

    def __len__(self):
        return self.value.shape[0]


def _raise_status(status: int, where: str = ""):
    if status == STATUS_ZERO:
        raise ZeroPoint(f"evaluation hits a cone vertex{where}")
    if status == STATUS_DEPTH:
        raise DepthExceeded(f"Whitney generation exceeds the depth cap{where}")
    if status == STATUS_OUTSIDE:
        raise OutOfDomain(f"point outside the closed cube{where}")


# -- recursive evaluators --------------------------------------------------

def _base(x: np.ndarray, want_jac: bool) -> Evaluation:
    N, d = x.shape
    rows = np.arange(N)
    axis, sign, r, runner_up = cone_of_batch(x)
    status = np.where(r > 0, STATUS_OK, STATUS_ZERO)
    rs = np.where(r > 0, r, 1.0)
    val = x / rs[:, None]
    jac = None
    if want_jac:
        e = np.zeros((N, d))
        e[rows, axis] = sign
        jac = (np.eye(d)[None] - val[:, :, None] * e[:, None, :]) / rs[:, None, None]
    margin = np.minimum(r, r - runner_up)
    key = np.stack([axis, sign], axis=1).astype(np.int64)
    return Evaluation(val, jac, status, margin, margin.copy(), r[:, None], (d,), key,
                      (("cone", d),), np.ones(N, dtype=np.int64))


def _cone(x: np.ndarray, k: int, sub: np.ndarray | None, want_jac: bool,
          k_max: int) -> Evaluation:
    """Cone map on (-1,1)^d with frame parameter k; ``sub`` is an ``(N, 2d)``
    mask of subdivided cones or None."""
    N, d = x.shape
    rows = np.arange(N)
    axis, sign, r, runner_up = cone_of_batch(x)
    status = np.where(r > 0, STATUS_OK, STATUS_ZERO)
    rs = np.where(r > 0, r, 1.0)
    theta = x / rs[:, None]
    idx = other_axes(d)[axis]
    y = np.take_along_axis(theta, idx, axis=1)
    if sub is None:
        subdiv = np.zeros(N, dtype=bool)
    else:
        subdiv = sub[rows, 2 * axis + (sign < 0)]
    quad = np.where(y >= 0, 1, -1)
    z = 0.5 * quad
    arg = np.where(subdiv[:, None], 2.0 * (y - z), y)

    inner = _w(arg, k, want_jac, k_max)
    g = np.where(subdiv[:, None], z + 0.5 * inner.value, inner.value)
    val = np.empty((N, d))
    val[rows, axis] = sign
    np.put_along_axis(val, idx, g, axis=1)

    jac = None
    if want_jac:
        # derivative of the face point y = (x without coordinate a) / (sign * x_a)
        dy = np.zeros((N, d - 1, d))
        np.put_along_axis(dy, idx[:, :, None], 1.0, axis=2)
        dy[rows[:, None], np.arange(d - 1)[None, :], axis[:, None]] = -sign[:, None] * y
        dy /= rs[:, None, None]
        block = inner.jac @ dy
        jac = np.zeros((N, d, d))
        jac[rows[:, None], idx, :] = block

    quad_gap = np.where(subdiv, np.min(np.abs(y), axis=1), np.inf)
    own = np.minimum(np.minimum(r, r - runner_up), quad_gap)
    own_x = np.minimum(np.minimum(r, r - runner_up), quad_gap * r)
    inner_units = r * np.where(subdiv, 0.5, 1.0)
    status = np.where(status != STATUS_OK, status, inner.status)
    key = np.concatenate(
        [axis[:, None], sign[:, None], np.where(subdiv[:, None], quad, 0), inner.key], axis=1
    ).astype(np.int64)
    return Evaluation(
        val, jac, status,
        np.minimum(own, inner.margin),
        np.minimum(own_x, inner.scale * inner_units),
        np.concatenate([r[:, None], inner.rho], axis=1),
        (d,) + inner.dims,
        key,
        (("cone", d),) + inner.layout,
        inner.generation,
    )


def _w(x: np.ndarray, k: int, want_jac: bool, k_max: int) -> Evaluation:
    """Whitney-assembled map on (-1,1)^d; the identity on the boundary."""
    N, d = x.shape
    if d == k:
        return _base(x, want_jac)
    norm = np.max(np.abs(x), axis=1)
    boundary = norm >= 1.0
    outside = norm > 1.0
    y = RESCALE * np.where(boundary[:, None], 0.5, x)
    loc = locate_batch(y)
    half = loc.half_side
    local = (y - loc.center) / half[:, None]
    sub = smaller_faces_batch(loc.generation, loc.center, half)
    inner = _cone(local, k, sub, want_jac, k_max)

    val = (loc.center + half[:, None] * inner.value) / RESCALE
    val[boundary] = x[boundary]
    jac = inner.jac
    if want_jac:
        jac[boundary] = 0.0

    status = np.where(loc.generation > k_max, STATUS_DEPTH, inner.status)
    status = np.where(boundary, STATUS_OK, status)
    status = np.where(outside, STATUS_OUTSIDE, status)
    own = 1.0 - np.max(np.abs(local), axis=1)
    margin = np.where(boundary, 0.0, np.minimum(own, inner.margin))
    to_x = half / RESCALE
    scale = np.where(boundary, 0.0, np.minimum(own, inner.scale) * to_x)
    gen = np.where(boundary, 0, loc.generation)
    key = np.concatenate([gen[:, None], np.where(boundary[:, None], 0, loc.index), inner.key], axis=1)
    return Evaluation(val, jac, status, margin, scale, inner.rho, inner.dims, key,
                      (("cube", d),) + inner.layout,
                      np.maximum(gen, inner.generation))


# -- public batch entry points --------------------------------------------

def _quiet(fn):
    # rows at or near singular points overflow harmlessly; they are flagged
    # through ``status`` and ``margin``
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return fn(*args, **kwargs)

    return wrapper


def _as_batch(x, d: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got shape {np.shape(x)}")
    return arr


@_quiet
def evaluate_w(spec: MapSpec, x, jac: bool = False) -> Evaluation:
    X = _as_batch(x, spec.n)
    if spec.n == spec.k:
        ev = _base(X, jac)
        ev.status = np.where(np.max(np.abs(X), axis=1) > 1.0, STATUS_OUTSIDE, ev.status)
        return ev
    return _w(X, spec.k, jac, spec.k_max)


def cone_mask(n: int, cones: Iterable[ConeId] | None) -> np.ndarray:
    mask = np.zeros(2 * n, dtype=bool)
    for c in cones or ():
        if c.axis > n:
            raise ValueError(f"cone axis {c.axis} out of range for dimension {n}")
        mask[c.index] = True
    return mask


@_quiet
def evaluate_v(spec: MapSpec, x, subdivided: Iterable[ConeId] | np.ndarray | None = None,
               jac: bool = False) -> Evaluation:
    X = _as_batch(x, spec.n)
    if isinstance(subdivided, np.ndarray) and subdivided.dtype == bool:
        mask = subdivided
    else:
        mask = cone_mask(spec.n, subdivided)
    if spec.n == spec.k:
        if np.any(mask):
            raise ValueError("no cone subdivision exists in the base dimension n == k")
        return _base(X, jac)
    sub = np.broadcast_to(mask, (X.shape[0], 2 * spec.n)) if np.any(mask) else None
    return _cone(X, spec.k, sub, jac, spec.k_max)


@_quiet
def evaluate_u(spec: MapSpec, x, jac: bool = False) -> Evaluation:
    return evaluate_v(spec, x, None, jac)


@_quiet
def evaluate_subface(spec: MapSpec, x, jac: bool = False) -> Evaluation:
    """Quadrant-subdivided map on (-1,1)^n: each quadrant P with centre z
    gets ``z + w(2(x - z)) / 2``."""
    X = _as_batch(x, spec.n)
    quad = np.where(X >= 0, 1, -1)
    z = 0.5 * quad
    ev = evaluate_w(spec, 2.0 * (X - z), jac)
    ev.value = z + 0.5 * ev.value
    ev.margin = np.minimum(ev.margin, np.min(np.abs(X), axis=1))
    ev.scale = np.minimum(0.5 * ev.scale, np.min(np.abs(X), axis=1))
    ev.key = np.concatenate([quad, ev.key], axis=1)
    ev.layout = (("quadrant", spec.n),) + ev.layout
    return ev


@_quiet
def evaluate(spec: MapSpec, x, map_name: str = "w", jac: bool = False,
             subdivided=None) -> Evaluation:
    if map_name == "w":
        return evaluate_w(spec, x, jac)
    if map_name == "u":
        return evaluate_u(spec, x, jac)
    if map_name == "v":
        if subdivided is None:
            subdivided = np.ones(2 * spec.n, dtype=bool)
        return evaluate_v(spec, x, subdivided, jac)
    if map_name == "subface":
        return evaluate_subface(spec, x, jac)
    if map_name == "base":
        X = _as_batch(x, spec.n)
        return _base(X, jac)
    raise ValueError(f"unknown map {map_name!r}; expected one of w, u, v, subface, base")


# -- scalar API ------------------------------------------------------------

def _single(ev: Evaluation) -> np.ndarray:
    _raise_status(int(ev.status[0]))
    return ev.value[0].copy()


def base_map(x: Sequence[float]) -> np.ndarray:
    X = _as_batch(x, len(x))
    if np.max(np.abs(X)) > 1.0:
        raise OutOfDomain("base map is defined on the closed unit cube")
    return _single(_base(X, False))


def u_eval(spec: MapSpec, x: Sequence[float]) -> np.ndarray:
    return _single(evaluate_u(spec, x))


def v_eval(spec: MapSpec, x: Sequence[float], subdivided: Iterable[ConeId] = ()) -> np.ndarray:
    return _single(evaluate_v(spec, x, subdivided))


def w_eval(spec: MapSpec, x: Sequence[float]) -> np.ndarray:
    return _single(evaluate_w(spec, x))


def naive_edge_map(x: Sequence[float]) -> np.ndarray:
    """Project onto the 1-skeleton by normalising n-1 times in a row.

    At each step the vector of not-yet-saturated coordinates is divided by its
    max-norm and the coordinate attaining it (smallest index on ties) is
    frozen.
    """
    out = np.array(x, dtype=float)
    if np.count_nonzero(out == 0.0) >= 2:
        raise SingularSet(f"{tuple(x)} lies on the singular set of the edge map")
    free = list(range(out.size))
    for _ in range(out.size - 1):
        sub = out[free]
        j = int(np.argmax(np.abs(sub)))
        r = abs(sub[j])
        if r == 0.0:
            raise SingularSet(f"{tuple(x)} lies on the singular set of the edge map")
        out[free] = sub / r
        del free[j]
    return out


def naive_subdivided_map(x: Sequence[float], cone: ConeId) -> np.ndarray:
    """Edge map variant whose face on ``cone`` is split into quadrants.

    On the chosen cone the face point y is sent to ``z + e(2(y - z)) / 2``
    where ``e`` is the (n-1)-dimensional edge map; elsewhere it agrees with
    :func:`naive_edge_map`.
    """
    arr = np.asarray(x, dtype=float)
    r = float(np.max(np.abs(arr)))
    if r == 0.0:
        raise ZeroPoint("the origin belongs to no cone")
    theta = arr / r
    on_cone = theta[cone.axis - 1] == cone.sign
    if not on_cone:
        return naive_edge_map(arr)
    y = np.delete(theta, cone.axis - 1)
    z = 0.5 * np.where(y >= 0, 1.0, -1.0)
    face = z + 0.5 * naive_edge_map(2.0 * (y - z))
    return np.insert(face, cone.axis - 1, float(cone.sign))


# -- general domains -------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    center: tuple[float, ...]
    half_side: float

    def contains(self, x) -> bool:
        return bool(np.all(np.abs(np.asarray(x, dtype=float) - np.asarray(self.center)) <= self.half_side))


def cube_cells(center: Sequence[float], half_width: float, depth: int) -> list[Cell]:
    """Whitney cells of the cube ``center + half_width * (-1,1)^n``.

    The shell decomposition of D is scaled onto the cube and truncated after
    ``depth`` generations; the uncovered remainder is a boundary layer of
    relative width 2^(1-depth) / 3.
    """
    from .whitney import ring_cubes

    c = np.asarray(center, dtype=float)
    n = c.size
    s = half_width / RESCALE
    cells = []
    for gen in range(1, depth + 1):
        for cube in ring_cubes(gen, n):
            cells.append(Cell(tuple(c + s * cube.center), s * cube.half_side))
    return cells


def _find_cell(cells: Sequence, x: np.ndarray):
    for cell in cells:
        if np.all(np.abs(x - np.asarray(cell.center, dtype=float)) <= cell.half_side):
            return cell
    raise OutOfDomain(f"{tuple(x)} lies in no cell")


def affine_frame_map(g: AffineMap, spec: MapSpec, cells: Sequence, x: Sequence[float],
                     jac: bool = False):
    """``g.offset + g.matrix @ (c + r w((x - c) / r))`` on the cell holding x.

    With ``jac=True`` returns ``(value, jacobian)``.
    """
    arr = np.asarray(x, dtype=float)
    if g.matrix.shape[1] != spec.n:
        raise ValueError(f"matrix has {g.matrix.shape[1]} columns, expected {spec.n}")
    cell = _find_cell(cells, arr)
    c = np.asarray(cell.center, dtype=float)
    r = float(cell.half_side)
    local = (arr - c) / r
    # points on a cell face must land exactly on the unit cube boundary
    snap = np.abs(np.abs(local) - 1.0) <= 4 * np.finfo(float).eps
    local[snap] = np.sign(local[snap])
    ev = evaluate_w(spec, local, jac)
    _raise_status(int(ev.status[0]))
    inner = c + r * ev.value[0]
    value = g.offset + g.matrix @ inner
    if jac:
        return value, g.matrix @ ev.jac[0]
    return value


def cell_of(cube: DyadicCube) -> Cell:
    return Cell(tuple(cube.center), cube.half_side)
