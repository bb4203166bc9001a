"""Seminorm estimation, Whitney shell identities, boundary and continuity
scans, growth certificates and determinant-vanishing scans.

Monte-Carlo design
------------------
Inside every cone level the Jacobian carries one factor 1/rho, where rho is
the max-norm of the local coordinate at that level, and the rest depends only
on the angular data.  For uniformly distributed input the radii rho_j are
independent of each other and of the angular chain, with densities
d_j rho^(d_j - 1).  For an integrand homogeneous of degree q in the Jacobian
the radial factors can therefore be integrated exactly: each sample
contributes ``f(J) * prod(rho_j^q * d_j / (d_j - q))``.  This ``radial``
estimator is bounded whenever q < k, so its variance is finite even where
plain uniform sampling of |J|^p has infinite variance.  The ``plain`` method
averages ``f(J)`` directly and is kept as an independent cross-check.

Samples are drawn in fixed-size chunks, chunk ``i`` using the stream
``SeedSequence([seed, i])``; partial sums are combined in chunk order with
``math.fsum``, so results do not depend on the number of workers.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import ExponentOutOfRange, FrameMapError, IntegrandUnsupported
from .frame_map import MapSpec, cone_mask, evaluate, evaluate_w
from .geometry import ConeId
from .jacobian import STRATUM_TOL
from .whitney import DyadicCube, ring_bounds, ring_cube_count, ring_cubes, subdivided_cones

CHUNK = 1 << 15
RETRY_CAP = 100


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    samples: int
    seed: int

    def __post_init__(self):
        if self.samples <= 0:
            raise ValueError("an estimate needs at least one sample")
        if not self.std_error >= 0:
            raise ValueError("standard error must be non-negative")

    def within(self, target: float, k_sigma: float = 3.0) -> bool:
        return abs(self.value - target) <= k_sigma * self.std_error

    def as_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error,
                "samples": self.samples, "seed": self.seed}


# -- integrands --------------------------------------------------------------

@dataclass(frozen=True)
class Integrand:
    """A function of the (composed) Jacobian, positively homogeneous of
    degree ``degree``."""

    name: str
    exponent: float
    degree: float
    minor_size: int | None = None

    def __call__(self, M: np.ndarray) -> np.ndarray:
        if self.name == "frobenius-power":
            return frobenius(M) ** self.exponent
        if self.name == "det-power":
            return np.abs(np.linalg.det(M)) ** self.exponent
        return np.max(np.abs(minors(M, self.minor_size)), axis=-1) ** self.exponent


def frobenius(M: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...ij,...ij->...", M, M))


def minors(M: np.ndarray, m: int) -> np.ndarray:
    """All m x m minor determinants of a stack ``(..., N, n)``, last axis
    indexing (row subset, column subset) pairs."""
    N, n = M.shape[-2:]
    if not 1 <= m <= min(N, n):
        raise ValueError(f"minor size {m} is not available for {N}x{n} matrices")
    rows = list(itertools.combinations(range(N), m))
    cols = list(itertools.combinations(range(n), m))
    out = []
    for r in rows:
        sub = M[..., r, :]
        for c in cols:
            out.append(np.linalg.det(sub[..., :, c]))
    return np.stack(out, axis=-1)


def make_integrand(name: str, exponent: float = 1.0, minor_size: int | None = None,
                   dims: tuple[int, int] | None = None) -> Integrand:
    """Built-in integrands: ``frobenius-power`` |Z|^q, ``det-power``
    |det Z|^a (square Z of size ``dims``), ``minor-det`` max over m x m
    minors of |det|^a."""
    if not exponent > 0:
        raise IntegrandUnsupported("integrand exponent must be positive")
    if name == "frobenius-power":
        return Integrand(name, exponent, exponent)
    if name == "det-power":
        if dims is None or dims[0] != dims[1]:
            raise IntegrandUnsupported("det-power needs a square matrix (N = n)")
        return Integrand(name, exponent, exponent * dims[0], dims[0])
    if name == "minor-det":
        if minor_size is None:
            raise IntegrandUnsupported("minor-det needs a minor size")
        if dims is not None and minor_size > min(dims):
            raise IntegrandUnsupported(f"no {minor_size}x{minor_size} minors in {dims[0]}x{dims[1]}")
        return Integrand(name, exponent, exponent * minor_size, minor_size)
    raise IntegrandUnsupported(
        f"unknown integrand {name!r}; expected frobenius-power, det-power or minor-det"
    )


# -- closed-form recursion ---------------------------------------------------

def _check_exponent(k: int, p: float):
    if not 1 <= p < k:
        raise ExponentOutOfRange(
            f"requires 1 <= p < k (here 1 <= p < {k}); the radial integral of "
            f"r^(k-1-p) diverges for p >= k"
        )


def base_face_integral(k: int, p: float, nodes: int | None = None) -> float:
    """Integral over (-1,1)^(k-1) of ((k-1) + |y|^2)^(p/2).

    This is the face integral of |grad(x/|x|)|^p on one cone after the
    radial variable is factored out.
    """
    m = k - 1
    if m == 1:
        val, _ = integrate.quad(lambda s: (1.0 + s * s) ** (p / 2), 0.0, 1.0,
                                epsabs=1e-14, epsrel=1e-13)
        return 2.0 * val
    if nodes is None:
        nodes = max(6, min(48, int(2e6 ** (1.0 / m))))
    t, wt = np.polynomial.legendre.leggauss(nodes)
    t, wt = 0.5 * (t + 1.0), 0.5 * wt
    grids = np.meshgrid(*([t] * m), indexing="ij")
    weights = np.ones_like(grids[0])
    for g_w in np.meshgrid(*([wt] * m), indexing="ij"):
        weights = weights * g_w
    sq = sum(g * g for g in grids)
    return float(2.0 ** m * np.sum(weights * (m + sq) ** (p / 2)))


def seminorm_base(k: int, p: float) -> float:
    """|grad(x/|x|)|^p integrated over (-1,1)^k: 2k/(k-p) times the face
    integral."""
    _check_exponent(k, p)
    return 2.0 * k / (k - p) * base_face_integral(k, p)


def seminorm_recursive(n: int, k: int, p: float) -> float:
    """Seminorm from the radial recursion S_d = 2d/(d-p) S_{d-1}, S_k the
    base-map value.

    The recursion treats the face map as if it were 0-homogeneous.  It is
    exact for the base map (n = k) and for the cone map u with n = k + 1;
    when the face map is not 0-homogeneous the radial column of the Jacobian
    adds a non-negative term, so for the Whitney-assembled map it is a lower
    bound.
    """
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got n={n}, k={k}")
    _check_exponent(k, p)
    s = seminorm_base(k, p)
    for d in range(k + 1, n + 1):
        s *= 2.0 * d / (d - p)
    return s


# -- sampling ----------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Union of equal-size boxes ``centers[i] + half_side * (-1,1)^n`` in the
    coordinates of the evaluated map, sampled uniformly.  ``premap`` scales
    sampled points before evaluation (used to integrate over cubes of
    D = (-3,3)^n)."""

    centers: np.ndarray
    half_side: float
    premap: float = 1.0

    @property
    def volume(self) -> float:
        return self.centers.shape[0] * (2.0 * self.half_side) ** self.centers.shape[1]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        which = rng.integers(0, self.centers.shape[0], size)
        local = rng.uniform(-1.0, 1.0, (size, self.centers.shape[1]))
        return (self.centers[which] + self.half_side * local) * self.premap


def unit_region(n: int) -> Region:
    return Region(np.zeros((1, n)), 1.0)


def cube_region(cubes: Sequence[DyadicCube]) -> Region:
    """Whitney cubes of D, integrated against the map ``y -> 3 w(y/3)``
    (whose Jacobian at y equals that of w at y/3)."""
    halves = {c.half_side for c in cubes}
    if len(halves) != 1:
        raise ValueError("cubes of one region must share a size")
    return Region(np.array([c.center for c in cubes], dtype=float), halves.pop(), 1.0 / 3.0)


@dataclass(frozen=True)
class _Job:
    spec: MapSpec
    integrand: Integrand
    xi: np.ndarray | None
    map_name: str
    subdivided: object
    region: Region
    method: str
    seed: int


def _chunk_stats(job: _Job, index: int, size: int) -> tuple[float, float, int]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([job.seed, index])))
    vals = np.empty(0)
    need, tries = size, 0
    while need > 0:
        X = job.region.sample(rng, need)
        ev = evaluate(job.spec, X, job.map_name, jac=True, subdivided=job.subdivided)
        good = ev.ok & (ev.margin >= STRATUM_TOL)
        J = ev.jac[good]
        M = J if job.xi is None else job.xi @ J
        f = job.integrand(M)
        if job.method == "radial":
            q = job.integrand.degree
            dims = np.asarray(ev.dims, dtype=float)
            f = f * np.prod(ev.rho[good] ** q, axis=1) * np.prod(dims / (dims - q))
        vals = np.concatenate([vals, f])
        need = size - vals.size
        tries += 1
        if tries > RETRY_CAP:
            raise FrameMapError(
                "too many samples landed on strata or failed; this indicates a geometry error"
            )
    vals = vals * job.region.volume
    return math.fsum(vals), math.fsum(vals * vals), vals.size


def _run_chunk(args):
    job, index, size = args
    return _chunk_stats(job, index, size)


def _estimate(job: _Job, samples: int, workers: int = 1) -> Estimate:
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    tasks = [(job, i, s) for i, s in enumerate(sizes)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    total = math.fsum(s for s, _, _ in parts)
    total_sq = math.fsum(s2 for _, s2, _ in parts)
    count = sum(c for _, _, c in parts)
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    se = math.sqrt(var / (count - 1)) if count > 1 else float("inf")
    return Estimate(mean, se, count, job.seed)


def _choose_method(method: str, degree: float, k: int) -> str:
    if method not in ("radial", "plain", "auto"):
        raise ValueError(f"unknown method {method!r}; expected radial, plain or auto")
    if method == "auto":
        return "radial" if degree < k else "plain"
    if method == "radial" and degree >= k:
        raise ExponentOutOfRange(
            f"radial estimator needs integrand degree < k = {k}, got {degree}"
        )
    return method


def integrate_map(spec: MapSpec, integrand: Integrand, samples: int, seed: int,
                  xi=None, map_name: str = "w", subdivided=None, region: Region | None = None,
                  method: str = "auto", workers: int = 1) -> Estimate:
    """Monte-Carlo integral of ``integrand(xi @ grad map)`` over a region."""
    region = region or unit_region(spec.n)
    method = _choose_method(method, integrand.degree, spec.k)
    xi_arr = None if xi is None else np.atleast_2d(np.asarray(xi, dtype=float))
    if xi_arr is not None and xi_arr.shape[1] != spec.n:
        raise ValueError(f"matrix has {xi_arr.shape[1]} columns, expected {spec.n}")
    job = _Job(spec, integrand, xi_arr, map_name, subdivided, region, method, int(seed))
    return _estimate(job, samples, workers)


def seminorm_mc(spec: MapSpec, p: float, samples: int, seed: int, map_name: str = "w",
                subdivided=None, method: str = "radial", workers: int = 1,
                region: Region | None = None) -> Estimate:
    """Monte-Carlo estimate of the integral of |grad map|^p (Frobenius)."""
    _check_exponent(spec.k, p)
    if samples < 1000:
        raise ValueError("seminorm_mc needs at least 1000 samples")
    return integrate_map(spec, make_integrand("frobenius-power", p), samples, seed,
                         map_name=map_name, subdivided=subdivided, region=region,
                         method=method, workers=workers)


def ratio_with_error(a: Estimate, b: Estimate) -> tuple[float, float]:
    r = a.value / b.value
    rel = math.hypot(a.std_error / a.value, b.std_error / b.value)
    return r, abs(r) * rel


# -- Whitney shell identities --------------------------------------------------

def subdivision_type(cones: frozenset[ConeId], n: int) -> tuple[int, int]:
    """(axes with both faces subdivided, axes with exactly one)."""
    per_axis = [sum(1 for c in cones if c.axis == a) for a in range(1, n + 1)]
    return per_axis.count(2), per_axis.count(1)


def representative_cones(kind: tuple[int, int], n: int) -> frozenset[ConeId]:
    both, one = kind
    cones = set()
    for a in range(1, both + 1):
        cones |= {ConeId(a, 1), ConeId(a, -1)}
    for a in range(both + 1, both + one + 1):
        cones.add(ConeId(a, 1))
    return frozenset(cones)


def generic_cube(generation: int, n: int) -> DyadicCube:
    """A ring cube touching the ring only through its +e_1 face."""
    inner, _ = ring_bounds(generation)
    side = 2.0 ** (2 - generation)
    i0 = int(round(inner / side))
    return DyadicCube(generation, (i0,) + (0,) * (n - 1))


def corner_cube(generation: int, n: int) -> DyadicCube:
    inner, _ = ring_bounds(generation)
    side = 2.0 ** (2 - generation)
    i0 = int(round(inner / side))
    return DyadicCube(generation, (i0,) * n)


@dataclass
class CubeRatio:
    cube: DyadicCube
    subdivided: tuple[tuple[int, int], ...]
    direct: Estimate
    scaled_v: Estimate
    ratio: float
    ratio_error: float

    @property
    def consistent(self) -> bool:
        return abs(self.ratio - 1.0) <= 3.0 * self.ratio_error


@dataclass
class ShellReport:
    n: int
    p: float
    per_cube: list[CubeRatio]
    per_generation: list[dict]
    shell_ratio: float
    shell_ratio_error: float
    uniform_ratio: float
    uniform_ratio_error: float
    type_integrals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p,
            "per_cube": [
                {"generation": c.cube.generation, "center": list(c.cube.center),
                 "subdivided": [list(s) for s in c.subdivided],
                 "direct": c.direct.as_dict(), "scaled_v": c.scaled_v.as_dict(),
                 "ratio": c.ratio, "ratio_error": c.ratio_error}
                for c in self.per_cube
            ],
            "per_generation": self.per_generation,
            "shell_ratio": self.shell_ratio, "shell_ratio_error": self.shell_ratio_error,
            "uniform_ratio": self.uniform_ratio, "uniform_ratio_error": self.uniform_ratio_error,
            "type_integrals": {f"{a},{b}": e.as_dict() for (a, b), e in self.type_integrals.items()},
        }


def shell_identity_check(spec: MapSpec, p: float, samples: int, seed: int,
                         generations: Sequence[int] = (2, 3, 4), workers: int = 1) -> ShellReport:
    """Check the Whitney per-cube scaling identity and its shell sum.

    For each generation a generic and a corner cube are integrated directly
    through the assembled map and compared with (side/2)^n times the
    integral of the cube's own subdivided map over (-1,1)^n.  The ring sums
    are compared with the prediction from cube counts grouped by subdivision
    type, and with the single-map form count * (side/2)^n * integral(v) using
    the one-face subdivision for every cube.
    """
    if spec.n == spec.k:
        raise ValueError("the Whitney assembly needs n > k")
    _check_exponent(spec.k, p)
    n = spec.n
    f = make_integrand("frobenius-power", p)
    seeds = np.random.SeedSequence(seed).generate_state(64)
    seed_iter = iter(int(s) for s in seeds)

    type_cache: dict[tuple[int, int], Estimate] = {}

    def type_integral(kind):
        if kind not in type_cache:
            cones = representative_cones(kind, n)
            type_cache[kind] = integrate_map(
                spec, f, samples, next(seed_iter), map_name="v",
                subdivided=cone_mask(n, cones), workers=workers)
        return type_cache[kind]

    per_cube = []
    for g in generations:
        for cube in (generic_cube(g, n), corner_cube(g, n)):
            cones = subdivided_cones(cube)
            direct = integrate_map(spec, f, samples, next(seed_iter),
                                   region=cube_region([cube]), workers=workers)
            iv = type_integral(subdivision_type(cones, n))
            scale = cube.half_side ** n
            scaled = Estimate(scale * iv.value, scale * iv.std_error, iv.samples, iv.seed)
            r, re = ratio_with_error(direct, scaled)
            per_cube.append(CubeRatio(cube, tuple(sorted((c.axis, c.sign) for c in cones)),
                                      direct, scaled, r, re))

    per_gen = []
    lhs_v, lhs_var, rhs_v, rhs_var, uni_v, uni_var = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    generic = type_integral((0, 1))
    for g in generations:
        cubes = ring_cubes(g, n)
        counts: dict[tuple[int, int], int] = {}
        for c in cubes:
            t = subdivision_type(subdivided_cones(c), n)
            counts[t] = counts.get(t, 0) + 1
        h_n = cubes[0].half_side ** n
        direct = integrate_map(spec, f, samples, next(seed_iter), region=cube_region(cubes),
                               workers=workers)
        pred = sum(cnt * h_n * type_integral(t).value for t, cnt in counts.items())
        pred_var = sum((cnt * h_n * type_integral(t).std_error) ** 2 for t, cnt in counts.items())
        uni = len(cubes) * h_n * generic.value
        uni_se = len(cubes) * h_n * generic.std_error
        per_gen.append({
            "generation": g, "cubes": len(cubes), "expected_cubes": ring_cube_count(g, n),
            "type_counts": {f"{a},{b}": c for (a, b), c in sorted(counts.items())},
            "direct": direct.as_dict(), "predicted": pred, "predicted_se": math.sqrt(pred_var),
            "uniform_predicted": uni, "uniform_predicted_se": uni_se,
        })
        lhs_v += direct.value
        lhs_var += direct.std_error ** 2
        rhs_v += pred
        rhs_var += pred_var
        uni_v += uni
        uni_var += uni_se ** 2
    # type integrals are shared across generations, so their errors add linearly
    rhs_se = sum(
        sum(ring_count_of_type(g, n, t) * cube_half(g) ** n for g in generations) * e.std_error
        for t, e in type_cache.items()
    )
    shell = lhs_v / rhs_v
    shell_err = shell * math.hypot(math.sqrt(lhs_var) / lhs_v, rhs_se / rhs_v)
    uni_se_total = sum(len(ring_cubes(g, n)) * cube_half(g) ** n for g in generations) * generic.std_error
    uniform = lhs_v / uni_v
    uniform_err = uniform * math.hypot(math.sqrt(lhs_var) / lhs_v, uni_se_total / uni_v)
    return ShellReport(n, p, per_cube, per_gen, shell, shell_err, uniform, uniform_err,
                       dict(type_cache))


def cube_half(generation: int) -> float:
    return 1.0 if generation == 1 else 2.0 ** (1 - generation)


def ring_count_of_type(generation: int, n: int, kind: tuple[int, int]) -> int:
    return sum(1 for c in ring_cubes(generation, n)
               if subdivision_type(subdivided_cones(c), n) == kind)


# -- scans -----------------------------------------------------------------------

def _near_boundary_points(rng, n: int, eps: float, size: int) -> np.ndarray:
    inner = 1.0 - eps
    X = rng.uniform(-inner, inner, (size, n))
    axis = rng.integers(0, n, size)
    sign = rng.choice([-1.0, 1.0], size)
    X[np.arange(size), axis] = sign * inner
    return X


def boundary_trace_scan(spec: MapSpec, eps: float, samples: int, seed: int = 0) -> dict:
    """Largest Euclidean |w(x) - x| over points at max-norm distance eps
    from the boundary of Q."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if 2.0 ** (3 - spec.k_max) >= eps:
        raise ValueError(f"eps must exceed 2^(3 - k_max) = {2.0 ** (3 - spec.k_max):g}")
    rng = np.random.default_rng(seed)
    X = _near_boundary_points(rng, spec.n, eps, samples)
    ev = evaluate_w(spec, X)
    keep = ev.ok
    dev = np.linalg.norm(ev.value[keep] - X[keep], axis=1)
    i = int(np.argmax(dev))
    return {"eps": eps, "samples": int(keep.sum()), "max_deviation": float(dev[i]),
            "argmax": X[keep][i].tolist(), "bound": 8.0 * math.sqrt(spec.n) * eps}


def _pairs_cone(rng, spec: MapSpec, size: int):
    """Points on a tie |x_a| = |x_b| = max, stepped along e_a - e_b."""
    n = spec.n
    X = rng.uniform(-1.0, 1.0, (size, n))
    r = rng.uniform(0.05, 0.95, size)
    X *= (r * rng.uniform(0, 1, size))[:, None]
    a = rng.integers(0, n, size)
    b = (a + rng.integers(1, n, size)) % n
    rows = np.arange(size)
    sa = rng.choice([-1.0, 1.0], size)
    sb = rng.choice([-1.0, 1.0], size)
    X[rows, a] = sa * r
    X[rows, b] = sb * r
    D = np.zeros((size, n))
    D[rows, a] = sa
    D[rows, b] = -sb
    return X, D / np.linalg.norm(D, axis=1, keepdims=True)


def _pairs_quadrant(rng, spec: MapSpec, size: int):
    """Points whose face coordinate is zero on the top cone level of their
    Whitney cube, stepped across that zero."""
    n = spec.n
    from .whitney import locate_batch

    X = rng.uniform(-0.999, 0.999, (size, n))
    loc = locate_batch(3.0 * X)
    local = (3.0 * X - loc.center) / loc.half_side[:, None]
    rows = np.arange(size)
    a = np.argmax(np.abs(local), axis=1)
    b = (a + rng.integers(1, n, size)) % n
    local[rows, b] = 0.0
    Y = (loc.center + loc.half_side[:, None] * local) / 3.0
    D = np.zeros((size, n))
    D[rows, b] = 1.0
    return Y, D


def _pairs_cube(rng, spec: MapSpec, size: int):
    """Points on a face of their Whitney cube, stepped along its normal."""
    n = spec.n
    from .whitney import locate_batch

    X = rng.uniform(-0.999, 0.999, (size, n))
    loc = locate_batch(3.0 * X)
    local = (3.0 * X - loc.center) / loc.half_side[:, None]
    rows = np.arange(size)
    a = rng.integers(0, n, size)
    s = rng.choice([-1.0, 1.0], size)
    local[rows, a] = s
    Y = (loc.center + loc.half_side[:, None] * local) / 3.0
    D = np.zeros((size, n))
    D[rows, a] = s
    return Y, D


_PAIR_BUILDERS = {"cone": _pairs_cone, "quadrant": _pairs_quadrant, "cube": _pairs_cube}


def continuity_scan(spec: MapSpec, kind: str, delta: float, samples: int, seed: int = 0,
                    map_name: str = "w") -> dict:
    """Largest |map(x+) - map(x-)| over pairs straddling a surface of type
    ``kind`` (cone, quadrant or cube) with |x+ - x-| = delta."""
    if kind not in _PAIR_BUILDERS:
        raise ValueError(f"unknown boundary kind {kind!r}; expected cone, quadrant or cube")
    if map_name != "w" and kind != "cone":
        raise ValueError("quadrant and cube scans apply to the assembled map")
    rng = np.random.default_rng(seed)
    X, D = _PAIR_BUILDERS[kind](rng, spec, samples)
    lo = X - 0.5 * delta * D
    hi = X + 0.5 * delta * D
    inside = (np.max(np.abs(lo), axis=1) < 1) & (np.max(np.abs(hi), axis=1) < 1)
    a = evaluate(spec, lo[inside], map_name, jac=True)
    b = evaluate(spec, hi[inside], map_name, jac=True)
    keep = a.ok & b.ok
    jump = np.linalg.norm(a.value[keep] - b.value[keep], axis=1)
    lip = np.maximum(np.linalg.norm(a.jac[keep], ord=2, axis=(1, 2)),
                     np.linalg.norm(b.jac[keep], ord=2, axis=(1, 2)))
    i = int(np.argmax(jump))
    return {"kind": kind, "delta": delta, "samples": int(keep.sum()),
            "max_jump": float(jump[i]), "argmax": X[inside][keep][i].tolist(),
            "max_jump_over_lipschitz_delta": float(np.max(jump / (lip * delta + 1e-300)))}


@dataclass
class GrowthReport:
    xi: np.ndarray
    p: float
    integral: Estimate
    lower: float
    L_prime: float
    integrand: str = "frobenius-power"

    def as_dict(self) -> dict:
        return {"xi": np.asarray(self.xi).tolist(), "p": self.p, "integrand": self.integrand,
                "integral": self.integral.as_dict(), "lower": self.lower, "L_prime": self.L_prime}


def growth_certificate(spec: MapSpec, xi, f: str = "frobenius-power", p: float = 1.0,
                       samples: int = 100_000, seed: int = 0, minor_size: int | None = None,
                       workers: int = 1) -> GrowthReport:
    """Integrate f(xi grad w) over Q and report L' = integral / (1 + |xi|^q),
    q the homogeneity degree of f.

    The integral over Q has mass 2^n; f(xi) is compared with the average
    integral / 2^n, which by Jensen is at least f(xi) for convex f since the
    mean of grad w over Q is the identity.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    integrand = make_integrand(f, p, minor_size, dims=xi.shape)
    q = integrand.degree
    norm_xi = float(frobenius(xi))
    vol = 2.0 ** spec.n
    if norm_xi == 0.0:
        f0 = float(integrand(np.zeros_like(xi)[None])[0])
        est = Estimate(f0 * vol, 0.0, samples, seed)
        return GrowthReport(xi, p, est, f0, f0, f)
    est = integrate_map(spec, integrand, samples, seed, xi=xi, workers=workers)
    mean = Estimate(est.value / vol, est.std_error / vol, est.samples, est.seed)
    lower = float(integrand(xi[None])[0])
    return GrowthReport(xi, p, mean, lower, mean.value / (1.0 + norm_xi ** q), f)


def det_vanishing_scan(spec: MapSpec, xi, samples: int, seed: int = 0,
                       minor_size: int | None = None) -> dict:
    """Largest |det| of all m x m minors of xi grad w relative to |xi grad w|^m.

    ``m`` defaults to the frame parameter k; the (m-1)-minors are reported
    alongside to show that the vanishing is not trivial.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != spec.n:
        raise ValueError(f"matrix has {xi.shape[1]} columns, expected {spec.n}")
    m = spec.k if minor_size is None else minor_size
    if not 1 <= m <= min(xi.shape):
        raise ValueError(f"minor size {m} unavailable for a {xi.shape[0]}x{spec.n} product")
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, (samples, spec.n))
    ev = evaluate_w(spec, X, jac=True)
    keep = ev.ok & (ev.margin >= STRATUM_TOL)
    M = xi @ ev.jac[keep]
    scale = frobenius(M)
    nz = scale > 0
    rel = np.max(np.abs(minors(M[nz], m)), axis=-1) / scale[nz] ** m
    out = {"minor_size": m, "samples": int(keep.sum()), "max_relative_det": float(rel.max()) if rel.size else 0.0}
    if m >= 2:
        low = np.max(np.abs(minors(M[nz], m - 1)), axis=-1) / scale[nz] ** (m - 1)
        out["lower_minor_size"] = m - 1
        out["median_relative_lower_det"] = float(np.median(low)) if low.size else 0.0
    return out
