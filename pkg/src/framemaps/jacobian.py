"""Piecewise Jacobians, finite-difference cross-checks and numerical rank."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OnStratum, StencilCrossesStratum
from .frame_map import Evaluation, MapSpec, _raise_status, evaluate

STRATUM_TOL = 1e-12
RANK_TOL = 1e-8
FD_RANK_TOL = 1e-4


@dataclass(frozen=True)
class PieceKey:
    """Discrete choices made while evaluating a point.

    ``chain`` is the flat integer record; ``layout`` says how it splits into
    levels: ``("cube", d)`` contributes the generation and d grid indices,
    ``("cone", d)`` the 0-based axis, the sign and, for cone levels above the
    base, d-1 quadrant signs (all zero when the face is not subdivided),
    ``("quadrant", d)`` d signs.
    """

    chain: tuple[int, ...]
    layout: tuple[tuple[str, int], ...]

    def levels(self) -> list[tuple[str, tuple[int, ...]]]:
        out, pos = [], 0
        for kind, d in self.layout:
            if kind == "cube":
                width = d + 1
            elif kind == "cone":
                width = 2 if d == self._base_dim() else d + 1
            else:
                width = d
            out.append((kind, self.chain[pos:pos + width]))
            pos += width
        return out

    def _base_dim(self) -> int:
        return min(d for kind, d in self.layout if kind == "cone")


@dataclass(frozen=True)
class JacobianReport:
    matrix: np.ndarray
    singular_values: np.ndarray
    numerical_rank: int
    piece: PieceKey | None = None


def rank_report(M, tol: float = RANK_TOL) -> tuple[np.ndarray, int]:
    """Singular values (descending) and the count of those above ``tol * s_1``."""
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return sv, 0
    return sv, int(np.count_nonzero(sv > tol * sv[0]))


def batch_ranks(J: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Singular values ``(N, m)`` and numerical ranks ``(N,)`` of a stack."""
    sv = np.linalg.svd(J, compute_uv=False)
    top = sv[:, :1]
    rank = np.where(top[:, 0] > 0, np.count_nonzero(sv > tol * top, axis=1), 0)
    return sv, rank


def piece_of(ev: Evaluation, i: int = 0) -> PieceKey:
    return PieceKey(tuple(int(v) for v in ev.key[i]), ev.layout)


def _report(matrix: np.ndarray, tol: float, piece: PieceKey | None) -> JacobianReport:
    sv, rank = rank_report(matrix, tol)
    return JacobianReport(matrix, sv, rank, piece)


def jac_analytic(spec: MapSpec, x, map_name: str = "w", subdivided=None,
                 tol: float = RANK_TOL, stratum_tol: float = STRATUM_TOL) -> JacobianReport:
    ev = evaluate(spec, np.asarray(x, dtype=float)[None, :], map_name, jac=True,
                  subdivided=subdivided)
    _raise_status(int(ev.status[0]))
    if ev.margin[0] < stratum_tol:
        raise OnStratum(
            f"{tuple(np.asarray(x))} is within {ev.margin[0]:.3g} of a stratum surface "
            f"(tolerance {stratum_tol:g})"
        )
    return _report(ev.jac[0], tol, piece_of(ev))


def fd_batch(spec: MapSpec, X: np.ndarray, h, map_name: str = "w", subdivided=None):
    """Central-difference Jacobians for a batch of points.

    ``h`` is a scalar or one step per point.  Returns ``(J, valid)`` where
    ``valid`` marks points whose whole stencil evaluated on the centre's
    piece without errors.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, n = X.shape
    hs = np.broadcast_to(np.asarray(h, dtype=float), (N,))
    offsets = np.concatenate([np.eye(n), -np.eye(n)])
    stencil = X[:, None, :] + hs[:, None, None] * offsets[None]
    centre = evaluate(spec, X, map_name, subdivided=subdivided)
    ev = evaluate(spec, stencil.reshape(-1, n), map_name, subdivided=subdivided)
    keys = ev.key.reshape(N, 2 * n, -1)
    valid = np.all(keys == centre.key[:, None, :], axis=(1, 2))
    valid &= centre.ok & np.all(ev.ok.reshape(N, 2 * n), axis=1)
    vals = ev.value.reshape(N, 2 * n, -1)
    J = (vals[:, :n, :] - vals[:, n:, :]).transpose(0, 2, 1) / (2.0 * hs[:, None, None])
    return J, valid


def jac_fd(spec: MapSpec, x, h: float = 1e-5, map_name: str = "w", subdivided=None,
           tol: float = FD_RANK_TOL) -> JacobianReport:
    X = np.asarray(x, dtype=float)[None, :]
    if not h > 0:
        raise ValueError("step h must be positive")
    centre = evaluate(spec, X, map_name, subdivided=subdivided)
    _raise_status(int(centre.status[0]))
    J, valid = fd_batch(spec, X, h, map_name, subdivided)
    if not valid[0]:
        raise StencilCrossesStratum(
            f"stencil of half-width {h:g} around {tuple(X[0])} leaves the smooth piece"
        )
    return _report(J[0], tol, piece_of(centre))


def fd_step(scale, base: float = 1e-5, fraction: float = 1e-3):
    """Step adapted to the local feature size: min(base, fraction * scale)."""
    return np.minimum(base, fraction * np.asarray(scale, dtype=float))
