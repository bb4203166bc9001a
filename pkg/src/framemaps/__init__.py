"""Sobolev maps collapsing a cube onto a lower-dimensional frame."""
from .errors import (
    DepthExceeded, ExponentOutOfRange, FrameMapError, IntegrandUnsupported, MinDimension,
    NotOnFace, OnStratum, OutOfDomain, SingularSet, StencilCrossesStratum, ZeroPoint,
)
from .geometry import ConeId, QuadrantId, cone_of, face_chart, face_unchart, inf_norm, quadrant_of
from .whitney import (
    DyadicCube, NeighborKind, face_neighbor_kind, locate, ring_bounds, ring_cube_count,
    subdivided_cones,
)
from .frame_map import (
    AffineMap, Cell, MapSpec, affine_frame_map, base_map, cube_cells, naive_edge_map,
    naive_subdivided_map, u_eval, v_eval, w_eval,
)
from .jacobian import JacobianReport, PieceKey, jac_analytic, jac_fd, rank_report
from .analysis import (
    Estimate, GrowthReport, boundary_trace_scan, continuity_scan, det_vanishing_scan,
    growth_certificate, seminorm_mc, seminorm_recursive, shell_identity_check,
)

__version__ = "0.1.0"
