import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from framemaps.errors import DepthExceeded, OutOfDomain, SingularSet, ZeroPoint
from framemaps.frame_map import (
    AffineMap, Cell, MapSpec, affine_frame_map, base_map, cube_cells, evaluate_subface,
    evaluate_u, evaluate_v, evaluate_w, naive_edge_map, naive_subdivided_map, u_eval, v_eval,
    w_eval,
)
from framemaps.geometry import ConeId

ALL3 = [ConeId(a, s) for a in (1, 2, 3) for s in (1, -1)]


def nonzero_point(n):
    return st.lists(st.floats(-1, 1, allow_nan=False), min_size=n, max_size=n).filter(
        lambda v: max(abs(t) for t in v) > 1e-3
    )


def test_mapspec_validation():
    with pytest.raises(ValueError):
        MapSpec(1, 2)
    with pytest.raises(ValueError):
        MapSpec(3, 4)
    with pytest.raises(ValueError):
        MapSpec(9, 2)
    with pytest.raises(ValueError):
        MapSpec(4, 2, d_max=3)
    assert MapSpec(4, 2).levels == (4, 3, 2)


def test_base_map_examples():
    assert base_map([0.5, 0.25]).tolist() == [1.0, 0.5]
    assert base_map([1.0, -0.3]).tolist() == [1.0, -0.3]
    with pytest.raises(ZeroPoint):
        base_map([0.0, 0.0])


@given(nonzero_point(3))
def test_base_map_idempotent(x):
    y = base_map(x)
    assert np.max(np.abs(y)) == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(base_map(y), y, atol=1e-15)


def test_u_examples():
    s = MapSpec(3, 2)
    np.testing.assert_allclose(u_eval(s, [0.8, 0.4, 0.2]), [1, 1, 0.5])
    np.testing.assert_allclose(u_eval(s, [0.6, -0.6, 0.3]), [1, -1, 0.5])
    # the same tie point seen from the other cone: chart through axis 2
    y = np.array([0.6, 0.3]) / 0.6
    other = np.insert(base_map(y), 1, -1.0)
    np.testing.assert_allclose(other, [1, -1, 0.5])
    np.testing.assert_allclose(u_eval(MapSpec(4, 4), [0.5, 0.1, 0.2, 0.4]), [1, 0.2, 0.4, 0.8])


@settings(max_examples=60)
@given(nonzero_point(4), st.floats(0.01, 1.0))
def test_u_zero_homogeneous(x, lam):
    s = MapSpec(4, 2)
    try:
        a = u_eval(s, x)
        b = u_eval(s, lam * np.asarray(x))
    except (ZeroPoint, DepthExceeded):
        assume(False)
    np.testing.assert_allclose(a, b, atol=1e-12)


@settings(max_examples=60)
@given(nonzero_point(4))
def test_surface_property(x):
    s = MapSpec(4, 2)
    try:
        u = u_eval(s, x)
        v = v_eval(s, x, [ConeId(1, 1), ConeId(2, -1)])
    except (ZeroPoint, DepthExceeded):
        assume(False)
    assert np.max(np.abs(u)) == 1.0
    assert np.max(np.abs(v)) == 1.0


def test_v_hand_example():
    s = MapSpec(3, 2)
    # y = (0.5, 0.25), z = (0.5, 0.5), 2(y - z) = (0, -0.5), w_2 -> (0, -1)
    np.testing.assert_allclose(v_eval(s, [0.8, 0.4, 0.2], [ConeId(1, 1)]), [1, 0.5, 0])


def test_v_without_subdivision_is_u():
    s = MapSpec(4, 2)
    X = np.random.default_rng(0).uniform(-1, 1, (500, 4))
    np.testing.assert_array_equal(evaluate_v(s, X, []).value, evaluate_u(s, X).value)


def test_v_on_subface_boundary_is_radial_projection():
    s = MapSpec(3, 2)
    rng = np.random.default_rng(1)
    for _ in range(200):
        r = rng.uniform(0.1, 1)
        y = rng.uniform(-1, 1, 2)
        y[rng.integers(2)] = rng.choice([-1.0, 0.0, 1.0])
        x = r * np.insert(y, 0, 1.0)
        np.testing.assert_allclose(v_eval(s, x, ALL3), x / r, atol=1e-15)


def test_v_quadrant_boundary_in_four_dimensions():
    s = MapSpec(4, 2)
    rng = np.random.default_rng(2)
    for _ in range(100):
        r = rng.uniform(0.1, 1)
        y = rng.uniform(-1, 1, 3)
        y[rng.integers(3)] = 0.0
        x = r * np.insert(y, 0, 1.0)
        # the quadrant cube boundary is the identity trace of the inner map
        np.testing.assert_allclose(v_eval(s, x, [ConeId(1, 1)]), x / r, atol=1e-14)


def test_w_base_case():
    assert w_eval(MapSpec(2, 2), [0.5, 0.25]).tolist() == [1.0, 0.5]


def test_w_central_cube_hand_example():
    s = MapSpec(3, 2)
    y = np.array([0.4, 0.1, 0.05])
    # cone +x1, face point (0.25, 0.125), quadrant centre (0.5, 0.5),
    # 2(y' - z) = (-0.5, -0.75) -> (-2/3, -1), so the face image is (1/6, 0)
    np.testing.assert_allclose(w_eval(s, y / 3), np.array([1, 1 / 6, 0]) / 3, atol=1e-15)
    np.testing.assert_allclose(w_eval(s, y / 3), v_eval(s, y, ALL3) / 3, atol=1e-15)


def test_w_shell_cube_uses_scaled_v():
    s = MapSpec(3, 2)
    # cube of generation 2 centred (1.5, 0.5, 0.5), half-side 0.5; only +x1 subdivided
    y = np.array([1.7, 0.45, 0.6])
    local = (y - [1.5, 0.5, 0.5]) / 0.5
    expect = (np.array([1.5, 0.5, 0.5]) + 0.5 * v_eval(s, local, [ConeId(1, 1)])) / 3
    np.testing.assert_allclose(w_eval(s, y / 3), expect, atol=1e-15)


def test_w_is_identity_on_boundary():
    s = MapSpec(3, 2)
    x = [1.0, 0.2, -0.7]
    assert w_eval(s, x).tolist() == x
    with pytest.raises(OutOfDomain):
        w_eval(s, [1.1, 0, 0])


def test_w_boundary_estimate():
    s = MapSpec(3, 2)
    rng = np.random.default_rng(3)
    for eps in (1e-1, 1e-2, 1e-3):
        X = rng.uniform(-(1 - eps), 1 - eps, (2000, 3))
        X[:, 0] = 1 - eps
        dev = np.linalg.norm(evaluate_w(s, X).value - X, axis=1)
        assert dev.max() < eps * math.sqrt(3) * 2


def test_w_image_lies_on_frame():
    # k = 2: each Whitney cube maps into the 1-skeleton of its scaled
    # subdivided grid; on a generic point at least n - 1 coordinates of the
    # local image sit on a grid line of spacing 1/2.
    s = MapSpec(3, 2)
    X = np.random.default_rng(4).uniform(-0.99, 0.99, (2000, 3))
    ev = evaluate_w(s, X)
    from framemaps.whitney import locate_batch

    loc = locate_batch(3 * X)
    local = (3 * ev.value - loc.center) / loc.half_side[:, None]
    on_grid = np.isclose(local * 2, np.round(local * 2), atol=1e-9)
    assert np.all(on_grid.sum(axis=1) >= 2)


def test_subface_map_tiles_quadrants():
    s = MapSpec(2, 2)
    ev = evaluate_subface(s, [[0.75, 0.6]])
    # quadrant (+,+), centre (0.5,0.5), 2(x - z) = (0.5, 0.2) -> (1, 0.4)
    np.testing.assert_allclose(ev.value[0], [1.0, 0.7])


def test_naive_examples():
    np.testing.assert_allclose(naive_edge_map([0.8, 0.4, 0.2]), [1, 1, 0.5])
    np.testing.assert_allclose(naive_edge_map([0.5, 0.5, 0.25, 0]), [1, 1, 1, 0])
    np.testing.assert_allclose(naive_subdivided_map([0.5, 0.5, 0.25, 0], ConeId(1, 1)), [1, 1, 0.5, 0])
    with pytest.raises(SingularSet):
        naive_edge_map([0.5, 0, 0])


def test_naive_agrees_with_u_in_three_dimensions():
    s = MapSpec(3, 2)
    X = np.random.default_rng(5).uniform(-1, 1, (2000, 3))
    for x in X:
        np.testing.assert_allclose(naive_edge_map(x), u_eval(s, x), atol=1e-12)


def test_naive_subdivided_jumps_across_cone_boundary():
    x = np.array([0.5, 0.5, 0.25, 0.0])
    d = 1e-9
    a = naive_subdivided_map(x + [d, -d, 0, 0], ConeId(1, 1))
    b = naive_subdivided_map(x + [-d, d, 0, 0], ConeId(1, 1))
    assert np.linalg.norm(a - b) > 0.4


def test_real_construction_is_continuous_at_the_witness():
    s = MapSpec(4, 2)
    x = np.array([0.5, 0.5, 0.25, 0.0])
    d = 1e-9
    for m in (u_eval, w_eval):
        a = m(s, x + [d, -d, 0, 0.0])
        b = m(s, x + [-d, d, 0, 0.0])
        assert np.linalg.norm(a - b) < 1e-6


def test_affine_identity_single_cell():
    s = MapSpec(3, 2)
    g = AffineMap(np.zeros(3), np.eye(3))
    cells = [Cell((0.0, 0.0, 0.0), 1.0)]
    X = np.random.default_rng(6).uniform(-1, 1, (50, 3))
    for x in X:
        np.testing.assert_allclose(affine_frame_map(g, s, cells, x), w_eval(s, x))


def test_affine_cell_boundary_and_rank():
    s = MapSpec(3, 2)
    rng = np.random.default_rng(7)
    xi = rng.normal(size=(2, 3))
    z = rng.normal(size=2)
    g = AffineMap(z, xi)
    cells = cube_cells((0.5, 0.5, 0.5), 0.5, depth=3)
    for cell in cells[:40]:
        x = np.array(cell.center) + cell.half_side * np.array([1.0, 0.3, -0.2])
        val = affine_frame_map(g, s, cells, x)
        assert np.linalg.norm(val - g(x)) <= np.linalg.norm(xi, 2) * 2 * math.sqrt(3) * cell.half_side
    rank1 = AffineMap(np.zeros(3), np.outer([1.0, 2.0, 3.0], [0.5, -1.0, 2.0]))
    for x in rng.uniform(0.05, 0.95, (100, 3)):
        try:
            _, J = affine_frame_map(rank1, s, cells, x, jac=True)
        except OutOfDomain:
            continue
        sv = np.linalg.svd(J, compute_uv=False)
        assert sv[1] <= 1e-8 * max(sv[0], 1e-300)


def test_affine_outside_cells():
    s = MapSpec(2, 2)
    with pytest.raises(OutOfDomain):
        affine_frame_map(AffineMap([0, 0], np.eye(2)), s, [Cell((0.0, 0.0), 0.5)], [0.9, 0.9])


def test_cube_cells_volume():
    cells = cube_cells((0.0, 0.0), 1.0, depth=6)
    vol = sum((2 * c.half_side) ** 2 for c in cells)
    assert vol == pytest.approx(4 * ((6 - 2.0 ** (3 - 6)) / 6) ** 2)


def test_affine_map_validation():
    with pytest.raises(ValueError):
        AffineMap([0, 0], np.eye(3))
    with pytest.raises(ValueError):
        AffineMap([0, np.inf], np.eye(2))
