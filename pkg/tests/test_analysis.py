import math

import numpy as np
import pytest
from scipy import integrate

from framemaps.analysis import (
    Estimate, base_face_integral, boundary_trace_scan, continuity_scan, cube_region,
    det_vanishing_scan, generic_cube, growth_certificate, integrate_map, make_integrand,
    minors, seminorm_base, seminorm_mc, seminorm_recursive, shell_identity_check,
)
from framemaps.errors import ExponentOutOfRange, IntegrandUnsupported
from framemaps.frame_map import MapSpec

S2 = 4 * (math.sqrt(2) + math.asinh(1.0))


def base_oracle_2d(p):
    """|grad(x/|x|)|^p over the cone 0 < |x2| < x1 < 1 by direct 2-D
    quadrature of the derivative formula, times 4 cones."""
    def f(x2, x1):
        return (1 + (x2 / x1) ** 2) ** (p / 2) / x1 ** p

    val, _ = integrate.dblquad(f, 0, 1, lambda x1: -x1, lambda x1: x1, epsabs=1e-11, epsrel=1e-11)
    return 4 * val


def base_oracle_3d(p):
    def f(x3, x2, x1):
        return (2 + (x2 / x1) ** 2 + (x3 / x1) ** 2) ** (p / 2) / x1 ** p

    val, _ = integrate.tplquad(f, 0, 1, lambda x1: -x1, lambda x1: x1,
                               lambda x1, x2: -x1, lambda x1, x2: x1, epsabs=1e-9, epsrel=1e-9)
    return 6 * val


def test_base_seminorm_closed_form():
    assert seminorm_recursive(2, 2, 1) == pytest.approx(S2, abs=1e-12)
    assert seminorm_recursive(2, 2, 1) == pytest.approx(base_oracle_2d(1.0), abs=1e-8)
    assert seminorm_recursive(2, 2, 1.5) == pytest.approx(base_oracle_2d(1.5), rel=1e-7)


def test_base_seminorm_three_dimensions():
    assert seminorm_base(3, 1.0) == pytest.approx(base_oracle_3d(1.0), rel=1e-7)


def test_face_integral_tensor_rule():
    # (3 + |y|^2)^1 over (-1,1)^3 = 8 * 3 + 3 * 8/3
    assert base_face_integral(4, 2.0) == pytest.approx(32.0, rel=1e-12)


def test_recursion_values_and_errors():
    assert seminorm_recursive(3, 2, 1) == pytest.approx(3 * S2, rel=1e-12)
    with pytest.raises(ExponentOutOfRange):
        seminorm_recursive(3, 2, 2)
    with pytest.raises(ExponentOutOfRange):
        seminorm_recursive(3, 3, 0.5)
    with pytest.raises(ValueError):
        seminorm_recursive(2, 3, 1)


@pytest.mark.parametrize("n,k,p", [(2, 2, 1.0), (2, 2, 1.25), (2, 2, 1.5), (2, 2, 1.9),
                                   (3, 3, 1.0), (3, 3, 2.0), (3, 3, 2.9), (4, 4, 2.5)])
def test_mc_matches_recursion_in_base_dimension(n, k, p):
    est = seminorm_mc(MapSpec(n, k), p, 100_000, 1)
    assert est.within(seminorm_recursive(n, k, p))


@pytest.mark.parametrize("p", [1.0, 1.25, 1.5, 1.9])
def test_mc_matches_recursion_for_cone_map(p):
    est = seminorm_mc(MapSpec(3, 2), p, 100_000, 2, map_name="u")
    assert est.within(seminorm_recursive(3, 2, p))


@pytest.mark.parametrize("n,k", [(3, 2), (4, 2), (4, 3)])
def test_recursion_is_a_lower_bound_for_assembled_map(n, k):
    est = seminorm_mc(MapSpec(n, k), 1.0, 100_000, 3)
    assert est.value - 3 * est.std_error > seminorm_recursive(n, k, 1.0)


def test_radial_and_plain_agree():
    s = MapSpec(3, 2)
    a = seminorm_mc(s, 1.0, 200_000, 4)
    b = seminorm_mc(s, 1.0, 200_000, 5, method="plain")
    assert abs(a.value - b.value) < 3 * math.hypot(a.std_error, b.std_error)


def test_worker_count_does_not_change_result():
    s = MapSpec(3, 2)
    a = seminorm_mc(s, 1.0, 70_000, 9, workers=1)
    b = seminorm_mc(s, 1.0, 70_000, 9, workers=2)
    assert a == b


def test_estimate_validation():
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0, 10, 0)
    with pytest.raises(ValueError):
        Estimate(1.0, 0.0, 0, 0)
    with pytest.raises(ValueError):
        seminorm_mc(MapSpec(2, 2), 1.0, 10, 0)


def test_subdivision_invariance_face_map():
    s = MapSpec(2, 2)
    for p in (1.0, 1.5):
        a = seminorm_mc(s, p, 100_000, 6, map_name="subface")
        b = seminorm_mc(s, p, 100_000, 7)
        assert abs(a.value - b.value) < 3 * math.hypot(a.std_error, b.std_error)


def test_per_cube_scaling_is_exact_in_distribution():
    # same seed, same local samples: cubes of different generations give
    # identical scaled integrals
    s = MapSpec(3, 2)
    f = make_integrand("frobenius-power", 1.0)
    a = integrate_map(s, f, 20_000, 3, region=cube_region([generic_cube(2, 3)]))
    b = integrate_map(s, f, 20_000, 3, region=cube_region([generic_cube(4, 3)]))
    assert a.value / 0.5 ** 3 == pytest.approx(b.value / 0.125 ** 3, rel=1e-12)


def test_shell_check_small():
    rep = shell_identity_check(MapSpec(3, 2), 1.0, 20_000, 1, generations=(2, 3))
    assert all(c.consistent for c in rep.per_cube)
    assert abs(rep.shell_ratio - 1) < 3 * rep.shell_ratio_error
    for g in rep.per_generation:
        assert g["cubes"] == g["expected_cubes"]


def test_divergence_ratio():
    s = MapSpec(2, 2)
    hi = seminorm_mc(s, 1.9, 100_000, 8)
    lo = seminorm_mc(s, 1.5, 100_000, 8)
    pred = (0.5 / 0.1) * base_face_integral(2, 1.9) / base_face_integral(2, 1.5)
    assert 0.5 < (hi.value / lo.value) / pred < 2


def test_trace_scan_base_case():
    r = boundary_trace_scan(MapSpec(2, 2), 1e-2, 5000)
    assert r["max_deviation"] <= 1e-2 * math.sqrt(2) / (1 - 1e-2) + 1e-15


def test_trace_scan_bound():
    for eps in (1e-2, 1e-3):
        r = boundary_trace_scan(MapSpec(3, 2), eps, 5000)
        assert r["max_deviation"] <= r["bound"]
    with pytest.raises(ValueError):
        boundary_trace_scan(MapSpec(3, 2, k_max=10), 1e-3, 10)


@pytest.mark.parametrize("kind", ["cone", "quadrant", "cube"])
def test_continuity_slopes_are_local_lipschitz(kind):
    for d in (1e-4, 1e-8):
        r = continuity_scan(MapSpec(3, 2), kind, d, 5000, 2)
        assert r["max_jump_over_lipschitz_delta"] <= 1.01


def test_growth_certificate_examples():
    s = MapSpec(2, 2)
    for t in (1, 10, 100):
        r = growth_certificate(s, t * np.eye(2), samples=50_000, seed=1)
        assert r.L_prime <= 1 + S2
        assert r.integral.value >= r.lower - 3 * r.integral.std_error
    zero = growth_certificate(s, np.zeros((2, 2)))
    assert zero.integral.value == 0 and zero.L_prime == 0
    det = growth_certificate(s, np.eye(2), f="det-power", p=1.0, samples=5000)
    assert det.integral.value < 1e-10
    with pytest.raises(IntegrandUnsupported):
        make_integrand("entropy")


def test_mean_gradient_is_identity():
    # divergence theorem: w is the identity on the boundary
    s = MapSpec(3, 2)
    X = np.random.default_rng(0).uniform(-1, 1, (200_000, 3))
    from framemaps.frame_map import evaluate_w

    ev = evaluate_w(s, X, jac=True)
    keep = ev.ok
    M = ev.jac[keep].mean(axis=0)
    se = ev.jac[keep].std(axis=0) / math.sqrt(keep.sum())
    assert np.all(np.abs(M - np.eye(3)) < 5 * se + 1e-3)


def test_det_scan():
    r = det_vanishing_scan(MapSpec(3, 3), np.eye(3), 5000)
    assert r["max_relative_det"] < 1e-8 and r["median_relative_lower_det"] > 1e-3
    r = det_vanishing_scan(MapSpec(3, 2), np.random.default_rng(1).normal(size=(3, 3)), 5000)
    assert r["max_relative_det"] < 1e-8


def test_minors():
    M = np.arange(9.0).reshape(3, 3) + np.eye(3)
    assert minors(M, 3)[0] == pytest.approx(np.linalg.det(M))
    assert minors(M, 2).shape == (9,)
    with pytest.raises(ValueError):
        minors(M, 4)
