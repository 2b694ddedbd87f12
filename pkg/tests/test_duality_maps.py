"""Tests for the quadratic maps, parametrizations, one-forms, and metrics."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ksphere import (
    DegenerateAngleError,
    DimensionMismatchError,
    KindError,
    NonTangentError,
    RangeError,
    SingularDivisorError,
)
from ksphere.duality_maps import (
    AmbientPoint,
    AngleChart,
    MapKind,
    SpaceSpec,
    chart_tangents,
    constraint_oneforms,
    contract_to_flat,
    forward_jacobian,
    forward_map,
    horizontal_lift,
    hurwitz_angles,
    identity_residual,
    identity_residual_many,
    metric_relation_residual,
    oneform_rows,
    parametrize,
    paired_spaces,
    s_dimension,
    sphere_space,
    u_dimension,
)

SPHERE_KINDS = (MapKind.LC2_SPHERE, MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE)


def random_u(kind, rng, n=1, floor=0.3):
    """Random complex points with |u_i| <= 2 and divisor kept off zero."""
    dim = u_dimension(kind)
    pts = rng.uniform(-1.0, 1.0, (n, dim)) + 1j * rng.uniform(-1.0, 1.0, (n, dim))
    small = np.abs(pts[:, -1]) < floor
    pts[small, -1] += floor * (2.0 + 1j)
    return pts


# -------------------------------------------------------------- forward map

def test_forward_map_lc2_pole():
    s = forward_map(MapKind.LC2_SPHERE, [0.0, 0.0, 1.0]).coords
    assert np.allclose(s, [0.0, 0.0, 1.0], atol=1e-15)


def test_forward_map_lc2_equator():
    s = forward_map(MapKind.LC2_SPHERE, [math.sqrt(2.0), 0.0, 1j]).coords
    assert np.allclose(s, [1.0, 0.0, 0.0], atol=1e-15)


def test_forward_map_ks_pole():
    s = forward_map(MapKind.KS3_SPHERE, [0, 0, 0, 0, 1.0]).coords
    assert np.allclose(s, [0, 0, 0, 1.0], atol=1e-15)


def test_forward_map_hurwitz_pole():
    u = np.zeros(9)
    u[8] = 1.0
    s = forward_map(MapKind.HURWITZ5_SPHERE, u).coords
    expected = np.zeros(6)
    expected[5] = 1.0
    assert np.allclose(s, expected, atol=1e-15)


def test_forward_map_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        forward_map(MapKind.KS3_SPHERE, [1.0, 2.0, 3.0])


def test_forward_map_singular_divisor():
    with pytest.raises(SingularDivisorError):
        forward_map(MapKind.LC2_SPHERE, [1.0, 1.0, 1e-15])


def test_forward_map_attaches_paired_space():
    u_space, s_space = paired_spaces(MapKind.KS3_SPHERE, 2.0)
    assert s_space.radius == 4.0
    point = AmbientPoint(np.array([0, 0, 0, 0, 2.0]), u_space)
    assert point.constraint_residual() < 1e-12
    s = forward_map(MapKind.KS3_SPHERE, point)
    assert s.space.radius == 4.0
    assert s.constraint_residual() < 1e-12


# ---------------------------------------------------------------- identity

@pytest.mark.parametrize("kind", [MapKind.LC2_FLAT, *SPHERE_KINDS])
def test_identity_residual_random(kind):
    rng = np.random.default_rng(7)
    pts = random_u(kind, rng, n=1000)
    residuals = identity_residual_many(kind, pts)
    assert np.max(residuals) < 1e-12


def test_identity_one_sheet_example():
    u = np.array([1.0, 1.0, 1.0])
    s = forward_map(MapKind.LC2_ONE_SHEET, u).coords
    value = s[0] ** 2 + s[1] ** 2 - s[2] ** 2
    assert abs(value - 1.0) < 1e-14
    assert identity_residual(MapKind.LC2_ONE_SHEET, u) < 1e-14


def test_identity_h2c_branch():
    rng = np.random.default_rng(11)
    pts = random_u(MapKind.LC2_H2C_TO_S2, rng, n=500)
    residuals = identity_residual_many(MapKind.LC2_H2C_TO_S2, pts)
    assert np.max(residuals) < 1e-12


def test_identity_pm_both_branches():
    rng = np.random.default_rng(13)
    pts = random_u(MapKind.LC2_HYPERBOLOID_PM, rng, n=500)
    upper = AmbientPoint(pts[0], SpaceSpec(3, 1.0, (1, 1, 1)))
    lower = AmbientPoint(pts[0], SpaceSpec(3, 1.0, (-1, -1, 1)))
    res_up = identity_residual_many(MapKind.LC2_HYPERBOLOID_PM, pts, upper)
    res_lo = identity_residual_many(MapKind.LC2_HYPERBOLOID_PM, pts, lower)
    assert np.max(res_up) < 1e-12
    assert np.max(res_lo) < 1e-12
    # the two branches genuinely differ
    s_up = forward_map(MapKind.LC2_HYPERBOLOID_PM, upper).coords
    s_lo = forward_map(MapKind.LC2_HYPERBOLOID_PM, lower).coords
    assert np.max(np.abs(s_up - s_lo)) > 1e-3


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**6))
def test_double_cover_sign_flip(seed):
    rng = np.random.default_rng(seed)
    u2 = random_u(MapKind.LC2_SPHERE, rng)[0]
    flipped = u2.copy()
    flipped[:2] *= -1.0
    assert np.array_equal(
        forward_map(MapKind.LC2_SPHERE, u2).coords,
        forward_map(MapKind.LC2_SPHERE, flipped).coords,
    )
    u3 = random_u(MapKind.KS3_SPHERE, rng)[0]
    flipped = u3.copy()
    flipped[:4] *= -1.0
    assert np.array_equal(
        forward_map(MapKind.KS3_SPHERE, u3).coords,
        forward_map(MapKind.KS3_SPHERE, flipped).coords,
    )
    u5 = random_u(MapKind.HURWITZ5_SPHERE, rng)[0]
    flipped = u5.copy()
    flipped[:8] *= -1.0
    assert np.array_equal(
        forward_map(MapKind.HURWITZ5_SPHERE, u5).coords,
        forward_map(MapKind.HURWITZ5_SPHERE, flipped).coords,
    )


# ------------------------------------------------------------ parametrize

@pytest.mark.parametrize("kind", SPHERE_KINDS)
def test_parametrize_pole(kind):
    D = 1.5
    u = parametrize(kind, AngleChart(chi=0.0), D)
    expected = np.zeros(u_dimension(kind))
    expected[-1] = D
    assert np.allclose(u.coords, expected, atol=1e-15)
    assert u.constraint_residual() < 1e-12 * D * D


def test_parametrize_lc2_equator():
    u = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=math.pi / 2.0, phi=0.0), 1.0)
    assert np.allclose(u.coords, [math.sqrt(2.0), 0.0, 1j], atol=1e-15)
    assert abs(np.sum(u.coords**2) - 1.0) < 1e-14


def test_parametrize_ks_composition_example():
    angles = AngleChart(chi=math.pi / 2.0, beta=math.pi / 2.0, alpha=0.0, gamma=0.0)
    u = parametrize(MapKind.KS3_SPHERE, angles, 1.0)
    s = forward_map(MapKind.KS3_SPHERE, u).coords
    assert abs(s[3]) < 1e-14
    assert abs(np.linalg.norm(s) - 1.0) < 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_parametrize_lc2_composition(seed):
    rng = np.random.default_rng(seed)
    chi = rng.uniform(0.1, math.pi - 0.1)
    phi = rng.uniform(0.0, 4.0 * math.pi - 1e-6)
    D = rng.uniform(0.5, 2.0)
    R = D * D
    u = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=chi, phi=phi), D)
    s = forward_map(MapKind.LC2_SPHERE, u).coords
    expected = R * np.array(
        [math.sin(chi) * math.cos(phi), math.sin(chi) * math.sin(phi), math.cos(chi)]
    )
    assert np.max(np.abs(s - expected)) < 1e-12 * R


@pytest.mark.parametrize("seed", [3, 4])
def test_parametrize_ks_composition(seed):
    rng = np.random.default_rng(seed)
    chi = rng.uniform(0.1, math.pi - 0.1)
    beta = rng.uniform(0.05, math.pi - 0.05)
    alpha = rng.uniform(0.0, 2.0 * math.pi - 1e-6)
    gamma = rng.uniform(0.0, 4.0 * math.pi - 1e-6)
    D = 1.2
    R = D * D
    u = parametrize(
        MapKind.KS3_SPHERE,
        AngleChart(chi=chi, beta=beta, alpha=alpha, gamma=gamma),
        D,
    )
    s = forward_map(MapKind.KS3_SPHERE, u).coords
    expected = R * np.array([
        math.sin(chi) * math.sin(beta) * math.cos(alpha),
        math.sin(chi) * math.sin(beta) * math.sin(alpha),
        math.sin(chi) * math.cos(beta),
        math.cos(chi),
    ])
    assert np.max(np.abs(s - expected)) < 1e-12 * R


@pytest.mark.parametrize("seed", [5, 6])
def test_parametrize_hurwitz_composition(seed):
    rng = np.random.default_rng(seed)
    chi = rng.uniform(0.1, math.pi - 0.1)
    theta = rng.uniform(0.05, math.pi - 0.05)
    beta = rng.uniform(0.05, math.pi - 0.05)
    alpha = rng.uniform(0.0, 2.0 * math.pi - 1e-6)
    gamma = rng.uniform(0.0, 4.0 * math.pi - 1e-6)
    betaH = rng.uniform(0.05, math.pi - 0.05)
    alphaH = rng.uniform(0.0, 2.0 * math.pi - 1e-6)
    gammaH = rng.uniform(0.0, 4.0 * math.pi - 1e-6)
    D = 1.1
    R = D * D
    angles = AngleChart(chi=chi, theta=theta, beta=beta, alpha=alpha, gamma=gamma,
                        betaH=betaH, alphaH=alphaH, gammaH=gammaH)
    u = parametrize(MapKind.HURWITZ5_SPHERE, angles, D)
    assert u.constraint_residual() < 1e-12 * D * D
    s = forward_map(MapKind.HURWITZ5_SPHERE, u).coords
    z1 = R * math.sin(chi) * math.sin(theta) * math.cos(beta / 2.0) * cmath.exp(
        1j * (alpha + gamma) / 2.0
    )
    z2 = R * math.sin(chi) * math.sin(theta) * math.sin(beta / 2.0) * cmath.exp(
        1j * (alpha - gamma) / 2.0
    )
    expected = np.array([
        z1.real, z1.imag, z2.real, z2.imag,
        R * math.sin(chi) * math.cos(theta),
        R * math.cos(chi),
    ])
    assert np.max(np.abs(s - expected)) < 1e-12 * R


def test_parametrize_polar_relation():
    # s3 / R = (u3 / D + D / u3) / 2 along the chart
    rng = np.random.default_rng(21)
    for _ in range(20):
        chi = rng.uniform(0.05, math.pi - 0.05)
        phi = rng.uniform(0.0, 4.0 * math.pi - 1e-6)
        D = rng.uniform(0.5, 2.0)
        u = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=chi, phi=phi), D)
        s = forward_map(MapKind.LC2_SPHERE, u).coords
        u3 = u.coords[2]
        assert abs(s[2] / D**2 - (u3 / D + D / u3) / 2.0) < 1e-12


def test_parametrize_range_errors():
    with pytest.raises(RangeError):
        parametrize(MapKind.LC2_SPHERE, AngleChart(chi=0.5, phi=-0.5), 1.0)
    with pytest.raises(RangeError):
        parametrize(MapKind.KS3_SPHERE, AngleChart(chi=0.5, beta=4.0), 1.0)
    with pytest.raises(RangeError):
        parametrize(MapKind.LC2_SPHERE, AngleChart(chi=3.5), 1.0)
    with pytest.raises(KindError):
        parametrize(MapKind.LC2_FLAT, AngleChart(), 1.0)


def test_parametrize_complex_chi_allowed():
    u = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=0.4 + 0.3j, phi=1.0), 1.0)
    assert abs(np.sum(u.coords**2) - 1.0) < 1e-12


# ------------------------------------------------------------- jacobians

@pytest.mark.parametrize("kind", [MapKind.LC2_FLAT, *SPHERE_KINDS,
                                  MapKind.LC2_H2C_TO_S2, MapKind.LC2_ONE_SHEET])
def test_forward_jacobian_matches_finite_differences(kind):
    rng = np.random.default_rng(31)
    u = random_u(kind, rng)[0]
    jac = forward_jacobian(kind, u)
    eps = 1e-6
    for j in range(u_dimension(kind)):
        du = np.zeros(u_dimension(kind), dtype=complex)
        du[j] = eps
        fd = (
            forward_map(kind, u + du).coords - forward_map(kind, u - du).coords
        ) / (2.0 * eps)
        assert np.max(np.abs(jac[:, j] - fd)) < 1e-7 * max(1.0, np.max(np.abs(jac)))


# ---------------------------------------------------- one-forms and lifts

def test_constraint_oneforms_ks_example():
    u = np.array([1.0, 0.0, 0.0, 0.0, 1.0])
    du = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
    om = constraint_oneforms(MapKind.KS3_SPHERE, u, du)
    assert om.shape == (1,)
    assert abs(om[0] - (-1.0)) < 1e-15


def test_constraint_oneforms_radial_antisymmetry():
    rng = np.random.default_rng(41)
    u = random_u(MapKind.KS3_SPHERE, rng)[0]
    om = constraint_oneforms(MapKind.KS3_SPHERE, u, u)
    assert abs(om[0]) < 1e-14
    u9 = random_u(MapKind.HURWITZ5_SPHERE, rng)[0]
    om9 = constraint_oneforms(MapKind.HURWITZ5_SPHERE, u9, u9)
    assert np.max(np.abs(om9)) < 1e-13


def test_constraint_oneforms_kind_error():
    with pytest.raises(KindError):
        constraint_oneforms(MapKind.LC2_SPHERE, [1.0, 0.0, 1.0], [0.0, 1.0, 0.0])


def test_oneforms_vanish_on_horizontal_chart_tangents():
    # chi and beta tangents of the Euler chart, chi and theta tangents of
    # the 8D chart, are horizontal directions.
    angles = AngleChart(chi=0.9, beta=1.1, alpha=0.7, gamma=2.5)
    u = parametrize(MapKind.KS3_SPHERE, angles, 1.3)
    tangents = chart_tangents(MapKind.KS3_SPHERE, angles, 1.3, method="analytic")
    for name in ("chi", "beta"):
        om = constraint_oneforms(MapKind.KS3_SPHERE, u, tangents[name])
        assert np.max(np.abs(om)) < 1e-10
    fd = chart_tangents(MapKind.KS3_SPHERE, angles, 1.3, method="fd")
    for name in ("chi", "beta"):
        om = constraint_oneforms(MapKind.KS3_SPHERE, u, fd[name])
        assert np.max(np.abs(om)) < 1e-8

    angles8 = AngleChart(chi=0.8, theta=0.9, beta=1.1, alpha=0.7, gamma=2.5,
                         betaH=0.6, alphaH=0.4, gammaH=1.9)
    u8 = parametrize(MapKind.HURWITZ5_SPHERE, angles8, 1.0)
    tangents8 = chart_tangents(MapKind.HURWITZ5_SPHERE, angles8, 1.0)
    for name in ("chi", "theta"):
        om = constraint_oneforms(MapKind.HURWITZ5_SPHERE, u8, tangents8[name])
        assert np.max(np.abs(om)) < 1e-10
    fd8 = chart_tangents(MapKind.HURWITZ5_SPHERE, angles8, 1.0, method="fd")
    for name in ("chi", "theta"):
        om = constraint_oneforms(MapKind.HURWITZ5_SPHERE, u8, fd8[name])
        assert np.max(np.abs(om)) < 1e-8


def test_ks_oneform_euler_values():
    # On the Euler chart the one-form takes the values
    # omega(d_alpha) = -(A^2/2) cos(beta), omega(d_gamma) = -A^2/2.
    D = 1.4
    angles = AngleChart(chi=0.7, beta=0.9, alpha=1.3, gamma=3.0)
    u = parametrize(MapKind.KS3_SPHERE, angles, D)
    tangents = chart_tangents(MapKind.KS3_SPHERE, angles, D)
    A_sq = D * D * (1.0 - cmath.exp(2j * angles.chi))
    om_alpha = constraint_oneforms(MapKind.KS3_SPHERE, u, tangents["alpha"])[0]
    om_gamma = constraint_oneforms(MapKind.KS3_SPHERE, u, tangents["gamma"])[0]
    assert abs(om_alpha - (-(A_sq / 2.0) * math.cos(angles.beta))) < 1e-12
    assert abs(om_gamma - (-A_sq / 2.0)) < 1e-12


def test_chart_tangents_analytic_vs_fd():
    cases = [
        (MapKind.LC2_SPHERE, AngleChart(chi=0.8, phi=2.2), 1.2),
        (MapKind.KS3_SPHERE, AngleChart(chi=0.8, beta=1.0, alpha=0.5, gamma=2.0), 0.9),
        (MapKind.HURWITZ5_SPHERE,
         AngleChart(chi=1.0, theta=0.7, beta=1.3, alpha=0.9, gamma=4.4,
                    betaH=0.5, alphaH=1.7, gammaH=6.0), 1.0),
    ]
    for kind, angles, D in cases:
        analytic = chart_tangents(kind, angles, D, method="analytic")
        fd = chart_tangents(kind, angles, D, method="fd", step=1e-6)
        for name, vec in analytic.items():
            assert np.max(np.abs(vec - fd[name])) < 1e-8


def test_horizontal_lift_consistency():
    # lift then push forward recovers sdot; constraints hold exactly
    for kind in SPHERE_KINDS:
        D = 1.0
        if kind is MapKind.LC2_SPHERE:
            angles = AngleChart(chi=0.7, phi=1.0)
        elif kind is MapKind.KS3_SPHERE:
            angles = AngleChart(chi=0.7, beta=1.0, alpha=0.4, gamma=0.9)
        else:
            angles = AngleChart(chi=0.7, theta=0.8, beta=1.0, alpha=0.4,
                                gamma=0.9, betaH=0.3, alphaH=0.2, gammaH=0.1)
        u = parametrize(kind, angles, D)
        s = forward_map(kind, u).coords
        rng = np.random.default_rng(53)
        raw = rng.uniform(-1.0, 1.0, s_dimension(kind))
        # project onto the tangent plane of the real s-sphere
        sdot = raw - (raw @ s.real) * s.real / (s.real @ s.real)
        udot = horizontal_lift(kind, u, sdot)
        pushed = forward_jacobian(kind, u) @ udot
        assert np.max(np.abs(pushed - sdot)) < 1e-10
        assert abs(np.sum(u.coords * udot)) < 1e-10
        if kind is not MapKind.LC2_SPHERE:
            om = constraint_oneforms(kind, u, udot)
            assert np.max(np.abs(om)) < 1e-10


# --------------------------------------------------------- metric relation

def test_metric_relation_zero_displacement():
    u = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=0.6, phi=0.8), 1.0)
    assert metric_relation_residual(MapKind.LC2_SPHERE, u, np.zeros(3)) == 0.0


def test_metric_relation_lc2_chart_tangent():
    angles = AngleChart(chi=math.pi / 3.0, phi=1.0)
    u = parametrize(MapKind.LC2_SPHERE, angles, 1.0)
    eps = 1e-4
    du = chart_tangents(MapKind.LC2_SPHERE, angles, 1.0, method="fd")["phi"] * eps
    ds = forward_jacobian(MapKind.LC2_SPHERE, u) @ du
    resid = metric_relation_residual(MapKind.LC2_SPHERE, u, du)
    assert resid / abs(np.sum(ds**2)) < 1e-9


@pytest.mark.parametrize("kind", [MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE])
def test_metric_relation_with_oneform_terms(kind):
    # a tangent that is not horizontal: the full relation still closes,
    # and without the one-form terms the residual equals their contribution
    if kind is MapKind.KS3_SPHERE:
        angles = AngleChart(chi=0.9, beta=1.2, alpha=0.8, gamma=2.0)
    else:
        angles = AngleChart(chi=0.9, theta=1.0, beta=1.2, alpha=0.8, gamma=2.0,
                            betaH=0.7, alphaH=0.5, gammaH=1.5)
    D = 1.0
    u = parametrize(kind, angles, D)
    tangents = chart_tangents(kind, angles, D)
    du = tangents["gamma"] + 0.3 * tangents["alpha"]
    assert abs(np.sum(u.coords * du)) < 1e-12
    full = metric_relation_residual(kind, u, du, include_oneform_terms=True)
    bare = metric_relation_residual(kind, u, du, include_oneform_terms=False)
    om = constraint_oneforms(kind, u, du)
    Q = np.sum(u.coords**2)
    omega_term = abs((Q / u.coords[-1] ** 2) * np.sum(om**2))
    assert full < 1e-9 * max(1.0, omega_term)
    assert omega_term > 1e-3
    assert abs(bare - omega_term) < 1e-9 * max(1.0, omega_term)


def test_metric_relation_horizontal_tangents_close():
    angles = AngleChart(chi=0.8, theta=0.7, beta=1.1, alpha=0.6, gamma=1.9,
                        betaH=0.4, alphaH=1.0, gammaH=2.2)
    u = parametrize(MapKind.HURWITZ5_SPHERE, angles, 1.0)
    tangents = chart_tangents(MapKind.HURWITZ5_SPHERE, angles, 1.0)
    du = tangents["chi"] + 0.5 * tangents["theta"]
    resid = metric_relation_residual(MapKind.HURWITZ5_SPHERE, u, du)
    assert resid < 1e-10


def test_metric_relation_non_tangent_error():
    u = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=0.6, phi=0.8), 1.0)
    with pytest.raises(NonTangentError):
        metric_relation_residual(MapKind.LC2_SPHERE, u, u.coords)


def test_metric_relation_kind_error():
    with pytest.raises(KindError):
        metric_relation_residual(MapKind.LC2_FLAT, [1.0, 0.5], [0.0, 0.0])


# ------------------------------------------------------------ fiber angles

def test_hurwitz_angles_gimbal_zero():
    angles = AngleChart(chi=0.8, theta=0.9, beta=1.1, alpha=0.7, gamma=0.5,
                        betaH=0.0, alphaH=1.3, gammaH=0.0)
    u = parametrize(MapKind.HURWITZ5_SPHERE, angles, 1.0)
    alphaH, betaH, gammaH = hurwitz_angles(u)
    assert betaH == 0.0
    assert gammaH == 0.0
    # at betaH = 0 only alphaH + gammaH is defined; chart had gammaH = 0
    assert abs(alphaH - angles.alphaH) < 1e-10


def test_hurwitz_angles_half_turn():
    u = np.zeros(9, dtype=complex)
    u[0] = 1.0
    u[2] = 1.0
    u[8] = 0.5
    _, betaH, _ = hurwitz_angles(u)
    assert abs(betaH - math.pi / 2.0) < 1e-14


def test_hurwitz_angles_degenerate():
    u = np.zeros(9, dtype=complex)
    u[2] = 1.0
    u[8] = 0.5
    with pytest.raises(DegenerateAngleError):
        hurwitz_angles(u)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**6))
def test_hurwitz_angles_round_trip(seed):
    rng = np.random.default_rng(seed)
    angles = AngleChart(
        chi=rng.uniform(0.1, math.pi - 0.1),
        theta=rng.uniform(0.1, math.pi - 0.1),
        beta=rng.uniform(0.1, math.pi - 0.1),
        alpha=rng.uniform(0.0, 2.0 * math.pi - 0.01),
        gamma=rng.uniform(0.0, 4.0 * math.pi - 0.01),
        betaH=rng.uniform(0.05, math.pi - 0.05),
        alphaH=rng.uniform(0.0, 2.0 * math.pi - 0.01),
        gammaH=rng.uniform(0.0, 4.0 * math.pi - 0.01),
    )
    u = parametrize(MapKind.HURWITZ5_SPHERE, angles, 1.0)
    alphaH, betaH, gammaH = hurwitz_angles(u)
    assert abs(betaH - angles.betaH) < 1e-10
    assert abs(alphaH - angles.alphaH) < 1e-10
    assert abs(gammaH - angles.gammaH) < 1e-10


# ------------------------------------------------------------- contraction

def test_contract_to_flat_limit_values():
    s = contract_to_flat(MapKind.LC2_SPHERE, [1.0, 0.0], math.inf)
    assert np.allclose(s, [0.5j, 0.0], atol=1e-15)
    s = contract_to_flat(MapKind.LC2_SPHERE, [1.0, 1.0], math.inf)
    assert np.allclose(s, [0.0, 1j], atol=1e-15)


def test_contract_to_flat_order():
    ubar = [1.0, 0.0]
    limit = contract_to_flat(MapKind.LC2_SPHERE, ubar, math.inf)
    err10 = np.linalg.norm(contract_to_flat(MapKind.LC2_SPHERE, ubar, 10.0) - limit)
    err_sqrt10 = np.linalg.norm(
        contract_to_flat(MapKind.LC2_SPHERE, ubar, math.sqrt(10.0)) - limit
    )
    ratio = err10 / err_sqrt10
    assert abs(ratio - 0.1) < 0.01


def test_contract_to_flat_kind_error():
    with pytest.raises(KindError):
        contract_to_flat(MapKind.KS3_SPHERE, [1.0, 0.0], 2.0)


# ----------------------------------------------------------------- spaces

def test_space_spec_validation():
    with pytest.raises(DimensionMismatchError):
        SpaceSpec(dim=3, radius=1.0, signature=(1, 1))
    space = sphere_space(4, 2.0)
    assert space.signature == (1, 1, 1, 1)


def test_ambient_point_constraint_residual():
    space = SpaceSpec(dim=3, radius=1.0, signature=(-1, -1, 1))
    point = AmbientPoint(np.array([0.3, 0.4, math.sqrt(1.25)]), space)
    assert point.constraint_residual() < 1e-12
