import io
import math

import numpy as np
import pytest

from _orbits import (
    bound_state_2d,
    bound_state_3d,
    bound_state_5d,
    closed_form_period,
)
from ksphere import DomainError, KindError, PoleError, SingularDivisorError
from ksphere.classical_dynamics import (
    ClassicalState,
    IntegratorConfig,
    RegularizedState,
    direct_rhs,
    duality_compare,
    energy,
    fictitious_time_factor,
    first_integral_residual,
    hj_residual,
    integrate,
    integrate_direct,
    integrate_regularized_physical,
    radial_period,
    regularized_initial,
    regularized_rhs,
    sphere_chart_angles,
    trajectory_to_csv,
)
from ksphere.duality_maps import (
    AngleChart,
    MapKind,
    forward_jacobian,
    forward_map,
    oneform_rows,
    parametrize,
)

TIGHT = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, max_step=0.01)

CHARTS = {
    MapKind.LC2_SPHERE: AngleChart(chi=0.7, phi=1.3),
    MapKind.KS3_SPHERE: AngleChart(chi=0.7, beta=1.1, alpha=0.6, gamma=0.9),
    MapKind.HURWITZ5_SPHERE: AngleChart(chi=0.8, theta=0.9, beta=1.1,
                                        alpha=0.7, gamma=0.5, alphaH=0.3,
                                        betaH=0.8, gammaH=1.2),
}

BOUND = {2: bound_state_2d, 3: bound_state_3d, 5: bound_state_5d}


# ------------------------------------------------------------- right sides

def test_direct_rhs_great_circle():
    state = ClassicalState(position=[1.0, 0.0, 0.0], velocity=[0.0, 1.0, 0.0])
    out = direct_rhs(2, 1.0, 0.0, state)
    assert np.allclose(out.position, [0.0, 1.0, 0.0])
    assert np.allclose(out.velocity, [-1.0, 0.0, 0.0], atol=1e-15)


def test_direct_rhs_rest_is_pulled_toward_the_pole():
    state = ClassicalState(position=[1.0, 0.0, 0.0], velocity=[0.0, 0.0, 0.0])
    out = direct_rhs(2, 1.0, 1.0, state)
    assert np.allclose(out.velocity, [0.0, 0.0, 1.0], atol=1e-15)


def test_direct_rhs_free_rest_has_no_acceleration():
    state = ClassicalState(position=[0.0, 1.0, 0.0], velocity=[0.0, 0.0, 0.0])
    out = direct_rhs(2, 1.0, 0.0, state)
    assert np.allclose(out.velocity, 0.0, atol=1e-15)


def test_direct_rhs_singular_at_pole():
    state = ClassicalState(position=[0.0, 0.0, 1.0], velocity=[0.1, 0.0, 0.0])
    with pytest.raises(PoleError):
        direct_rhs(2, 1.0, 1.0, state)


def test_direct_rhs_acceleration_stays_tangent():
    rng = np.random.default_rng(3)
    R = 2.0
    for _ in range(5):
        s = rng.standard_normal(4)
        s *= R / math.sqrt(float(np.dot(s, s)))
        v = rng.standard_normal(4)
        v -= (np.dot(s, v) / np.dot(s, s)) * s
        out = direct_rhs(3, R, 1.7, ClassicalState(position=s, velocity=v))
        # differentiating s.sdot = 0 gives s.acc = -sdot.sdot
        assert abs(np.dot(s, out.velocity) + np.dot(v, v)) < 1e-12


def test_regularized_rhs_harmonic_component():
    state = RegularizedState(uposition=[1.0, 1.0], uvelocity=[0.0, 0.0])
    out = regularized_rhs(MapKind.LC2_FLAT, -1.0, 0.0, 1.0, state)
    assert abs(out.uvelocity[0] - 2.0) < 1e-15
    # on the last component the centrifugal term cancels the harmonic one
    assert abs(out.uvelocity[1]) < 1e-15


def test_regularized_rhs_free_motion():
    state = RegularizedState(uposition=[0.3, 0.8], uvelocity=[0.1, 0.2])
    out = regularized_rhs(MapKind.LC2_FLAT, 0.0, 0.0, 1.0, state)
    assert np.allclose(out.uposition, [0.1, 0.2])
    assert np.allclose(out.uvelocity, 0.0, atol=1e-15)


def test_regularized_rhs_rejects_vanishing_divisor():
    state = RegularizedState(uposition=[1.0, 0.0, 0.0],
                             uvelocity=[0.0, 0.0, 0.0])
    with pytest.raises(SingularDivisorError):
        regularized_rhs(MapKind.LC2_SPHERE, -1.0, 1.0, 1.0, state)


# ----------------------------------------------------------- lifted states

@pytest.mark.parametrize("dim", [2, 3, 5])
def test_lifted_state_consistency(dim):
    state0 = BOUND[dim]()
    mu, R = 1.0, 1.0
    D = math.sqrt(R)
    kind = {2: MapKind.LC2_SPHERE, 3: MapKind.KS3_SPHERE,
            5: MapKind.HURWITZ5_SPHERE}[dim]
    reg0 = regularized_initial(kind, state0, D)
    u0, v0 = reg0.uposition, reg0.uvelocity

    mapped = forward_map(kind, u0).coords
    assert np.max(np.abs(np.real(mapped) - state0.position)) < 1e-10
    assert np.max(np.abs(np.imag(mapped))) < 1e-10

    assert abs(complex(np.sum(u0 * v0))) < 1e-10
    if kind in (MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE):
        for row in oneform_rows(kind, u0):
            assert abs(complex(np.dot(row, v0))) < 1e-10

    # the mapped u-velocity reproduces sdot scaled by dt/dtau
    g = 1.0 / fictitious_time_factor(kind, reg0)
    eps = 1e-6
    fd = (forward_map(kind, u0 + eps * v0).coords
          - forward_map(kind, u0 - eps * v0).coords) / (2.0 * eps)
    target = g * state0.velocity.astype(complex)
    assert np.max(np.abs(fd - target)) < 1e-7

    E = energy(state0, mu, R)
    assert abs(first_integral_residual(kind, E, mu, D, reg0)) < 1e-10


# -------------------------------------------------------------- integrator

def test_integrator_config_rejects_bad_tolerances():
    with pytest.raises(DomainError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        IntegratorConfig(abs_tol=-1.0)
    with pytest.raises(DomainError):
        IntegratorConfig(max_step=0.0)


def test_integrate_rejects_nontangent_velocity():
    state = ClassicalState(position=[1.0, 0.0, 0.0], velocity=[0.5, 0.0, 0.0])
    with pytest.raises(DomainError):
        integrate_direct(2, 1.0, 1.0, state, 1.0, TIGHT)


def test_integrate_great_circle_closes():
    state = ClassicalState(position=[1.0, 0.0, 0.0], velocity=[0.0, 1.0, 0.0])
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, max_step=0.05)
    record = integrate_direct(2, 1.0, 0.0, state, 2.0 * math.pi, cfg)
    t_f, final = record.samples[-1]
    assert abs(t_f - 2.0 * math.pi) < 1e-12
    assert np.max(np.abs(final.position - state.position)) < 1e-8
    assert record.steps_taken > 0


def test_integrate_harmonic_matches_trig_solution():
    u0 = parametrize(MapKind.LC2_SPHERE, AngleChart(chi=1.0, phi=0.5),
                     1.0).coords
    v0 = np.array([u0[1], -u0[0], 0.0], dtype=complex) * 0.3
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, max_step=0.01,
                           projection=False)
    E = 0.5
    record = integrate(
        lambda st: regularized_rhs(MapKind.LC2_SPHERE, E, 0.0, 1.0, st),
        RegularizedState(uposition=u0, uvelocity=v0), 0.7, cfg)
    tau_f, final = record.samples[-1]
    w = math.sqrt(2.0 * E)
    exact = u0[:2] * math.cos(w * tau_f) + v0[:2] * math.sin(w * tau_f) / w
    assert np.max(np.abs(final.uposition[:2] - exact)) < 1e-8


def test_integrate_energy_drift_over_ten_periods():
    period = closed_form_period(-2.0, 1.0)
    record = integrate_direct(2, 1.0, 1.0, bound_state_2d(), 10.0 * period,
                              TIGHT)
    assert record.energy_drift < 1e-9
    assert record.constraint_drift < 1e-9


def test_integrate_reports_underflow_at_collision():
    chi0 = 0.4
    rest = ClassicalState(
        position=[math.sin(chi0), 0.0, math.cos(chi0)],
        velocity=[0.0, 0.0, 0.0])
    record = integrate_direct(2, 1.0, 1.0, rest, 5.0, TIGHT)
    assert record.underflow
    # the run stalls at the attracting pole instead of raising
    assert record.samples[-1][1].position[2] > 0.999
    assert record.samples[-1][0] < 5.0


# --------------------------------------------------- energy and time factor

def test_energy_on_the_equator():
    state = ClassicalState(position=[1.0, 0.0, 0.0], velocity=[0.0, 0.7, 0.0])
    assert abs(energy(state, 1.0, 1.0) - 0.5 * 0.49) < 1e-15


def test_energy_singular_at_pole():
    state = ClassicalState(position=[0.0, 0.0, 1.0], velocity=[0.0, 0.0, 0.0])
    with pytest.raises(PoleError):
        energy(state, 1.0, 1.0)


@pytest.mark.parametrize("D", [1.0, 1.4])
def test_fictitious_factor_on_the_equator(D):
    u = parametrize(MapKind.LC2_SPHERE,
                    AngleChart(chi=0.5 * math.pi, phi=0.3), D).coords
    state = RegularizedState(uposition=u, uvelocity=np.zeros(3, complex))
    factor = fictitious_time_factor(MapKind.LC2_SPHERE, state)
    assert abs(factor - (-1.0 / (2.0 * D * D))) < 1e-14


def test_fictitious_factor_diverges_over_the_pole():
    state = RegularizedState(uposition=[0.0, 0.0, 1.0],
                             uvelocity=[0.0, 0.0, 0.0])
    with pytest.raises(PoleError):
        fictitious_time_factor(MapKind.LC2_SPHERE, state)


# ------------------------------------------------------------ HJ residuals

def test_hj_coulomb_zero_on_equator():
    spt = forward_map(MapKind.LC2_SPHERE,
                      parametrize(MapKind.LC2_SPHERE,
                                  AngleChart(chi=0.5 * math.pi), 1.0))
    # s_last = 0 kills the potential, so grad.grad = 2E closes the equation
    res = hj_residual(MapKind.LC2_SPHERE, "coulomb_s", spt,
                      [1.0, 0.0, 0.0], 0.5, 1.0)
    assert abs(res) < 1e-12


def test_hj_picture_validation():
    spt = forward_map(MapKind.LC2_SPHERE,
                      parametrize(MapKind.LC2_SPHERE,
                                  AngleChart(chi=0.4), 1.0))
    with pytest.raises(KindError):
        hj_residual(MapKind.LC2_SPHERE, "bogus", spt, [0.0, 0.0, 0.0],
                    0.0, 0.0)


def test_hj_coulomb_singular_at_pole():
    spt = forward_map(MapKind.LC2_SPHERE,
                      parametrize(MapKind.LC2_SPHERE, AngleChart(chi=0.0),
                                  1.0))
    with pytest.raises(PoleError):
        hj_residual(MapKind.LC2_SPHERE, "coulomb_s", spt, [0.0, 0.0, 0.0],
                    -1.0, 1.0)


@pytest.mark.parametrize("kind", list(CHARTS))
def test_hj_cross_picture_proportionality(kind):
    rng = np.random.default_rng(7)
    D = 1.2
    upt = parametrize(kind, CHARTS[kind], D)
    spt = forward_map(kind, upt)
    u, s = upt.coords, spt.coords
    J = forward_jacobian(kind, u)
    E, mu = -0.8, 1.3
    for _ in range(3):
        gs = rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)
        gs = gs - (np.sum(gs * s) / np.sum(s * s)) * s
        gu = J.T @ gs
        c_res = hj_residual(kind, "coulomb_s", spt, gs, E, mu)
        o_res = hj_residual(kind, "oscillator_u", upt, gu, E, mu)
        factor = -(u[-1] ** 2) / (D * D * np.sum(u[:-1] ** 2))
        assert abs(c_res - factor * o_res) < 1e-10 * max(1.0, abs(c_res))


# ------------------------------------------------------- chart extraction

def test_sphere_chart_angles_roundtrip_2d():
    chi, phi = 0.7, 2.1
    s = np.array([math.sin(chi) * math.cos(phi),
                  math.sin(chi) * math.sin(phi), math.cos(chi)])
    angles = sphere_chart_angles(MapKind.LC2_SPHERE, s, 1.0)
    assert abs(angles.chi - chi) < 1e-14
    assert abs(angles.phi - phi) < 1e-14


def test_sphere_chart_angles_roundtrip_3d():
    chi, beta, alpha = 0.8, 1.0, 0.4
    s = np.array([math.sin(chi) * math.sin(beta) * math.cos(alpha),
                  math.sin(chi) * math.sin(beta) * math.sin(alpha),
                  math.sin(chi) * math.cos(beta), math.cos(chi)])
    angles = sphere_chart_angles(MapKind.KS3_SPHERE, s, 1.0)
    assert abs(angles.chi - chi) < 1e-14
    assert abs(angles.beta - beta) < 1e-14
    assert abs(angles.alpha - alpha) < 1e-14


def test_sphere_chart_angles_roundtrip_5d():
    chi, theta, beta, alpha, gamma = 0.8, 0.9, 1.1, 0.7, 0.5
    z1 = (math.sin(chi) * math.sin(theta) * math.cos(beta / 2.0)
          * np.exp(0.5j * (alpha + gamma)))
    z2 = (math.sin(chi) * math.sin(theta) * math.sin(beta / 2.0)
          * np.exp(0.5j * (alpha - gamma)))
    s = np.array([z1.real, z1.imag, z2.real, z2.imag,
                  math.sin(chi) * math.cos(theta), math.cos(chi)])
    angles = sphere_chart_angles(MapKind.HURWITZ5_SPHERE, s, 1.0)
    for got, want in [(angles.chi, chi), (angles.theta, theta),
                      (angles.beta, beta), (angles.alpha, alpha),
                      (angles.gamma, gamma)]:
        assert abs(got - want) < 1e-14


def test_sphere_chart_angles_requires_a_sphere_kind():
    with pytest.raises(KindError):
        sphere_chart_angles(MapKind.LC2_FLAT, np.array([1.0, 0.0]), 1.0)


# ----------------------------------------------------------- radial period

@pytest.mark.parametrize("dim,E", [(2, -2.0), (3, -0.5), (5, -0.5)])
def test_radial_period_matches_action_angle_form(dim, E):
    state0 = BOUND[dim](E=E)
    period = radial_period(dim, 1.0, 1.0, state0, TIGHT)
    want = closed_form_period(E, 1.0)
    assert abs(period - want) < 1e-8 * want


# -------------------------------------------------------- duality timeline

@pytest.mark.parametrize("dim,E", [(2, -2.0), (3, -0.5), (5, -0.5)])
def test_duality_compare_over_one_radial_period(dim, E):
    state0 = BOUND[dim](E=E)
    t_end = closed_form_period(E, 1.0)
    result = duality_compare(dim, 1.0, 1.0, state0, t_end, TIGHT)
    assert result["deviation"] < 1e-10
    assert result["mapped"].constraint_drift < 1e-9
    assert result["mapped"].energy_drift < 1e-9
    assert result["direct"].energy_drift < 1e-9
    assert result["direct"].constraint_drift < 1e-9


def test_regularized_run_passes_a_near_collision():
    chi0 = 0.4
    s0 = np.array([math.sin(chi0), 0.0, math.cos(chi0)])
    v0 = np.array([-0.6 * math.cos(chi0), 2e-3 * math.sin(chi0),
                   0.6 * math.sin(chi0)])
    near = ClassicalState(position=s0, velocity=v0)
    mu, R = 1.0, 1.0
    E = energy(near, mu, R)

    direct = integrate_direct(2, R, mu, near, 1.0, TIGHT)
    assert direct.underflow

    reg0 = regularized_initial(MapKind.LC2_SPHERE, near, 1.0)
    mapped = integrate_regularized_physical(MapKind.LC2_SPHERE, E, mu, 1.0,
                                            reg0, 1.0, TIGHT)
    assert not mapped.underflow
    assert abs(mapped.samples[-1][0] - 1.0) < 1e-10
    # the orbit actually sweeps through the neighborhood of the pole
    assert max(s.position[2] for _, s in mapped.samples) > 0.999
    assert mapped.constraint_drift < 1e-9
    assert mapped.energy_drift < 1e-9


# -------------------------------------------------------------- CSV export

def test_trajectory_to_csv_layout():
    state = ClassicalState(position=[1.0, 0.0, 0.0], velocity=[0.0, 1.0, 0.0])
    record = integrate_direct(2, 1.0, 0.0, state, 0.3, TIGHT)
    buf = io.StringIO()
    trajectory_to_csv(record, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "t,s1,s2,s3,energy_residual,constraint_residual"
    assert len(lines) == len(record.samples) + 1
    last = [float(v) for v in lines[-1].split(",")]
    t_f, final = record.samples[-1]
    assert last[0] == t_f
    assert last[1] == final.position[0]
