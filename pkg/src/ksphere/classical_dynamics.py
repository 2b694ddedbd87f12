"""Classical Kepler motion on spheres and its regularized oscillator form.

The direct system integrates s(t) on the constraint sphere s.s = R^2 and is
singular at the poles.  The regularized system integrates u(tau) on u.u = D^2
where the motion is a harmonic oscillator with a centrifugal-type term in the
last component; the two are compared through the quadratic map and the
fictitious-time reparametrization dtau/dt.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import DomainError, KindError, PoleError, SingularDivisorError
from .duality_maps import (
    AngleChart,
    MapKind,
    forward_map,
    horizontal_lift,
    oneform_rows,
    parametrize,
    u_dimension,
)

_TANGENCY_TOL = 1e-8
_UNDERFLOW_FLOOR = 1e-13

_KIND_BY_DIM = {
    2: MapKind.LC2_SPHERE,
    3: MapKind.KS3_SPHERE,
    5: MapKind.HURWITZ5_SPHERE,
}


# ------------------------------------------------------------------ states

@dataclass
class ClassicalState:
    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)


@dataclass
class RegularizedState:
    uposition: np.ndarray
    uvelocity: np.ndarray
    tau: complex = 0.0

    def __post_init__(self):
        self.uposition = np.asarray(self.uposition, dtype=complex)
        self.uvelocity = np.asarray(self.uvelocity, dtype=complex)


@dataclass
class FlatKeplerState:
    position: tuple
    velocity: tuple
    h: float


@dataclass
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05
    projection: bool = True

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_step <= 0:
            raise DomainError("integrator tolerances must be positive")


@dataclass
class TrajectoryRecord:
    samples: list
    energy_drift: float
    constraint_drift: float
    steps_taken: int
    sample_residuals: list = field(default_factory=list)
    underflow: bool = False


# ------------------------------------------------------------- right sides

def direct_rhs(n, R, mu, state):
    """Acceleration of the singular Kepler system on the n-sphere.

    The potential gradient is tangent to the constraint sphere, so the
    multiplier reduces to (sdot.sdot)/(s.s); at R = 1 this is the plain
    centripetal term.
    """
    s = np.asarray(state.position, dtype=float)
    v = np.asarray(state.velocity, dtype=float)
    rho2 = float(np.dot(s[:n], s[:n]))
    if rho2 <= 0.0:
        raise PoleError("direct system is singular at the poles")
    rho = math.sqrt(rho2)
    lam = float(np.dot(v, v)) / float(np.dot(s, s))
    acc = -lam * s
    acc[:n] -= (mu / R) * s[:n] * s[n] / rho ** 3
    acc[n] += (mu / R) / rho
    return ClassicalState(position=v, velocity=acc, time=1.0)


def regularized_rhs(kind, E, mu, D, state):
    """Oscillator-form acceleration in the fictitious time tau."""
    u = np.asarray(state.uposition, dtype=complex)
    v = np.asarray(state.uvelocity, dtype=complex)
    if abs(u[-1]) < 1e-14:
        raise SingularDivisorError("last u component vanishes")
    omega = 2.0 * (E + 1j * mu / (D * D))
    acc = -omega * u
    acc[-1] += (2.0 * D ** 4 / u[-1] ** 3) * (E - 1j * mu / (D * D))
    return RegularizedState(uposition=v, uvelocity=acc, tau=1.0)


def first_integral_residual(kind, E, mu, D, state):
    """Value of the conserved quadratic form of the tau-system."""
    u = np.asarray(state.uposition, dtype=complex)
    v = np.asarray(state.uvelocity, dtype=complex)
    if abs(u[-1]) < 1e-14:
        raise SingularDivisorError("last u component vanishes")
    return (
        np.sum(v * v)
        - 2.0 * D * D * (E + 1j * mu / (D * D))
        + (2.0 * D ** 4 / u[-1] ** 2) * (E - 1j * mu / (D * D))
    )


def energy(state, mu, R):
    """Conserved energy (1/2) sdot.sdot - (mu/R) s_last / rho."""
    s = np.asarray(state.position, dtype=float)
    v = np.asarray(state.velocity, dtype=float)
    rho2 = float(np.dot(s[:-1], s[:-1]))
    if rho2 <= 0.0:
        raise PoleError("potential is singular at the poles")
    return 0.5 * float(np.dot(v, v)) - (mu / R) * s[-1] / math.sqrt(rho2)


def fictitious_time_factor(kind, state):
    """dtau/dt = (1/D^2) u_last^2 / sum of the transverse u squares."""
    u = np.asarray(state.uposition, dtype=complex)
    transverse = complex(np.sum(u[:-1] * u[:-1]))
    if abs(transverse) < 1e-14:
        raise PoleError("fictitious-time factor diverges over the pole")
    D2 = complex(np.sum(u * u))
    return (u[-1] ** 2 / transverse) / D2


# -------------------------------------------------- Dormand-Prince stepper

_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
          11.0 / 84.0, 0.0)
_DP_B4 = (5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
          -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0)


def _dp_step(f, x, y, h):
    k = []
    for i in range(7):
        yi = y
        for j, a in enumerate(_DP_A[i]):
            if a != 0.0:
                yi = yi + (h * a) * k[j]
        k.append(f(x + _DP_C[i] * h, yi))
    y5 = y
    y4 = y
    for i in range(7):
        if _DP_B5[i] != 0.0:
            y5 = y5 + (h * _DP_B5[i]) * k[i]
        if _DP_B4[i] != 0.0:
            y4 = y4 + (h * _DP_B4[i]) * k[i]
    return y5, y5 - y4


def _error_norm(err, y_old, y_new, config):
    scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y_old),
                                                         np.abs(y_new))
    ratio = np.abs(err) / scale
    return math.sqrt(float(np.mean(ratio * ratio)))


def _drive(f, x0, y0, x_end, config, project=None, on_accept=None):
    """Adaptive 5(4) driver; returns (x, y, steps, underflow)."""
    x = x0
    y = np.array(y0)
    span = abs(x_end - x0)
    if span == 0.0:
        return x, y, 0, False
    h = min(config.max_step, span / 10.0)
    steps = 0
    underflow = False
    while x < x_end - 1e-15 * max(1.0, abs(x_end)):
        h = min(h, x_end - x, config.max_step)
        if h < _UNDERFLOW_FLOOR * max(1.0, abs(x)):
            # a sliver left by rounding is completion, not a stall
            underflow = (x_end - x) > 1e-9 * max(1.0, abs(x_end))
            break
        y_new, err = _dp_step(f, x, y, h)
        if not np.all(np.isfinite(np.abs(y_new))):
            h *= 0.5
            continue
        norm = _error_norm(err, y, y_new, config)
        if norm <= 1.0:
            x += h
            y = y_new
            if project is not None:
                y = project(y)
            steps += 1
            if on_accept is not None:
                on_accept(x, y)
        factor = 0.9 * (norm ** -0.2) if norm > 0.0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return x, y, steps, underflow


# --------------------------------------------------------------- integrate

def _pack(state):
    if isinstance(state, ClassicalState):
        return np.concatenate([state.position, state.velocity]).astype(float)
    return np.concatenate([state.uposition, state.uvelocity]).astype(complex)


def _unpack(template, y, x):
    k = y.size // 2
    if isinstance(template, ClassicalState):
        return ClassicalState(position=y[:k].copy(), velocity=y[k:].copy(),
                              time=x)
    return RegularizedState(uposition=y[:k].copy(), uvelocity=y[k:].copy(),
                            tau=x)


def _sphere_project(y):
    k = y.size // 2
    pos = y[:k]
    vel = y[k:]
    norm2 = np.sum(pos * pos)
    radius2 = _sphere_project.radius2
    pos = pos * np.sqrt(radius2 / norm2)
    vel = vel - (np.sum(pos * vel) / np.sum(pos * pos)) * pos
    return np.concatenate([pos, vel])


def _make_projector(state0):
    if isinstance(state0, ClassicalState):
        radius2 = float(np.dot(state0.position, state0.position))

        def project(y):
            k = y.size // 2
            pos, vel = y[:k], y[k:]
            pos = pos * math.sqrt(radius2 / float(np.dot(pos, pos)))
            vel = vel - (np.dot(pos, vel) / np.dot(pos, pos)) * pos
            return np.concatenate([pos, vel])

        return project
    d2 = complex(np.sum(state0.uposition * state0.uposition))

    def project(y):
        k = y.size // 2
        pos, vel = y[:k], y[k:]
        pos = pos * np.sqrt(d2 / np.sum(pos * pos))
        vel = vel - (np.sum(pos * vel) / np.sum(pos * pos)) * pos
        return np.concatenate([pos, vel])

    return project


def integrate(rhs, state0, t_end, config, diagnostics=None):
    """Integrate a state ODE with the embedded 5(4) pair.

    rhs maps a state to its derivative-shaped state.  Projection (when
    enabled) renormalizes the position onto its initial quadric and removes
    the normal velocity component after each accepted step.  Step underflow
    near a singularity finishes the record early and flags it instead of
    raising.
    """
    if isinstance(state0, ClassicalState):
        tangency = abs(float(np.dot(state0.position, state0.velocity)))
        x0 = state0.time
    else:
        tangency = abs(complex(np.sum(state0.uposition * state0.uvelocity)))
        x0 = state0.tau if isinstance(state0.tau, float) else float(
            np.real(state0.tau))
    scale = 1.0 + float(np.max(np.abs(_pack(state0))))
    if tangency > _TANGENCY_TOL * scale * scale:
        raise DomainError("initial velocity is not tangent to the constraint")

    def f(x, y):
        state = _unpack(state0, y, x)
        dstate = rhs(state)
        return _pack(dstate)

    samples = [(x0, state0)]
    residuals = []
    if diagnostics is not None:
        residuals.append(diagnostics(state0))

    def on_accept(x, y):
        state = _unpack(state0, y, x)
        samples.append((x, state))
        if diagnostics is not None:
            residuals.append(diagnostics(state))

    project = _make_projector(state0) if config.projection else None
    _, _, steps, underflow = _drive(f, x0, _pack(state0), t_end, config,
                                    project=project, on_accept=on_accept)
    energy_drift = 0.0
    constraint_drift = 0.0
    if residuals:
        energy_drift = max(abs(r[0]) for r in residuals)
        constraint_drift = max(abs(r[1]) for r in residuals)
    return TrajectoryRecord(samples=samples, energy_drift=energy_drift,
                            constraint_drift=constraint_drift,
                            steps_taken=steps, sample_residuals=residuals,
                            underflow=underflow)


def integrate_direct(n, R, mu, state0, t_end, config):
    """Direct-system run with energy and constraint diagnostics attached."""
    e0 = energy(state0, mu, R)

    def diagnostics(state):
        s = state.position
        constraint = abs(float(np.dot(s, s)) - R * R)
        constraint = max(constraint, abs(float(np.dot(s, state.velocity))))
        try:
            de = energy(state, mu, R) - e0
        except PoleError:
            de = math.inf
        return (de, constraint)

    return integrate(lambda st: direct_rhs(n, R, mu, st), state0, t_end,
                     config, diagnostics=diagnostics)


# -------------------------------------------------------- chart extraction

def sphere_chart_angles(kind, s, R):
    """Invert the real-slice s-chart into an AngleChart."""
    s = np.asarray(s, dtype=float)
    if kind == MapKind.LC2_SPHERE:
        chi = math.atan2(math.hypot(s[0], s[1]), s[2])
        return AngleChart(chi=chi, phi=math.atan2(s[1], s[0]) % (2 * math.pi))
    if kind == MapKind.KS3_SPHERE:
        rho = math.sqrt(float(np.dot(s[:3], s[:3])))
        chi = math.atan2(rho, s[3])
        beta = math.atan2(math.hypot(s[0], s[1]), s[2])
        alpha = math.atan2(s[1], s[0]) % (2 * math.pi)
        return AngleChart(chi=chi, beta=beta, alpha=alpha)
    if kind == MapKind.HURWITZ5_SPHERE:
        rho5 = math.sqrt(float(np.dot(s[:5], s[:5])))
        chi = math.atan2(rho5, s[5])
        rho4 = math.sqrt(float(np.dot(s[:4], s[:4])))
        theta = math.atan2(rho4, s[4])
        z1 = complex(s[0], s[1])
        z2 = complex(s[2], s[3])
        beta = 2.0 * math.atan2(abs(z2), abs(z1))
        alpha = (cmath.phase(z1) + cmath.phase(z2)) % (2 * math.pi)
        gamma = (cmath.phase(z1) - cmath.phase(z2)) % (4 * math.pi)
        return AngleChart(chi=chi, theta=theta, beta=beta, alpha=alpha,
                          gamma=gamma)
    raise KindError("no real-slice chart inversion for %s" % (kind,))


def regularized_initial(kind, state, D):
    """Lift a direct-system initial state to a horizontal regularized state."""
    R = D * D
    angles = sphere_chart_angles(kind, state.position, R)
    u0 = parametrize(kind, angles, D).coords
    g = 1.0 / fictitious_time_factor(
        kind, RegularizedState(uposition=u0, uvelocity=np.zeros_like(u0)))
    sdot_tau = np.asarray(state.velocity, dtype=complex) * g
    v0 = horizontal_lift(kind, u0, sdot_tau)
    return RegularizedState(uposition=u0, uvelocity=v0, tau=0.0)


# ----------------------------------------------------- regularized in time

def _regularized_drift(kind, E, mu, D, u, v):
    constraint = abs(complex(np.sum(u * u)) - D * D)
    constraint = max(constraint, abs(complex(np.sum(u * v))))
    if kind in (MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE):
        for row in oneform_rows(kind, u):
            constraint = max(constraint, abs(complex(np.dot(row, v))))
    state = RegularizedState(uposition=u, uvelocity=v)
    integral = abs(first_integral_residual(kind, E, mu, D, state))
    return constraint, integral


def integrate_regularized_physical(kind, E, mu, D, state0, t_end, config):
    """Run the tau-system against physical time t.

    The trajectory is driven by an arc-length-like parameter h with
    dt/dh = |dt/dtau| so that t increases monotonically while tau traces a
    complex path.  Returns the mapped s-samples against t plus drift
    diagnostics of the regularized run.
    """
    k = u_dimension(kind)
    u0 = np.asarray(state0.uposition, dtype=complex)
    v0 = np.asarray(state0.uvelocity, dtype=complex)
    omega = 2.0 * (E + 1j * mu / (D * D))
    last_term = 2.0 * D ** 4 * (E - 1j * mu / (D * D))

    def f(h, y):
        u = y[:k]
        v = y[k : 2 * k]
        transverse = np.sum(u[:-1] * u[:-1])
        g = D * D * transverse / (u[-1] ** 2)  # dt/dtau
        dtau_dh = np.conj(g) / abs(g)
        acc = -omega * u
        acc[-1] += last_term / u[-1] ** 3
        out = np.empty(2 * k + 2, dtype=complex)
        out[:k] = v * dtau_dh
        out[k : 2 * k] = acc * dtau_dh
        out[2 * k] = dtau_dh
        out[2 * k + 1] = abs(g)
        return out

    d2 = complex(np.sum(u0 * u0))

    def project(y):
        u = y[:k]
        v = y[k : 2 * k]
        u = u * np.sqrt(d2 / np.sum(u * u))
        v = v - (np.sum(u * v) / np.sum(u * u)) * u
        out = y.copy()
        out[:k] = u
        out[k : 2 * k] = v
        return out

    y0 = np.concatenate([u0, v0, [0.0 + 0.0j, 0.0 + 0.0j]])
    t_index = 2 * k + 1

    samples = []
    drift_constraint = 0.0
    drift_integral = 0.0

    h_pos = 0.0
    y = y0.copy()
    s0 = np.real(forward_map(kind, u0).coords)
    samples.append((0.0, ClassicalState(position=s0,
                                        velocity=np.zeros(s0.size),
                                        time=0.0)))
    c0, i0 = _regularized_drift(kind, E, mu, D, u0, v0)
    drift_constraint = max(drift_constraint, c0)
    drift_integral = max(drift_integral, i0)
    steps = 0
    underflow = False
    h_step = min(config.max_step, 0.01)
    guard = 0
    while True:
        guard += 1
        if guard > 2_000_000:
            raise DomainError("regularized driver failed to reach t_end")
        t_now = float(np.real(y[t_index]))
        if t_now >= t_end - 1e-13 * max(1.0, abs(t_end)):
            break
        if h_step < _UNDERFLOW_FLOOR:
            underflow = True
            break
        y_new, err = _dp_step(f, h_pos, y, h_step)
        norm = _error_norm(err, y, y_new, config)
        if norm <= 1.0:
            t_new = float(np.real(y_new[t_index]))
            if t_new > t_end + 1e-13:
                # shrink the step to land on t_end via the monotone t(h)
                lo, hi = 0.0, h_step
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    y_mid, _ = _dp_step(f, h_pos, y, mid)
                    if float(np.real(y_mid[t_index])) < t_end:
                        lo = mid
                    else:
                        hi = mid
                h_step = 0.5 * (lo + hi)
                y_new, _ = _dp_step(f, h_pos, y, h_step)
            h_pos += h_step
            y = y_new
            if config.projection:
                y = project(y)
            steps += 1
            u = y[:k]
            v = y[k : 2 * k]
            t_now = float(np.real(y[t_index]))
            s_mapped = forward_map(kind, u).coords
            samples.append((t_now,
                            ClassicalState(position=np.real(s_mapped),
                                           velocity=np.zeros(s_mapped.size),
                                           time=t_now)))
            c, integ = _regularized_drift(kind, E, mu, D, u, v)
            drift_constraint = max(drift_constraint, c)
            drift_integral = max(drift_integral, integ)
        factor = 0.9 * (norm ** -0.2) if norm > 0.0 else 5.0
        h_step *= min(5.0, max(0.2, factor))
        h_step = min(h_step, config.max_step)
    record = TrajectoryRecord(samples=samples, energy_drift=drift_integral,
                              constraint_drift=drift_constraint,
                              steps_taken=steps, underflow=underflow)
    return record


# ------------------------------------------------------------ period search

def radial_period(n, R, mu, state0, config):
    """First return time of s_last to its initial value with matching sign.

    The crossing is bracketed on the adaptive samples and refined by
    bisection with short re-integrations.
    """
    s_last0 = state0.position[n]
    vsign0 = math.copysign(1.0, state0.velocity[n])
    chunk = 2.0
    horizon = 50.0
    prev_t, prev_state = 0.0, state0
    prev_g = 0.0
    t_start = 0.0
    while t_start < horizon:
        record = integrate_direct(n, R, mu, prev_state,
                                  min(t_start + chunk, horizon), config)
        start_index = 1 if t_start == 0.0 else 0
        for t, state in record.samples[start_index:]:
            g = state.position[n] - s_last0
            vs = math.copysign(1.0, state.velocity[n])
            if (prev_t > 0.0 and prev_g * g <= 0.0 and vs == vsign0
                    and t > 1e-6):
                gsign_hi = math.copysign(1.0, g)
                lo, hi = prev_t, t
                state_lo = prev_state
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    rec = integrate_direct(n, R, mu, state_lo, mid, config)
                    st_mid = rec.samples[-1][1]
                    gm = st_mid.position[n] - s_last0
                    if gm * gsign_hi > 0:
                        hi = mid
                    else:
                        lo = mid
                        state_lo = st_mid
                    if hi - lo < 1e-10:
                        break
                return 0.5 * (lo + hi)
            prev_t, prev_state, prev_g = t, state, g
        if record.underflow:
            raise DomainError(
                "direct run underflows near the pole before a radial "
                "return; integrate with an explicit t_end instead"
            )
        t_start = prev_t
    raise DomainError("no radial return found within the search horizon")


# --------------------------------------------------------- duality compare

def duality_compare(dim, mu, R, state0, t_end, config):
    """Integrate both pictures from the same data and report the deviation.

    The regularized run is lifted horizontally from the direct initial
    state, driven in physical time, and mapped back through the quadratic
    map; the direct system is then sampled at exactly the mapped times.
    """
    kind = _KIND_BY_DIM[dim]
    D = math.sqrt(R)
    E = energy(state0, mu, R)
    reg0 = regularized_initial(kind, state0, D)
    mapped = integrate_regularized_physical(kind, E, mu, D, reg0, t_end,
                                            config)
    deviation = 0.0
    state = state0
    t_prev = 0.0
    direct_samples = [(0.0, state0)]
    for (t_k, mapped_state) in mapped.samples:
        if t_k > t_prev:
            rec = integrate_direct(dim, R, mu, state, t_k, config)
            state = rec.samples[-1][1]
            t_prev = t_k
            direct_samples.append((t_k, state))
        deviation = max(deviation, float(np.max(np.abs(
            state.position - mapped_state.position))))
    direct = integrate_direct(dim, R, mu, state0, t_end, config)
    return {
        "kind": kind,
        "energy": E,
        "deviation": deviation,
        "direct": direct,
        "mapped": mapped,
        "direct_at_mapped_times": direct_samples,
    }


# ------------------------------------------------------------ HJ residuals

def hj_residual(kind, picture, point, gradS, E, mu):
    """Left-hand side of the Hamilton-Jacobi equation in either picture."""
    grad = np.asarray(gradS, dtype=complex)
    coords = np.asarray(point.coords, dtype=complex)
    if picture == "coulomb_s":
        R = point.space.radius
        rho2 = complex(np.sum(coords[:-1] * coords[:-1]))
        if abs(rho2) < 1e-14:
            raise PoleError("potential is singular at the poles")
        rho = np.sqrt(rho2)
        return complex(np.sum(grad * grad) - 2.0 * E
                       - (2.0 * mu / R) * coords[-1] / rho)
    if picture == "oscillator_u":
        D = point.space.radius
        if abs(coords[-1]) < 1e-14:
            raise SingularDivisorError("last u component vanishes")
        return complex(
            np.sum(grad * grad)
            - 2.0 * D * D * (E + 1j * mu / (D * D))
            + (2.0 * D ** 4 / coords[-1] ** 2) * (E - 1j * mu / (D * D))
        )
    raise KindError("picture must be coulomb_s or oscillator_u")


# -------------------------------------------------------------- CSV export

def trajectory_to_csv(record, stream):
    """Write t, coordinates, and residual columns with 17 digits."""
    first = record.samples[0][1]
    coords = first.position
    names = ["s%d" % (i + 1) for i in range(coords.size)]
    header = ["t"] + names + ["energy_residual", "constraint_residual"]
    stream.write(",".join(header) + "\n")
    for i, (t, state) in enumerate(record.samples):
        if i < len(record.sample_residuals):
            e_res, c_res = record.sample_residuals[i]
        else:
            e_res, c_res = 0.0, 0.0
        row = [t] + list(state.position) + [e_res, c_res]
        stream.write(",".join("%.17g" % float(v) for v in row) + "\n")
