"""Spectra and wavefunctions of the dual Coulomb and oscillator systems.

The Coulomb problem on the real sphere S_n (n = 2, 3, 5) is solved through
the oscillator on the complexified sphere: energies are linked by a duality
parameter map, wavefunctions by the quadratic transformations, and the flat
limit is recovered by contraction R -> infinity.  All closed forms below are
built from terminating hypergeometric series, so every evaluator broadcasts
over numpy arrays of angles.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._errors import (
    DomainError,
    ParameterError,
    RangeError,
    SelectionRuleError,
)
from .geometry_quadrature import ChartFunction
from .special_functions import (
    clebsch_gordan,
    complex_log_gamma,
    hyp1f1_terminating,
    hyp2f1_terminating,
    jacobi_poly,
    sph_harm,
    wigner_D,
)

_DIMS = (2, 3, 5)

# nu = i sigma - (N + shift) and sigma = mu R / (N + shift)
_LEVEL_SHIFT = {2: 0.5, 3: 0.0, 5: 2.0}

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_ANGULAR_NORM = 1.0 / (2.0 * math.pi * math.pi)


def _require_dim(dim):
    if dim not in _DIMS:
        raise RangeError("dim must be 2, 3, or 5")


def _require_level(dim, N):
    _require_dim(dim)
    if N != int(N):
        raise RangeError("level index must be an integer")
    low = 1 if dim == 3 else 0
    if N < low:
        raise RangeError("level index out of range for this dimension")


def _gamma_ratio(num, den):
    return cmath.exp(complex_log_gamma(num) - complex_log_gamma(den))


# ---------------------------------------------------------------- energies

def coulomb_energy(dim, N, mu, R):
    """Bound-state energy on the sphere of radius R; R = inf gives the flat
    spectrum directly."""
    _require_level(dim, N)
    shift = _LEVEL_SHIFT[dim]
    flat = -mu * mu / (2.0 * (N + shift) ** 2)
    if math.isinf(R):
        return flat
    if R <= 0:
        raise RangeError("radius must be positive")
    if dim == 2:
        curvature = N * (N + 1) / (2.0 * R * R)
    elif dim == 3:
        curvature = (N * N - 1) / (2.0 * R * R)
    else:
        curvature = N * (N + 4) / (2.0 * R * R)
    return curvature + flat


def oscillator_energy(dim, n, nu, D):
    """Oscillator level for principal quantum number n and index nu."""
    _require_dim(dim)
    if n != int(n) or n < 0:
        raise RangeError("principal quantum number must be a non-negative"
                         " integer")
    nu = complex(nu)
    if dim == 2:
        value = (n + 1) * (n + 2) + (2.0 * nu - 1.0) * (n + 1)
    elif dim == 3:
        value = (n + 1) * (n + 4) + (2.0 * nu - 1.0) * (n + 2)
    else:
        value = (n + 1) * (n + 8) + (2.0 * nu - 1.0) * (n + 4)
    return value / (2.0 * D * D)


@dataclass
class DualityParams:
    mu: float
    R: float
    D: float
    E: float
    calE: complex
    omega2: complex
    nu: complex
    sigma: float
    k: complex


def duality_params(dim, mu, R, N):
    """Populate the full set of dual parameters for one Coulomb level."""
    _require_level(dim, N)
    if math.isinf(R) or R <= 0:
        raise RangeError("duality parameters need a finite positive radius")
    D = math.sqrt(R)
    shift = _LEVEL_SHIFT[dim]
    sigma = mu * R / (N + shift)
    nu = 1j * sigma - (N + shift)
    E = coulomb_energy(dim, N, mu, R)
    if dim == 2:
        calE = 2j * mu
        omega2 = 2.0 * (E - 1j * mu / (D * D))
    elif dim == 3:
        calE = 2j * mu - 1.0 / (D * D)
        omega2 = (2.0 * E * D * D - 2j * mu + 3.0 / (4.0 * D * D)) / (D * D)
    else:
        calE = 2j * mu - 6.0 / (D * D)
        omega2 = (2.0 * E * D * D - 2j * mu + 15.0 / (4.0 * D * D)) / (D * D)
    return DualityParams(mu=mu, R=R, D=D, E=E, calE=calE, omega2=omega2,
                         nu=nu, sigma=sigma, k=1j * mu)


# ---------------------------------------------------------- quantum numbers

@dataclass
class QuantumNumbers:
    """Validated label set for one state; fields unused by dim stay zero."""

    dim: int
    n_r: int = 0
    m: int = 0
    ell: int = 0
    m1: int = 0
    m2: int = 0
    lam: int = 0
    n_theta: int = None
    L: int = 0
    J: int = 0
    T: int = 0
    M: int = 0
    t: int = 0
    N: int = None

    def __post_init__(self):
        _require_dim(self.dim)
        if self.n_r < 0:
            raise RangeError("n_r must be non-negative")
        if self.dim == 2:
            if self.n_theta is None:
                self.n_theta = 0
            if self.N is not None:
                if self.m != 2 * self.M or self.N != self.n_r + abs(self.M):
                    raise ParameterError("reduced labels are inconsistent")
        elif self.dim == 3:
            if self.ell < 0:
                raise RangeError("ell must be non-negative")
            if abs(self.m1) > self.ell or abs(self.m2) > self.ell:
                raise RangeError("projections must not exceed ell")
            if self.n_theta is None:
                self.n_theta = 0
            if self.N is not None:
                if self.m2 != 0 or self.N != self.n_r + self.ell + 1:
                    raise ParameterError("reduced labels are inconsistent")
        else:
            if min(self.lam, self.L, self.J, self.T) < 0:
                raise RangeError("angular labels must be non-negative")
            if self.n_theta is None:
                self.n_theta = self.lam - self.L - self.J
            if self.n_theta != self.lam - self.L - self.J or self.n_theta < 0:
                raise RangeError("lam - L - J must be a non-negative integer"
                                 " equal to n_theta")
            if abs(self.m) > self.L or abs(self.t) > self.T:
                raise RangeError("projections must not exceed L and T")
            if abs(self.M) > self.J:
                raise RangeError("total projection must not exceed J")
            if self.N is not None:
                if (self.T != 0 or self.L != self.J
                        or self.N != self.n_r + self.lam):
                    raise ParameterError("reduced labels are inconsistent")

    @property
    def n(self):
        if self.dim == 2:
            return 2 * self.n_r + abs(self.m)
        if self.dim == 3:
            return 2 * self.n_r + 2 * self.ell
        return 2 * (self.n_r + self.lam)


@dataclass
class WaveSample:
    angles: object
    value: complex


def reduce_to_coulomb(dim, q):
    """Apply the constraint selection rules and return reduced labels."""
    _require_dim(dim)
    if q.dim != dim:
        raise ParameterError("quantum numbers carry a different dimension")
    if dim == 2:
        if q.m % 2 != 0:
            raise SelectionRuleError("odd azimuthal states do not survive"
                                     " the reduction")
        M = q.m // 2
        return QuantumNumbers(dim=2, n_r=q.n_r, m=q.m, M=M,
                              N=q.n_r + abs(M))
    if dim == 3:
        if q.m2 != 0:
            raise SelectionRuleError("states with m2 != 0 do not survive"
                                     " the reduction")
        return QuantumNumbers(dim=3, n_r=q.n_r, ell=q.ell, m1=q.m1,
                              N=q.n_r + q.ell + 1)
    if q.T != 0:
        raise SelectionRuleError("states with T != 0 do not survive the"
                                 " reduction")
    if q.L != q.J:
        raise SelectionRuleError("the reduction forces L = J")
    return QuantumNumbers(dim=5, n_r=q.n_r, lam=q.lam, n_theta=q.n_theta,
                          L=q.L, J=q.J, M=q.M, m=q.m, N=q.n_r + q.lam)


# ----------------------------------------------------- oscillator picture

def _cpow(base, expo):
    # principal power over complex arrays; 0^0 is taken as 1
    if expo == 0:
        return np.ones_like(np.asarray(base, dtype=complex))
    base = np.asarray(base, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(expo * np.log(base))
    out = np.where(base == 0, 0.0, out)
    if out.ndim == 0:
        return complex(out)
    return out


def oscillator_norm_2d(n_r, m, nu, D):
    """Quasiradial normalization constant in two dimensions."""
    m = abs(m)
    bracket = 1.0 - cmath.exp(2j * math.pi * nu)
    inner = (
        -nu * (nu + 2 * n_r + m + 1)
        * math.factorial(n_r + m)
        * _gamma_ratio(m + n_r + nu + 1, n_r + nu + 1)
        / (D ** 4 * bracket * (2 * n_r + m + 1) * math.factorial(n_r))
    )
    return 2.0 / math.factorial(m) * cmath.sqrt(inner)


def oscillator_norm_3d(n_r, ell, nu, D):
    bracket = 1.0 - cmath.exp(2j * math.pi * nu)
    inner = (
        (-1j * nu) * (nu + 2 * ell + 2 * n_r + 2)
        * math.factorial(2 * ell + n_r + 1)
        * _gamma_ratio(2 * ell + nu + n_r + 2, nu + n_r + 1)
        / (bracket * (ell + n_r + 1) * math.factorial(2 * ell + 1) ** 2
           * math.factorial(n_r))
    )
    return math.sqrt(math.pi) / D ** 3.5 * cmath.sqrt(inner)


def oscillator_norm_5d(n_r, lam, nu, D):
    bracket = 1.0 - cmath.exp(2j * math.pi * nu)
    inner = (
        1j * nu * (nu + 2 * lam + 2 * n_r + 4)
        * _gamma_ratio(2 * lam + nu + n_r + 4, nu + n_r + 1)
        * math.factorial(n_r + 2 * lam + 3)
        / (D ** 13 * math.pi ** 2 * bracket * (lam + n_r + 2)
           * math.factorial(n_r))
    )
    return 4.0 / math.factorial(2 * lam + 3) * cmath.sqrt(inner)


def polar_harmonic(J, L, lam, theta):
    """Orthonormal polar factor on [0, pi] under the sin^3 weight."""
    n_theta = lam - L - J
    if n_theta < 0:
        raise RangeError("lam must be at least L + J")
    norm = math.sqrt(
        (2 * lam + 3) * math.factorial(n_theta)
        * math.factorial(lam + L + J + 2)
        / (2.0 ** (2 * L + 2 * J + 3) * math.factorial(lam + L - J + 1)
           * math.factorial(lam + J - L + 1))
    )
    x = np.cos(theta)
    return (norm * (1.0 - x) ** L * (1.0 + x) ** J
            * jacobi_poly(n_theta, 2 * L + 1, 2 * J + 1, x))


def coupled_rotation(L, m, T, t, J, M, angles):
    """Product of two rotation blocks contracted with Clebsch-Gordan
    coefficients over the second indices."""
    total = 0.0
    for mp in range(-L, L + 1):
        tp = M - mp
        if abs(tp) > T:
            continue
        cg = clebsch_gordan(L, mp, T, tp, J, M)
        if cg == 0.0:
            continue
        total = total + cg * wigner_D(L, m, mp, angles.alpha, angles.beta,
                                      angles.gamma) * wigner_D(
            T, t, tp, angles.alphaH, angles.betaH, angles.gammaH)
    return total


def _oscillator_radial_theta(dim, q, nu, vartheta):
    sin2 = np.sin(vartheta) ** 2
    if dim == 2:
        m = abs(q.m)
        return (_cpow(np.sin(vartheta), m)
                * _cpow(np.cos(vartheta), nu + 0.5)
                * hyp2f1_terminating(q.n_r, q.n_r + nu + m + 1, m + 1, sin2))
    if dim == 3:
        ell = q.ell
        return (np.sin(vartheta) ** (2 * ell)
                * _cpow(np.cos(vartheta), nu + 0.5)
                * hyp2f1_terminating(q.n_r, q.n_r + 2 * ell + nu + 2,
                                     2 * ell + 2, sin2))
    lam = q.lam
    return (np.sin(vartheta) ** (2 * lam)
            * _cpow(np.cos(vartheta), nu + 0.5)
            * hyp2f1_terminating(q.n_r, q.n_r + nu + 2 * lam + 4,
                                 2 * lam + 4, sin2))


def _oscillator_angular(dim, q, angles):
    if dim == 2:
        return np.exp(0.5j * q.m * np.asarray(angles.phi)) / _SQRT_2PI
    if dim == 3:
        return (math.sqrt((2 * q.ell + 1) * _ANGULAR_NORM)
                * wigner_D(q.ell, q.m1, q.m2, angles.alpha, angles.beta,
                           angles.gamma))
    return (math.sqrt((2 * q.L + 1) * (2 * q.T + 1)) * _ANGULAR_NORM
            * polar_harmonic(q.J, q.L, q.lam, angles.theta)
            * coupled_rotation(q.L, q.m, q.T, q.t, q.J, q.M, angles))


def oscillator_wavefunction(dim, q, nu, angles, D):
    """Oscillator eigenfunction on the real slice vartheta in [0, pi/2]."""
    _require_dim(dim)
    if q.dim != dim:
        raise ParameterError("quantum numbers carry a different dimension")
    if dim == 2:
        const = oscillator_norm_2d(q.n_r, q.m, nu, D)
    elif dim == 3:
        const = oscillator_norm_3d(q.n_r, q.ell, nu, D)
    else:
        const = oscillator_norm_5d(q.n_r, q.lam, nu, D)
    radial = _oscillator_radial_theta(dim, q, nu, angles.vartheta)
    return const * radial * _oscillator_angular(dim, q, angles)


# -------------------------------------------------------- Coulomb picture

def _damped_gamma(z, sigma):
    # e^{sigma pi / 2} |Gamma(z)| in one exponential; the factors overflow
    # separately once sigma is large while the product stays moderate
    return math.exp(sigma * math.pi / 2.0 + complex_log_gamma(z).real)


def _coulomb_norm_2d(N, M, sigma, R):
    M = abs(M)
    return (
        2.0 ** M / (R * math.factorial(2 * M))
        * math.sqrt(((N + 0.5) ** 2 + sigma ** 2) * math.factorial(N + M)
                    / (math.pi * (N + 0.5) * math.factorial(N - M)))
        * _damped_gamma(M + 0.5 + 1j * sigma, sigma)
    )


def _coulomb_norm_3d(N, ell, sigma):
    return (
        2.0 ** (ell + 1) / math.factorial(2 * ell + 1)
        * math.sqrt((N * N + sigma ** 2) * math.factorial(N + ell)
                    / (2.0 * math.pi * N * math.factorial(N - ell - 1)))
        * _damped_gamma(1 + ell + 1j * sigma, sigma)
    )


def _coulomb_norm_5d(N, lam, sigma, R):
    return (
        2.0 ** (lam + 2) / math.factorial(2 * lam + 3)
        * math.sqrt(((N + 2) ** 2 + sigma ** 2) * math.factorial(N + lam + 3)
                    / (2.0 * R ** 5 * math.pi * (N + 2)
                       * math.factorial(N - lam)))
        * _damped_gamma(lam + 2 + 1j * sigma, sigma)
    )


def _check_params_level(dim, params, N):
    shift = _LEVEL_SHIFT[dim]
    expected = params.mu * params.R / (N + shift)
    if abs(params.sigma - expected) > 1e-9 * max(1.0, abs(expected)):
        raise ParameterError("duality parameters belong to a different"
                             " level")


def _coulomb_radial(power, n_r, sigma, chi):
    # common pattern: (sin chi)^power e^{-i chi (n_r - i sigma)}
    return (np.sin(chi) ** power
            * np.exp(-1j * np.asarray(chi) * (n_r - 1j * sigma)))


def coulomb_wavefunction(dim, q, params, angles):
    """Reduced bound-state eigenfunction on the real sphere."""
    _require_dim(dim)
    if q.dim != dim:
        raise ParameterError("quantum numbers carry a different dimension")
    if q.N is None:
        raise SelectionRuleError("labels must be reduced first")
    N = q.N
    _check_params_level(dim, params, N)
    sigma = params.sigma
    chi = np.asarray(angles.chi)
    z = 1.0 - np.exp(2j * chi)
    if dim == 2:
        M = abs(q.M)
        value = (
            _coulomb_norm_2d(N, M, sigma, params.R)
            * _coulomb_radial(M, N - M, sigma, chi)
            * hyp2f1_terminating(N - M, M + 1j * sigma + 0.5, 2 * M + 1, z)
            * np.exp(1j * q.M * np.asarray(angles.phi)) / _SQRT_2PI
        )
    elif dim == 3:
        ell = q.ell
        sign = -1.0 if q.m1 % 2 else 1.0
        value = (
            sign / math.sqrt(params.R ** 3)
            * _coulomb_norm_3d(N, ell, sigma)
            * _coulomb_radial(ell, N - ell - 1, sigma, chi)
            * hyp2f1_terminating(N - ell - 1, 1 + ell + 1j * sigma,
                                 2 * ell + 2, z)
            * sph_harm(ell, q.m1, angles.beta, angles.alpha)
        )
    else:
        lam = q.lam
        value = (
            _coulomb_norm_5d(N, lam, sigma, params.R)
            * _coulomb_radial(lam, N - lam, sigma, chi)
            * hyp2f1_terminating(N - lam, lam + 2 + 1j * sigma,
                                 2 * lam + 4, z)
            * polar_harmonic(q.L, q.L, lam, angles.theta)
            * math.sqrt((2 * q.L + 1) * _ANGULAR_NORM)
            * wigner_D(q.L, q.m, q.M, angles.alpha, angles.beta,
                       angles.gamma)
        )
    if np.ndim(value) == 0:
        return complex(value)
    return value


def flat_limit_wavefunction(dim, q, mu, r, angularpart):
    """Contraction limit of the bound states; only dims 2 and 5 are kept."""
    if dim not in (2, 5):
        raise RangeError("the contraction limit is provided for dims 2"
                         " and 5")
    if q.dim != dim:
        raise ParameterError("quantum numbers carry a different dimension")
    if q.N is None:
        raise SelectionRuleError("labels must be reduced first")
    N = q.N
    r = np.asarray(r, dtype=float)
    if dim == 2:
        M = abs(q.M)
        s = N + 0.5
        radial = (
            mu * math.sqrt(2.0) / s ** 1.5
            * math.sqrt(math.factorial(N + M) / math.factorial(N - M))
            * (2.0 * mu * r / s) ** M
            * np.exp(-mu * r / s) / math.factorial(2 * M)
            * hyp1f1_terminating(N - M, 2 * M + 1, 2.0 * mu * r / s)
        )
        return (radial * np.exp(1j * q.M * np.asarray(angularpart.phi))
                / _SQRT_2PI)
    lam = q.lam
    s = N + 2.0
    radial = (
        4.0 * mu ** 2.5 / s ** 3
        * math.sqrt(math.factorial(N + lam + 3) / math.factorial(N - lam))
        * (2.0 * mu * r / s) ** lam
        * np.exp(-mu * r / s) / math.factorial(2 * lam + 3)
        * hyp1f1_terminating(N - lam, 2 * lam + 4, 2.0 * mu * r / s)
    )
    return (radial * polar_harmonic(q.L, q.L, lam, angularpart.theta)
            * math.sqrt((2 * q.L + 1) * _ANGULAR_NORM)
            * wigner_D(q.L, q.m, q.M, angularpart.alpha, angularpart.beta,
                       angularpart.gamma))


# ------------------------------------------------------- chart functions

def _oscillator_radial_chi(dim, q, nu, chi):
    # same states written against chi, with sin^2 vartheta = 1 - e^{2i chi}
    chi = np.asarray(chi)
    z = 1.0 - np.exp(2j * chi)
    phase = np.exp(1j * chi * (nu + 0.5))
    if dim == 2:
        m = abs(q.m)
        return (_cpow(z, 0.5 * m) * phase
                * hyp2f1_terminating(q.n_r, q.n_r + nu + m + 1, m + 1, z))
    if dim == 3:
        ell = q.ell
        return (z ** ell * phase
                * hyp2f1_terminating(q.n_r, q.n_r + 2 * ell + nu + 2,
                                     2 * ell + 2, z))
    lam = q.lam
    return (z ** lam * phase
            * hyp2f1_terminating(q.n_r, q.n_r + nu + 2 * lam + 4,
                                 2 * lam + 4, z))


def _oscillator_axes(dim, q):
    axes = ["chi"]
    if dim == 2:
        if q.m != 0:
            axes.append("phi")
    elif dim == 3:
        if q.ell > 0:
            axes.append("beta")
        if q.m1 != 0:
            axes.append("alpha")
        if q.m2 != 0:
            axes.append("gamma")
    else:
        if q.lam > 0:
            axes.append("theta")
        if q.L > 0:
            axes.append("beta")
        if q.m != 0:
            axes.append("alpha")
        # the contraction sum runs over the second indices, so gamma drops
        # out only when every term carries a zero phase there
        if (q.L > 0 and q.T > 0) or q.M != 0:
            axes.append("gamma")
        if q.T > 0:
            axes.append("betaH")
            if (q.L > 0) or q.M != 0:
                axes.append("gammaH")
        if q.t != 0:
            axes.append("alphaH")
    return tuple(axes)


def oscillator_chart_function(dim, q, nu, D):
    """Chart evaluator of an oscillator state for weighted quadrature.

    The attached diamond partner keeps the radial factor unchanged (it is a
    series in e^{i chi} with the same indices) and conjugates only the pure
    phase angular factors, which realizes psi*(-chi) for these states.
    """
    _require_dim(dim)
    if q.dim != dim:
        raise ParameterError("quantum numbers carry a different dimension")
    if dim == 2:
        const = oscillator_norm_2d(q.n_r, q.m, nu, D)
    elif dim == 3:
        const = oscillator_norm_3d(q.n_r, q.ell, nu, D)
    else:
        const = oscillator_norm_5d(q.n_r, q.lam, nu, D)

    def evaluator(angles):
        return (const * _oscillator_radial_chi(dim, q, nu, angles.chi)
                * _oscillator_angular(dim, q, angles))

    def diamond(angles):
        return (const * _oscillator_radial_chi(dim, q, nu, angles.chi)
                * np.conj(_oscillator_angular(dim, q, angles)))

    return ChartFunction(evaluator=evaluator, diamond=diamond,
                         depends_on=_oscillator_axes(dim, q))


def _coulomb_axes(dim, q):
    axes = ["chi"]
    if dim == 2:
        if q.M != 0:
            axes.append("phi")
    elif dim == 3:
        if q.ell > 0:
            axes.append("beta")
        if q.m1 != 0:
            axes.append("alpha")
    else:
        if q.lam > 0:
            axes.append("theta")
        if q.L > 0:
            axes.append("beta")
        if q.m != 0:
            axes.append("alpha")
        if q.M != 0:
            axes.append("gamma")
    return tuple(axes)


def coulomb_chart_function(dim, q, params):
    """Chart evaluator of a reduced bound state on the real sphere."""
    chart = {2: "S2_s", 3: "S3_s", 5: "S5_s"}[dim]

    def evaluator(angles):
        return coulomb_wavefunction(dim, q, params, angles)

    return ChartFunction(evaluator=evaluator, chart=chart,
                         depends_on=_coulomb_axes(dim, q))
