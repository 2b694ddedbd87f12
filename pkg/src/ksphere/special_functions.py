"""Special functions for curved-space duality calculations.

Terminating hypergeometric sums, orthogonal polynomials with complex
parameters, Wigner rotation functions with half-integer support, and a
complex log-gamma. Everything here is hand-rolled so that downstream
normalization constants and angular kernels do not depend on library
conventions.
"""

import cmath
import math

import numpy as np

from ._errors import ParameterError, PoleError

__all__ = [
    "complex_log_gamma",
    "hyp2f1_terminating",
    "hyp1f1_terminating",
    "jacobi_poly",
    "gegenbauer",
    "wigner_d",
    "wigner_D",
    "clebsch_gordan",
    "sph_harm",
]

# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def complex_log_gamma(z):
    """Principal log-gamma for complex argument.

    Uses the Lanczos series in the right half-plane and the reflection
    formula for Re z < 0.5. Raises PoleError at non-positive integers.
    """
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise PoleError(f"log-gamma pole at z = {z.real:g}")
    if z.real < 0.5:
        # Reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z).
        return (
            math.log(math.pi)
            - cmath.log(cmath.sin(cmath.pi * z))
            - complex_log_gamma(1.0 - z)
        )
    zm = z - 1.0
    series = _LANCZOS_COEFFS[0]
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series += coeff / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (zm + 0.5) * cmath.log(t) - t + cmath.log(series)


def hyp2f1_terminating(n, b, c, z):
    """Terminating Gauss series 2F1(-n, b; c; z) summed over n + 1 terms.

    b, c may be complex; z may be a scalar or an array. Raises
    ParameterError when a denominator parameter c + k vanishes before the
    series terminates.
    """
    if n != int(n) or n < 0:
        raise ParameterError(f"series index must be a non-negative integer, got {n}")
    n = int(n)
    b = complex(b)
    c = complex(c)
    z = np.asarray(z, dtype=complex)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(n):
        if c + k == 0:
            raise ParameterError(f"vanishing denominator parameter c + {k} = 0")
        term = term * (((-n + k) * (b + k)) / ((k + 1) * (c + k))) * z
        total = total + term
    if total.ndim == 0:
        return complex(total)
    return total


def hyp1f1_terminating(n, c, z):
    """Terminating Kummer series 1F1(-n; c; z) summed over n + 1 terms."""
    if n != int(n) or n < 0:
        raise ParameterError(f"series index must be a non-negative integer, got {n}")
    n = int(n)
    c = complex(c)
    z = np.asarray(z, dtype=complex)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(n):
        if c + k == 0:
            raise ParameterError(f"vanishing denominator parameter c + {k} = 0")
        term = term * ((-n + k) / ((k + 1) * (c + k))) * z
        total = total + term
    if total.ndim == 0:
        return complex(total)
    return total


def jacobi_poly(n, alpha, beta, x):
    """Jacobi polynomial P_n^(alpha, beta)(x).

    Real parameter pairs use the three-term recurrence. Complex parameters
    (or real pairs where the recurrence denominators degenerate) go through
    the terminating 2F1 representation.
    """
    if n != int(n) or n < 0:
        raise ParameterError(f"degree must be a non-negative integer, got {n}")
    n = int(n)
    real_params = (
        not isinstance(alpha, complex) or alpha.imag == 0.0
    ) and (not isinstance(beta, complex) or beta.imag == 0.0)
    if real_params:
        a = float(alpha if not isinstance(alpha, complex) else alpha.real)
        b = float(beta if not isinstance(beta, complex) else beta.real)
        ab = a + b
        degenerate = ab == int(ab) and ab <= -2.0
        if not degenerate:
            return _jacobi_recurrence(n, a, b, x)
    # 2F1 route: P_n = ((alpha+1)_n / n!) 2F1(-n, n+alpha+beta+1; alpha+1; (1-x)/2)
    alpha = complex(alpha)
    beta = complex(beta)
    pref = 1.0 + 0.0j
    for j in range(n):
        pref *= (alpha + 1.0 + j) / (j + 1.0)
    xa = np.asarray(x, dtype=complex)
    value = pref * hyp2f1_terminating(n, n + alpha + beta + 1.0, alpha + 1.0, (1.0 - xa) / 2.0)
    return value


def _jacobi_recurrence(n, a, b, x):
    x = np.asarray(x)
    p_prev = np.ones_like(x, dtype=x.dtype if x.dtype.kind == "c" else float)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p_curr = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
    for k in range(2, n + 1):
        c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0)
        c2 = (2.0 * k + a + b - 1.0) * (a * a - b * b)
        c3 = (2.0 * k + a + b - 1.0) * (2.0 * k + a + b) * (2.0 * k + a + b - 2.0)
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b)
        p_next = ((c2 + c3 * x) * p_curr - c4 * p_prev) / c1
        p_prev, p_curr = p_curr, p_next
    if np.ndim(p_curr) == 0:
        return p_curr.item()
    return p_curr


def gegenbauer(n, lam, x):
    """Gegenbauer polynomial C_n^lambda(x) by the standard recurrence."""
    if n != int(n) or n < 0:
        raise ParameterError(f"degree must be a non-negative integer, got {n}")
    n = int(n)
    x = np.asarray(x)
    c_prev = np.ones_like(x, dtype=complex if (np.iscomplexobj(x) or isinstance(lam, complex)) else float)
    if n == 0:
        return c_prev.item() if c_prev.ndim == 0 else c_prev
    c_curr = 2.0 * lam * x * c_prev
    for k in range(2, n + 1):
        c_next = (2.0 * (k + lam - 1.0) * x * c_curr - (k + 2.0 * lam - 2.0) * c_prev) / k
        c_prev, c_curr = c_curr, c_next
    if np.ndim(c_curr) == 0:
        return c_curr.item()
    return c_curr


def _twice(value, name):
    doubled = 2.0 * value
    rounded = round(doubled)
    if abs(doubled - rounded) > 1e-9:
        raise ParameterError(f"{name} must be integer or half-integer, got {value}")
    return int(rounded)


def wigner_d(l, m1, m2, beta):
    """Small Wigner rotation matrix element d^l_{m1 m2}(beta).

    Supports integer and half-integer indices. beta may be a scalar or an
    array.
    """
    ll = _twice(l, "l")
    mm1 = _twice(m1, "m1")
    mm2 = _twice(m2, "m2")
    if ll < 0:
        raise ParameterError(f"l must be non-negative, got {l}")
    if abs(mm1) > ll or abs(mm2) > ll:
        raise ParameterError(f"|m| must not exceed l, got l={l}, m1={m1}, m2={m2}")
    if (ll - mm1) % 2 != 0 or (ll - mm2) % 2 != 0:
        raise ParameterError(f"l - m must be an integer, got l={l}, m1={m1}, m2={m2}")
    p1 = (ll + mm1) // 2
    q1 = (ll - mm1) // 2
    p2 = (ll + mm2) // 2
    q2 = (ll - mm2) // 2
    mu = (mm1 - mm2) // 2
    pref = math.sqrt(
        math.factorial(p1) * math.factorial(q1) * math.factorial(p2) * math.factorial(q2)
    )
    beta_arr = np.asarray(beta, dtype=float)
    cos_h = np.cos(beta_arr / 2.0)
    sin_h = np.sin(beta_arr / 2.0)
    total = np.zeros_like(beta_arr)
    k_min = max(0, -mu)
    k_max = min(p2, q1)
    for k in range(k_min, k_max + 1):
        denom = (
            math.factorial(p2 - k)
            * math.factorial(k)
            * math.factorial(mu + k)
            * math.factorial(q1 - k)
        )
        sign = -1.0 if (mu + k) % 2 else 1.0
        total = total + (sign / denom) * cos_h ** (ll - 2 * k - mu) * sin_h ** (2 * k + mu)
    result = pref * total
    if result.ndim == 0:
        return float(result)
    return result


def wigner_D(l, m1, m2, alpha, beta, gamma):
    """Rotation function D^l_{m1 m2} = e^{i m1 alpha} d^l_{m1 m2}(beta) e^{i m2 gamma}.

    Note the positive phase convention on both Euler angles.
    """
    alpha_arr = np.asarray(alpha, dtype=float)
    gamma_arr = np.asarray(gamma, dtype=float)
    value = (
        np.exp(1j * m1 * alpha_arr)
        * wigner_d(l, m1, m2, beta)
        * np.exp(1j * m2 * gamma_arr)
    )
    if np.ndim(value) == 0:
        return complex(value)
    return value


def clebsch_gordan(j1, m1, j2, m2, J, M):
    """Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M> by Racah's sum.

    Returns 0.0 for any coupling that violates the selection rules.
    """
    jj1 = _twice(j1, "j1")
    jj2 = _twice(j2, "j2")
    JJ = _twice(J, "J")
    mm1 = _twice(m1, "m1")
    mm2 = _twice(m2, "m2")
    MM = _twice(M, "M")
    if mm1 + mm2 != MM:
        return 0.0
    if jj1 < 0 or jj2 < 0 or JJ < 0:
        return 0.0
    if abs(mm1) > jj1 or abs(mm2) > jj2 or abs(MM) > JJ:
        return 0.0
    if (jj1 - mm1) % 2 or (jj2 - mm2) % 2 or (JJ - MM) % 2:
        return 0.0
    if JJ < abs(jj1 - jj2) or JJ > jj1 + jj2:
        return 0.0
    if (jj1 + jj2 + JJ) % 2:
        return 0.0

    def fact2(doubled):
        # doubled is an even doubled-integer; factorial of doubled / 2
        return math.factorial(doubled // 2)

    pref = math.sqrt(
        (JJ + 1.0)
        * fact2(jj1 + jj2 - JJ)
        * fact2(jj1 - jj2 + JJ)
        * fact2(-jj1 + jj2 + JJ)
        / fact2(jj1 + jj2 + JJ + 2)
    )
    pref *= math.sqrt(
        fact2(JJ + MM)
        * fact2(JJ - MM)
        * fact2(jj1 + mm1)
        * fact2(jj1 - mm1)
        * fact2(jj2 + mm2)
        * fact2(jj2 - mm2)
    )
    k_min = max(0, (jj2 - JJ - mm1) // 2, (jj1 + mm2 - JJ) // 2)
    k_max = min((jj1 + jj2 - JJ) // 2, (jj1 - mm1) // 2, (jj2 + mm2) // 2)
    total = 0.0
    for k in range(k_min, k_max + 1):
        denom = (
            math.factorial(k)
            * fact2(jj1 + jj2 - JJ - 2 * k)
            * fact2(jj1 - mm1 - 2 * k)
            * fact2(jj2 + mm2 - 2 * k)
            * fact2(JJ - jj2 + mm1 + 2 * k)
            * fact2(JJ - jj1 - mm2 + 2 * k)
        )
        total += (-1.0) ** k / denom
    return pref * total


def sph_harm(l, m, beta, alpha):
    """Spherical harmonic in the convention matched to wigner_D.

    Defined so that D^l_{m,0}(alpha, beta, 0) equals
    (-1)^m sqrt(4 pi / (2l + 1)) Y_lm(beta, alpha). Differs from the
    Condon-Shortley convention by the factor (-1)^m.
    """
    if l != int(l) or m != int(m):
        raise ParameterError(f"sph_harm requires integer l, m, got l={l}, m={m}")
    l = int(l)
    m = int(m)
    sign = -1.0 if m % 2 else 1.0
    alpha_arr = np.asarray(alpha, dtype=float)
    value = (
        sign
        * math.sqrt((2 * l + 1) / (4.0 * math.pi))
        * np.exp(1j * m * alpha_arr)
        * wigner_d(l, m, 0, beta)
    )
    if np.ndim(value) == 0:
        return complex(value)
    return value
