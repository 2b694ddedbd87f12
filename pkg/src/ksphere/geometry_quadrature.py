"""Quadrature rules, chart Laplacians, volume relations, and contour checks.

The finite-difference operator applications deliberately discretize the u-side
and s-side forms differently (conservative staggered versus expanded canonical
stencils) so that the pointwise operator relations are compared through two
independent truncation errors.
"""

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ._errors import (
    DomainError,
    KindError,
    NonDecayingIntegrandError,
    PoleError,
    QuadratureOrderError,
    RangeError,
)
from .duality_maps import AngleChart
from .special_functions import hyp2f1_terminating

_MIN_QUAD_ORDER = 8
_DEFAULT_QUAD_ORDER = 128
_MAX_QUAD_ORDER = 1024
_DOUBLING_TOL = 1e-10


# ------------------------------------------------------------ qu adrature

@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    def integrate(self, f):
        return np.sum(self.weights * f(self.nodes))


def _legendre_and_derivative(n, x):
    p0 = np.ones_like(x)
    p1 = x.copy()
    if n == 0:
        return p0, np.zeros_like(x)
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(npoints, a=-1.0, b=1.0):
    """Nodes and weights by Newton iteration on the Legendre recurrence."""
    if npoints < 1:
        raise RangeError("quadrature needs at least one node")
    if npoints == 1:
        x = np.array([0.0])
        w = np.array([2.0])
    else:
        k = np.arange(npoints)
        x = np.cos(math.pi * (4.0 * k + 3.0) / (4.0 * npoints + 2.0))
        for _ in range(100):
            p, dp = _legendre_and_derivative(npoints, x)
            dx = p / dp
            x = x - dx
            if np.max(np.abs(dx)) < 1e-15:
                break
        _, dp = _legendre_and_derivative(npoints, x)
        w = 2.0 / ((1.0 - x * x) * dp * dp)
        idx = np.argsort(x)
        x = x[idx]
        w = w[idx]
    half = 0.5 * (b - a)
    return QuadratureRule(half * x + 0.5 * (a + b), half * w, (a, b))


# --------------------------------------------------------- chart functions

@dataclass
class ChartFunction:
    """Evaluator over an angle chart plus its diamond-conjugate partner.

    The default diamond is psi*(-chi, ...): complex conjugation combined with
    inversion of the chi coordinate.  depends_on lists the angle fields the
    evaluator actually reads, which lets tensor quadrature skip dead axes.
    """

    evaluator: object
    chart: str = ""
    diamond: object = None
    depends_on: tuple = ()

    def __call__(self, angles):
        return self.evaluator(angles)

    def diamond_value(self, angles):
        if self.diamond is not None:
            return self.diamond(angles)
        flipped = dataclasses.replace(angles, chi=-angles.chi)
        return np.conj(self.evaluator(flipped))


def as_chart_function(f, chart=""):
    if isinstance(f, ChartFunction):
        return f
    return ChartFunction(evaluator=f, chart=chart)


# ----------------------------------------------------- finite differences

def _shifted(angles, name, delta):
    return dataclasses.replace(angles, **{name: getattr(angles, name) + delta})


def _eval_shift(f, at, steps):
    # steps: dict name -> offset
    point = at
    for name, delta in steps.items():
        point = _shifted(point, name, delta)
    return f(point)


def _d1(f, at, name, h, order):
    if order == 2:
        return (_eval_shift(f, at, {name: h}) - _eval_shift(f, at, {name: -h})) / (2.0 * h)
    return (
        -_eval_shift(f, at, {name: 2 * h})
        + 8.0 * _eval_shift(f, at, {name: h})
        - 8.0 * _eval_shift(f, at, {name: -h})
        + _eval_shift(f, at, {name: -2 * h})
    ) / (12.0 * h)


def _d2(f, at, name, h, order):
    if order == 2:
        return (
            _eval_shift(f, at, {name: h})
            - 2.0 * f(at)
            + _eval_shift(f, at, {name: -h})
        ) / (h * h)
    return (
        -_eval_shift(f, at, {name: 2 * h})
        + 16.0 * _eval_shift(f, at, {name: h})
        - 30.0 * f(at)
        + 16.0 * _eval_shift(f, at, {name: -h})
        - _eval_shift(f, at, {name: -2 * h})
    ) / (12.0 * h * h)


def _cross(f, at, name1, name2, h, order):
    if order == 2:
        return (
            _eval_shift(f, at, {name1: h, name2: h})
            - _eval_shift(f, at, {name1: h, name2: -h})
            - _eval_shift(f, at, {name1: -h, name2: h})
            + _eval_shift(f, at, {name1: -h, name2: -h})
        ) / (4.0 * h * h)
    # fourth order: compose two fourth-order first derivatives
    coeffs = {2 * h: -1.0 / (12.0 * h), h: 8.0 / (12.0 * h),
              -h: -8.0 / (12.0 * h), -2 * h: 1.0 / (12.0 * h)}
    total = 0.0
    for d1, c1 in coeffs.items():
        for d2c, c2 in coeffs.items():
            total += c1 * c2 * _eval_shift(f, at, {name1: d1, name2: d2c})
    return total


def _conservative(f, at, name, h, weight, order):
    # compact staggered form of (1/1) d/dx ( w(x) df/dx )
    def stage(step):
        x0 = getattr(at, name)
        up = weight(x0 + 0.5 * step) * (
            _eval_shift(f, at, {name: step}) - f(at)
        )
        dn = weight(x0 - 0.5 * step) * (
            f(at) - _eval_shift(f, at, {name: -step})
        )
        return (up - dn) / (step * step)

    if order == 2:
        return stage(h)
    return (16.0 * stage(0.5 * h) - stage(h)) / 15.0


# --------------------------------------------- first-order Euler operators

def _body_ladder_terms(sign, names):
    """Body-fixed ladder J'_{+/-} on one Euler triple (alpha, beta, gamma).

    J'_+ = e^{+i gamma} [ -d_beta + i ( -cot(beta) d_gamma + d_alpha/sin(beta) ) ]
    J'_- = e^{-i gamma} [ +d_beta + i ( -cot(beta) d_gamma + d_alpha/sin(beta) ) ]
    """
    alpha_n, beta_n, gamma_n = names

    def phase(at):
        return cmath.exp(sign * 1j * getattr(at, gamma_n))

    def terms(at):
        beta = getattr(at, beta_n)
        return (
            (-sign * 1.0, beta_n),
            (-1j / math.tan(beta), gamma_n),
            (1j / math.sin(beta), alpha_n),
        )

    return phase, terms


def _ladder_pair_apply(f, at, h, order, names_left, names_right, sign_left):
    # J'_{sign}(left block) followed by J'_{-sign}(right block)
    phase_l, terms_l = _body_ladder_terms(sign_left, names_left)
    phase_r, terms_r = _body_ladder_terms(-sign_left, names_right)
    total = 0.0
    for coef_l, name_l in terms_l(at):
        for coef_r, name_r in terms_r(at):
            total += coef_l * coef_r * _cross(f, at, name_l, name_r, h, order)
    return phase_l(at) * phase_r(at) * total


def _l_dot_t(f, at, h, order):
    """L.T built from body-fixed generators of the two Euler blocks."""
    val = -_cross(f, at, "gamma", "gammaH", h, order)  # L'_3 T'_3
    val += 0.5 * _ladder_pair_apply(
        f, at, h, order, ("alpha", "beta", "gamma"), ("alphaH", "betaH", "gammaH"), +1
    )
    val += 0.5 * _ladder_pair_apply(
        f, at, h, order, ("alpha", "beta", "gamma"), ("alphaH", "betaH", "gammaH"), -1
    )
    return val


def _euler_block_raw(f, at, h, order, names):
    # d_beta^2 + cot(beta) d_beta
    #   + (d_gamma^2 - 2 cos(beta) d_gamma d_alpha + d_alpha^2)/sin^2(beta)
    alpha_n, beta_n, gamma_n = names
    beta = getattr(at, beta_n)
    val = _d2(f, at, beta_n, h, order)
    val += (math.cos(beta) / math.sin(beta)) * _d1(f, at, beta_n, h, order)
    angular = (
        _d2(f, at, gamma_n, h, order)
        - 2.0 * math.cos(beta) * _cross(f, at, gamma_n, alpha_n, h, order)
        + _d2(f, at, alpha_n, h, order)
    )
    return val + angular / (math.sin(beta) ** 2)


def _casimir(f, at, h, order, names):
    # quantum convention: eigenvalue l(l+1) on Wigner functions
    return -_euler_block_raw(f, at, h, order, names)


_L_NAMES = ("alpha", "beta", "gamma")
_T_NAMES = ("alphaH", "betaH", "gammaH")


# ------------------------------------------------------ chart Laplacians

def _require_interior(at, h, names_polar):
    reach = 2.5 * h
    for name in names_polar:
        value = getattr(at, name)
        if isinstance(value, complex):
            continue
        if not (reach < value < math.pi - reach):
            raise DomainError(
                "%s=%g leaves no room for the stencil" % (name, value)
            )


def _op_s2_s(f, at, h, order, radius):
    chi = at.chi
    val = _d2(f, at, "chi", h, order)
    val += (math.cos(chi) / math.sin(chi)) * _d1(f, at, "chi", h, order)
    val += _d2(f, at, "phi", h, order) / (math.sin(chi) ** 2)
    return val / (radius * radius)


def _op_s2c_u(f, at, h, order, D):
    chi = at.chi
    val = _conservative(f, at, "chi", h, math.sin, order) / math.sin(chi)
    val += _d2(f, at, "phi", h, order) / (math.sin(chi) ** 2)
    return (2j / (D * D)) * math.sin(chi) * cmath.exp(-1j * chi) * val


def _op_s3_s(f, at, h, order, radius):
    chi = at.chi
    beta = at.beta
    val = _d2(f, at, "chi", h, order)
    val += 2.0 * (math.cos(chi) / math.sin(chi)) * _d1(f, at, "chi", h, order)
    ang = _d2(f, at, "beta", h, order)
    ang += (math.cos(beta) / math.sin(beta)) * _d1(f, at, "beta", h, order)
    ang += _d2(f, at, "alpha", h, order) / (math.sin(beta) ** 2)
    return (val + ang / (math.sin(chi) ** 2)) / (radius * radius)


def _op_s4c_u(f, at, h, order, D):
    chi = at.chi

    def weight(x):
        return cmath.exp(1j * x) * math.sin(x) ** 2

    val = cmath.exp(-1j * chi) * _conservative(f, at, "chi", h, weight, order)
    val /= math.sin(chi) ** 2
    val += _euler_block_raw(f, at, h, order, _L_NAMES) / (math.sin(chi) ** 2)
    return (2j / (D * D)) * math.sin(chi) * cmath.exp(-1j * chi) * val


def _op_s5_s(f, at, h, order, radius):
    chi = at.chi
    theta = at.theta
    val = _d2(f, at, "chi", h, order)
    val += 4.0 * (math.cos(chi) / math.sin(chi)) * _d1(f, at, "chi", h, order)
    ang = _d2(f, at, "theta", h, order)
    ang += 3.0 * (math.cos(theta) / math.sin(theta)) * _d1(f, at, "theta", h, order)
    ang -= 4.0 * _casimir(f, at, h, order, _L_NAMES) / (math.sin(theta) ** 2)
    return (val + ang / (math.sin(chi) ** 2)) / (radius * radius)


def _angular_m2(f, at, h, order):
    # (1/sin^3) d sin^3 d - L^2/sin^2(theta/2) - J^2/cos^2(theta/2), with
    # J^2 = L^2 + T^2 + 2 L.T acting through the coupled gamma-side indices
    theta = at.theta

    def weight(x):
        return math.sin(x) ** 3

    val = _conservative(f, at, "theta", h, weight, order) / math.sin(theta) ** 3
    l2 = _casimir(f, at, h, order, _L_NAMES)
    t2 = _casimir(f, at, h, order, _T_NAMES)
    j2 = l2 + t2 + 2.0 * _l_dot_t(f, at, h, order)
    val -= l2 / (math.sin(0.5 * theta) ** 2)
    val -= j2 / (math.cos(0.5 * theta) ** 2)
    return val


def _op_s8c_u(f, at, h, order, D):
    chi = at.chi

    def weight(x):
        return cmath.exp(3j * x) * math.sin(x) ** 4

    val = cmath.exp(-3j * chi) * _conservative(f, at, "chi", h, weight, order)
    val /= math.sin(chi) ** 4
    val += _angular_m2(f, at, h, order) / (math.sin(chi) ** 2)
    return (2j / (D * D)) * math.sin(chi) * cmath.exp(-1j * chi) * val


_CHART_OPS = {
    "S2_s": (_op_s2_s, ("chi",)),
    "S2C_u": (_op_s2c_u, ("chi",)),
    "S3_s": (_op_s3_s, ("chi", "beta")),
    "S4C_u": (_op_s4c_u, ("chi", "beta")),
    "S5_s": (_op_s5_s, ("chi", "theta", "beta")),
    "S8C_u": (_op_s8c_u, ("chi", "theta", "beta", "betaH")),
}


def laplace_beltrami_apply(chart, f, at, h=1e-3, order=2, radius=1.0):
    """Finite-difference application of a chart's Laplace-Beltrami operator.

    chart is one of S2_s, S2C_u, S3_s, S4C_u, S5_s, S8C_u, or the angular
    tags L2 / M2 for the Euler-block Casimir and the five-dimensional polar
    operator.  radius is R for s-charts and D for u-charts.
    """
    if order not in (2, 4):
        raise RangeError("finite-difference order must be 2 or 4")
    func = as_chart_function(f)
    if chart == "L2":
        _require_interior(at, h, ("beta",))
        return _casimir(func, at, h, order, _L_NAMES)
    if chart == "M2":
        _require_interior(at, h, ("theta", "beta", "betaH"))
        return -_angular_m2(func, at, h, order)
    if chart not in _CHART_OPS:
        raise KindError("unknown chart %r" % (chart,))
    op, polar = _CHART_OPS[chart]
    _require_interior(at, h, polar)
    return op(func, at, h, order, radius)


# ------------------------------------------------------ operator relations

def _expm1_2ichi(chi):
    # sum_{i<last} u_i^2 / u_last^2 on the chart equals e^{-2i chi} - 1
    return cmath.exp(-2j * chi) - 1.0


def laplacian_relation_residual(pair, f, at, h=1e-3, order=2):
    """|LHS - RHS| of the printed relation between the u and s Laplacians.

    Both sides are discretized independently (canonical expanded stencils on
    the s-side, conservative staggered stencils on the u-side), so the
    residual measures genuine agreement at the scheme's order, not a shared
    truncation artifact.  D-homogeneity lets the check run at D = 1.
    """
    func = as_chart_function(f)
    chi = at.chi
    ratio = _expm1_2ichi(chi)
    if pair == "LB22":
        lhs = laplace_beltrami_apply("S2_s", func, at, h, order, radius=1.0)
        rhs = -(1.0 / ratio) * laplace_beltrami_apply("S2C_u", func, at, h, order)
        return abs(lhs - rhs)
    if pair == "LAP3":
        lhs = laplace_beltrami_apply("S3_s", func, at, h, order, radius=1.0)
        inner = ChartFunction(
            evaluator=lambda a: cmath.exp(-0.5j * a.chi) * func(a)
        )
        bracket = laplace_beltrami_apply("S4C_u", inner, at, h, order)
        bracket -= (2.0 + 0.75 * ratio) * inner(at)
        rhs = -cmath.exp(0.5j * chi) * (1.0 / ratio) * bracket
        return abs(lhs - rhs)
    if pair == "LAP5":
        lhs = laplace_beltrami_apply("S5_s", func, at, h, order, radius=1.0)
        inner = ChartFunction(
            evaluator=lambda a: cmath.exp(-1.5j * a.chi) * func(a)
        )
        bracket = laplace_beltrami_apply("S8C_u", inner, at, h, order)
        bracket -= (12.0 + 3.75 * ratio) * inner(at)
        rhs = -cmath.exp(1.5j * chi) * (1.0 / ratio) * bracket
        return abs(lhs - rhs)
    raise KindError("unknown relation pair %r" % (pair,))


# ---------------------------------------------------------- volume weights

_VOL_PAIRS = ("VOL2", "VOL3", "VOL5")


def volume_weight(pair, angles, D=1.0):
    """The factor multiplying dv(u) in the printed volume-element relation."""
    chi = angles.chi
    if pair == "VOL2":
        # (1/R) dv(s) = -((u1^2+u2^2)/u3^2) dv(u)
        return -(cmath.exp(-2j * chi) - 1.0)
    if pair == "VOL3":
        divisor = D * cmath.exp(3j * chi)
        if abs(divisor) < 1e-14:
            raise PoleError("u5^3 vanishes")
        return (1.0 - cmath.exp(2j * chi)) / divisor
    if pair == "VOL5":
        divisor = D ** 3 * cmath.exp(5j * chi)
        if abs(divisor) < 1e-14:
            raise PoleError("u9^5 vanishes")
        return (1.0 - cmath.exp(2j * chi)) / divisor
    raise KindError("unknown volume pair %r" % (pair,))


def volume_relation_sides(pair, angles, D=1.0):
    """Pointwise (lhs, rhs) densities of the volume-element relation."""
    chi = angles.chi
    R = D * D
    if pair == "VOL2":
        lhs = (1.0 / R) * R * R * cmath.sin(chi)
        dv_u = -(0.5j * D * D) * cmath.exp(1j * chi)
        return lhs, volume_weight(pair, angles, D) * dv_u
    if pair == "VOL3":
        beta = angles.beta
        lhs = (0.5j / D ** 3) * R ** 3 * cmath.sin(chi) ** 2 * math.sin(beta)
        dv_u = -(D ** 4 / 4.0) * cmath.exp(2j * chi) * cmath.sin(chi) * math.sin(beta)
        return lhs, volume_weight(pair, angles, D) * dv_u
    if pair == "VOL5":
        theta = angles.theta
        lhs = (16j / D ** 5) * R ** 5 * cmath.sin(chi) ** 4 * math.sin(theta) ** 3
        dv_u = -8.0 * D ** 8 * cmath.exp(4j * chi) * cmath.sin(chi) ** 3 * math.sin(theta) ** 3
        return lhs, volume_weight(pair, angles, D) * dv_u
    raise KindError("unknown volume pair %r" % (pair,))


def sphere_volume_from_uside(pair, D=1.0, npoints=128):
    """Sphere volume recovered by quadrature of the u-side relation density."""
    rule = gauss_legendre(npoints, 0.0, math.pi)
    chi = rule.nodes
    w = rule.weights
    if pair == "VOL2":
        # -(D^2/2) * integral of (u1^2+u2^2)/u3^2 dv(u), phi over [0, 4 pi)
        vals = (np.exp(-2j * chi) - 1.0) * (-0.5j * D * D) * np.exp(1j * chi)
        return complex(-(D * D / 2.0) * np.sum(w * vals) * 4.0 * math.pi)
    if pair == "VOL3":
        vals = volume_weight_vec("VOL3", chi, D) * (
            -(D ** 4 / 4.0) * np.exp(2j * chi) * np.sin(chi)
        )
        # beta integral of sin(beta) = 2; alpha over 2 pi; gamma over 4 pi
        total = np.sum(w * vals) * 2.0 * (2.0 * math.pi) * (4.0 * math.pi)
        return complex(-(1j * D ** 3 / (2.0 * math.pi)) * total)
    if pair == "VOL5":
        theta_rule = gauss_legendre(npoints, 0.0, math.pi)
        th_int = np.sum(theta_rule.weights * np.sin(theta_rule.nodes) ** 3)
        vals = volume_weight_vec("VOL5", chi, D) * (
            -8.0 * D ** 8 * np.exp(4j * chi) * np.sin(chi) ** 3
        )
        # each Euler block integrates to 2 pi^2 through (1/8) sin(beta)
        omega = 2.0 * math.pi ** 2
        total = np.sum(w * vals) * th_int * omega * omega
        return complex(-(1j * D ** 5 / (32.0 * math.pi ** 2)) * total)
    raise KindError("unknown volume pair %r" % (pair,))


def volume_weight_vec(pair, chi, D=1.0):
    chi = np.asarray(chi, dtype=complex)
    if pair == "VOL2":
        return -(np.exp(-2j * chi) - 1.0)
    if pair == "VOL3":
        return (1.0 - np.exp(2j * chi)) / (D * np.exp(3j * chi))
    if pair == "VOL5":
        return (1.0 - np.exp(2j * chi)) / (D ** 3 * np.exp(5j * chi))
    raise KindError("unknown volume pair %r" % (pair,))


# ----------------------------------------------------- diamond inner product

# axis name -> (kind, period) for uniform axes, or polar weight marker
_AXIS_TABLE = {
    2: (("chi", "gl_sin"), ("phi", 4.0 * math.pi)),
    3: (("chi", "gl_plain"), ("beta", "gl_sinb"), ("alpha", 2.0 * math.pi),
        ("gamma", 4.0 * math.pi)),
    5: (("chi", "gl_plain"), ("theta", "gl_sin3"), ("beta", "gl_sinb"),
        ("alpha", 2.0 * math.pi), ("gamma", 4.0 * math.pi),
        ("betaH", "gl_sinbH"), ("alphaH", 2.0 * math.pi),
        ("gammaH", 4.0 * math.pi)),
}

# measure factor contributed by an axis when the integrand ignores it
_DEAD_AXIS_FACTOR = {
    "phi": 4.0 * math.pi,
    "alpha": 2.0 * math.pi,
    "gamma": 4.0 * math.pi,
    "alphaH": 2.0 * math.pi,
    "gammaH": 4.0 * math.pi,
    "beta": 2.0,       # integral of sin(beta)
    "betaH": 2.0,
    "theta": 4.0 / 3.0,  # integral of sin^3(theta)
}


def _diamond_prefactor(dim, D):
    # resolved inner-product constants; each makes the printed normalization
    # constants give norm exactly one
    if dim == 2:
        return -D * D / 2.0
    if dim == 3:
        return 1j * D ** 3 / math.pi
    if dim == 5:
        return 1j * math.pi ** 2 * D ** 5 / 16.0
    raise RangeError("dim must be 2, 3, or 5")


def _weighted_density(dim, chi, theta, D):
    # the chi/theta part of weight * dv(u) as a density over the raw angles;
    # beta-type axes contribute plain sin factors handled by the axis rules.
    # theta may be None when the integrand ignores it, in which case the
    # dead-axis factor 4/3 supplies the sin^3(theta) integral.
    if dim == 2:
        return -D * D * np.sin(chi)
    if dim == 3:
        return (0.5j * D ** 4) * np.exp(1j * chi) * np.sin(chi) ** 2
    base = (0.25j * D ** 8) * np.exp(3j * chi) * np.sin(chi) ** 4
    if theta is None:
        return base
    return base * np.sin(theta) ** 3


def _axis_nodes(name, rule_kind, order):
    if isinstance(rule_kind, float):
        nodes = np.arange(order) * (rule_kind / order)
        weights = np.full(order, rule_kind / order)
        return nodes, weights
    rule = gauss_legendre(order, 0.0, math.pi)
    if rule_kind == "gl_sinb" or rule_kind == "gl_sinbH":
        return rule.nodes, rule.weights * np.sin(rule.nodes)
    # chi and theta weights live in _weighted_density
    return rule.nodes, rule.weights


def _tensor_integral(dim, integrand, active, order, D):
    axes = _AXIS_TABLE[dim]
    live = [(name, kind) for name, kind in axes if name in active or name == "chi"]
    dead = [name for name, _ in axes if name not in {n for n, _ in live}]
    factor = 1.0
    for name in dead:
        factor *= _DEAD_AXIS_FACTOR[name]
    grids = []
    for name, kind in live:
        grids.append((name, *_axis_nodes(name, kind, order)))
    # chunk over the chi axis to bound memory
    chi_name, chi_nodes, chi_weights = grids[0]
    rest = grids[1:]
    if rest:
        mesh = np.meshgrid(*[g[1] for g in rest], indexing="ij")
        wmesh = np.meshgrid(*[g[2] for g in rest], indexing="ij")
        rest_weight = np.ones_like(mesh[0])
        for wm in wmesh:
            rest_weight = rest_weight * wm
    total = 0.0 + 0.0j
    for i, chi in enumerate(chi_nodes):
        fields = {"chi": chi}
        if rest:
            for (name, _, _), grid in zip(rest, mesh):
                fields[name] = grid
        angles = AngleChart(**fields)
        density = _weighted_density(dim, chi, fields.get("theta"), D)
        vals = integrand(angles) * density
        if rest:
            total += chi_weights[i] * np.sum(vals * rest_weight)
        else:
            total += chi_weights[i] * vals
    return factor * total


def diamond_inner_product(dim, f, g, order=None, D=1.0):
    """Weighted u-sphere inner product <f, g> with diamond conjugation of g.

    order is the node count per active axis; below eight it is rejected.
    With order None the count starts at the default and doubles until two
    successive values agree to 1e-10 (capped).
    """
    if dim not in (2, 3, 5):
        raise RangeError("dim must be 2, 3, or 5")
    fc = as_chart_function(f)
    gc = as_chart_function(g)
    active = set(fc.depends_on) | set(gc.depends_on)
    if not fc.depends_on and not gc.depends_on:
        active = {name for name, _ in _AXIS_TABLE[dim]}

    def integrand(angles):
        return fc(angles) * gc.diamond_value(angles)

    prefactor = _diamond_prefactor(dim, D)

    def run(n):
        return prefactor * _tensor_integral(dim, integrand, active, n, D)

    if order is not None:
        if order < _MIN_QUAD_ORDER:
            raise QuadratureOrderError("quadrature order below 8 is rejected")
        return run(order)
    n = _DEFAULT_QUAD_ORDER
    prev = run(n)
    while n < _MAX_QUAD_ORDER:
        n *= 2
        curr = run(n)
        if abs(curr - prev) <= _DOUBLING_TOL * max(1.0, abs(curr)):
            return curr
        prev = curr
    return prev


# ------------------------------------------------------- contour identity

def oscillator_radial_2d(n_r, m, nu):
    """Quasiradial factor in the chi picture: z = 1 - e^{2i chi}."""
    m = abs(m)

    def radial(chi):
        chi = np.asarray(chi, dtype=complex)
        z = 1.0 - np.exp(2j * chi)
        return (
            np.power(z, 0.5 * m)
            * np.exp(1j * chi * (nu + 0.5))
            * hyp2f1_terminating(n_r, n_r + nu + m + 1.0, m + 1.0, z)
        )

    return radial


def contour_identity_check(n_r, m, nu, order=None):
    """Both sides of the normalization contour identity, unnormalized radial.

    lhs integrates R(chi)^2 sin(chi) over the real segment (0, pi); rhs is
    (1 - e^{2 pi i nu}) times the imaginary-axis integral, which converges
    only when Re(nu) > 0.
    """
    nu = complex(nu)
    if nu.real <= 0.0:
        raise NonDecayingIntegrandError(
            "imaginary-axis integrand grows for Re(nu) <= 0"
        )
    if order is not None and order < _MIN_QUAD_ORDER:
        raise QuadratureOrderError("quadrature order below 8 is rejected")
    n = order if order is not None else 256
    radial = oscillator_radial_2d(n_r, m, nu)
    rule = gauss_legendre(n, 0.0, math.pi)
    lhs = complex(np.sum(rule.weights * radial(rule.nodes) ** 2 * np.sin(rule.nodes)))

    # chi = i t: the integrand decays like e^{-(2 Re nu) t} sinh(t)
    t_max = 40.0 / nu.real
    npanel = max(64, int(8 * t_max))
    edges = np.linspace(0.0, t_max, npanel + 1)
    value = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        sub = gauss_legendre(16, a, b)
        t = sub.nodes
        z = 1.0 - np.exp(-2.0 * t)
        r = (
            np.power(z.astype(complex), 0.5 * abs(m))
            * np.exp(-t * (nu + 0.5))
            * hyp2f1_terminating(n_r, n_r + nu + abs(m) + 1.0, abs(m) + 1.0,
                                 z.astype(complex))
        )
        value += np.sum(sub.weights * r * r * (-np.sinh(t)))
    rhs = (1.0 - np.exp(2j * math.pi * nu)) * value
    return lhs, rhs


def contour_theta_variant(n_r, m, nu, order=512):
    """Imaginary-axis integral recast over the real oscillator angle.

    Equals -(1/2) times the integral of R^2 sin(t) tan^2(t) over (0, pi/2)
    in the vartheta picture; the bracket factor is applied by the caller's
    comparison against contour_identity_check's rhs.
    """
    nu = complex(nu)
    if nu.real <= 0.0:
        raise NonDecayingIntegrandError(
            "endpoint singularity is non-integrable for Re(nu) <= 0"
        )
    m = abs(m)

    def radial(theta):
        s = np.sin(theta)
        c = np.cos(theta).astype(complex)
        return (
            np.power(s.astype(complex), m)
            * np.power(c, nu + 0.5)
            * hyp2f1_terminating(n_r, n_r + nu + m + 1.0, m + 1.0,
                                 (s * s).astype(complex))
        )

    # geometrically graded panels toward the pi/2 endpoint
    edges = [0.0]
    gap = math.pi / 2.0
    while gap > 1e-12:
        gap *= 0.5
        edges.append(math.pi / 2.0 - gap)
    value = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        sub = gauss_legendre(24, a, b)
        t = sub.nodes
        vals = radial(t) ** 2 * np.sin(t) * np.tan(t) ** 2
        value += np.sum(sub.weights * vals)
    return -0.5 * value
