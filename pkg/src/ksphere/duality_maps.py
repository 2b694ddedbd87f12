"""Quadratic regularizing maps between u-spaces and s-spaces.

Implements the generalized Levi-Civita (2D), Kustaanheimo-Stiefel (3D),
and Hurwitz (5D) transformations on complex spheres, their hyperboloid
variants, the angle parametrizations of the constraint surfaces, the
constraint one-forms with horizontal lifts, the restricted metric
relations, and the flat-space contraction of the Levi-Civita map.

Coordinate conventions: a u-point lies on the complex sphere
sum u_i^2 = D^2 (or a hyperboloid with the kind's signature), an s-point
on sum s_i^2 = R^2 with R = D^2. The last u coordinate is the map
divisor. All maps are quadratic in u up to the common factor sqrt(Q).
"""

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._errors import (
    DegenerateAngleError,
    DimensionMismatchError,
    DomainError,
    KindError,
    NonTangentError,
    RangeError,
    SingularDivisorError,
)

__all__ = [
    "MapKind",
    "SpaceSpec",
    "AmbientPoint",
    "AngleChart",
    "u_dimension",
    "s_dimension",
    "sphere_space",
    "paired_spaces",
    "forward_map",
    "identity_residual",
    "identity_residual_many",
    "forward_jacobian",
    "parametrize",
    "chart_tangents",
    "constraint_oneforms",
    "oneform_rows",
    "metric_relation_residual",
    "horizontal_lift",
    "hurwitz_angles",
    "contract_to_flat",
]

_DIVISOR_FLOOR = 1e-14


class MapKind(enum.Enum):
    LC2_FLAT = "LC2_FLAT"
    LC2_SPHERE = "LC2_SPHERE"
    KS3_SPHERE = "KS3_SPHERE"
    HURWITZ5_SPHERE = "HURWITZ5_SPHERE"
    LC2_H2C_TO_S2 = "LC2_H2C_TO_S2"
    LC2_HYPERBOLOID_PM = "LC2_HYPERBOLOID_PM"
    LC2_ONE_SHEET = "LC2_ONE_SHEET"


_KIND_DIMS = {
    MapKind.LC2_FLAT: (2, 2),
    MapKind.LC2_SPHERE: (3, 3),
    MapKind.KS3_SPHERE: (5, 4),
    MapKind.HURWITZ5_SPHERE: (9, 6),
    MapKind.LC2_H2C_TO_S2: (3, 3),
    MapKind.LC2_HYPERBOLOID_PM: (3, 3),
    MapKind.LC2_ONE_SHEET: (3, 3),
}

# Three-component quadratic family: (u-signature, s-signature, sign of the
# p/(2 u3) term in s3, factor i or 1 on s1 and s2). The PM kind stores both
# branches keyed by the u-space signature.
_LC2_FAMILY = {
    MapKind.LC2_SPHERE: ((1, 1, 1), (1, 1, 1), 1.0, 1j),
    MapKind.LC2_H2C_TO_S2: ((-1, -1, 1), (1, 1, 1), -1.0, 1j),
    MapKind.LC2_ONE_SHEET: ((1, 1, -1), (1, 1, -1), -1.0, 1.0 + 0j),
}
_PM_BRANCHES = {
    (1, 1, 1): ((1, 1, 1), (-1, -1, 1), 1.0, 1.0 + 0j),
    (-1, -1, 1): ((-1, -1, 1), (-1, -1, 1), -1.0, 1.0 + 0j),
}


def u_dimension(kind):
    return _KIND_DIMS[kind][0]


def s_dimension(kind):
    return _KIND_DIMS[kind][1]


@dataclass
class SpaceSpec:
    """Ambient space: coordinate count, radius, and quadratic-form signs."""

    dim: int
    radius: float
    signature: tuple = ()

    def __post_init__(self):
        if not self.signature:
            self.signature = (1,) * self.dim
        self.signature = tuple(int(s) for s in self.signature)
        if len(self.signature) != self.dim:
            raise DimensionMismatchError(
                f"signature length {len(self.signature)} != dim {self.dim}"
            )
        if any(s not in (-1, 1) for s in self.signature):
            raise DomainError("signature entries must be +1 or -1")


@dataclass
class AmbientPoint:
    """Point in an ambient space; the space is optional for raw evaluations."""

    coords: np.ndarray
    space: SpaceSpec = None

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=complex)
        if self.space is not None and len(self.coords) != self.space.dim:
            raise DimensionMismatchError(
                f"{len(self.coords)} coordinates for dim-{self.space.dim} space"
            )

    def constraint_residual(self):
        """|sum sigma_i c_i^2 - radius^2| against the owning space."""
        if self.space is None:
            raise DomainError("point has no space attached")
        sig = np.asarray(self.space.signature)
        value = np.sum(sig * self.coords**2)
        return abs(value - self.space.radius**2)


@dataclass
class AngleChart:
    """Angles used by the parametrizations; each kind reads a subset.

    chi is the complexified polar angle, vartheta the oscillator
    quasi-radial angle, theta the 5D polar angle, phi the 2D azimuth
    (period 4 pi), (alpha, beta, gamma) the Euler block, and
    (alphaH, betaH, gammaH) the Hurwitz fiber block.
    """

    chi: complex = 0.0
    vartheta: float = 0.0
    theta: float = 0.0
    phi: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    alphaH: float = 0.0
    betaH: float = 0.0
    gammaH: float = 0.0


def sphere_space(dim, radius):
    return SpaceSpec(dim=dim, radius=radius, signature=(1,) * dim)


def paired_spaces(kind, D):
    """(u-space, s-space) for a sphere kind, enforcing R = D^2."""
    if kind not in (MapKind.LC2_SPHERE, MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE):
        raise KindError(f"paired spheres not defined for {kind}")
    nu, ns = _KIND_DIMS[kind]
    return sphere_space(nu, D), sphere_space(ns, D * D)


def _coords_of(u, kind):
    if isinstance(u, AmbientPoint):
        coords = u.coords
    else:
        coords = np.asarray(u, dtype=complex)
    expected = u_dimension(kind)
    if coords.shape[-1] != expected:
        raise DimensionMismatchError(
            f"{kind.value} expects {expected} u coordinates, got {coords.shape[-1]}"
        )
    return coords


def _pm_branch(u):
    if isinstance(u, AmbientPoint) and u.space is not None:
        sig = tuple(u.space.signature)
        if sig not in _PM_BRANCHES:
            raise KindError(f"no PM branch with u-signature {sig}")
        return _PM_BRANCHES[sig]
    return _PM_BRANCHES[(1, 1, 1)]


def _family_params(kind, u):
    if kind in _LC2_FAMILY:
        return _LC2_FAMILY[kind]
    if kind is MapKind.LC2_HYPERBOLOID_PM:
        return _pm_branch(u)
    raise KindError(f"{kind} is not in the three-component family")


# ------------------------------------------------------------- map cores
# All cores take coords with the u index on the last axis and return s
# coords on the last axis, so they vectorize over batches of points.

def _map_lc2_family(c, qsig, s3sign, ifac):
    q = np.asarray(qsig)
    Q = np.sum(q * c**2, axis=-1)
    sq = np.sqrt(Q)
    u1, u2, u3 = c[..., 0], c[..., 1], c[..., 2]
    p = u1**2 + u2**2
    s = np.empty(c.shape[:-1] + (3,), dtype=complex)
    s[..., 0] = ifac * sq * (u1**2 - u2**2) / (2.0 * u3)
    s[..., 1] = ifac * sq * u1 * u2 / u3
    s[..., 2] = sq * (u3 + s3sign * p / (2.0 * u3))
    return s


def _map_lc2_flat(c):
    s = np.empty_like(c)
    s[..., 0] = c[..., 0] ** 2 - c[..., 1] ** 2
    s[..., 1] = 2.0 * c[..., 0] * c[..., 1]
    return s


def _map_ks(c):
    Q = np.sum(c**2, axis=-1)
    sq = np.sqrt(Q)
    u1, u2, u3, u4, u5 = (c[..., i] for i in range(5))
    w = u1**2 + u2**2 + u3**2 + u4**2
    s = np.empty(c.shape[:-1] + (4,), dtype=complex)
    s[..., 0] = 1j * sq * (u1 * u3 + u2 * u4) / u5
    s[..., 1] = 1j * sq * (u2 * u3 - u1 * u4) / u5
    s[..., 2] = 1j * sq * (u1**2 + u2**2 - u3**2 - u4**2) / (2.0 * u5)
    s[..., 3] = sq * (u5 + w / (2.0 * u5))
    return s


def _map_hurwitz(c):
    Q = np.sum(c**2, axis=-1)
    sq = np.sqrt(Q)
    u = [c[..., i] for i in range(9)]
    a2 = u[0] ** 2 + u[1] ** 2 + u[2] ** 2 + u[3] ** 2
    b2 = u[4] ** 2 + u[5] ** 2 + u[6] ** 2 + u[7] ** 2
    u9 = u[8]
    s = np.empty(c.shape[:-1] + (6,), dtype=complex)
    s[..., 0] = 1j * sq * (u[0] * u[4] + u[1] * u[5] - u[2] * u[6] - u[3] * u[7]) / u9
    s[..., 1] = 1j * sq * (u[0] * u[5] - u[1] * u[4] + u[2] * u[7] - u[3] * u[6]) / u9
    s[..., 2] = 1j * sq * (u[0] * u[6] + u[1] * u[7] + u[2] * u[4] + u[3] * u[5]) / u9
    s[..., 3] = 1j * sq * (u[0] * u[7] - u[1] * u[6] - u[2] * u[5] + u[3] * u[4]) / u9
    s[..., 4] = 1j * sq * (a2 - b2) / (2.0 * u9)
    s[..., 5] = sq * (u9 + (a2 + b2) / (2.0 * u9))
    return s


def _map_coords(kind, c, u=None):
    if kind is MapKind.LC2_FLAT:
        return _map_lc2_flat(c)
    if np.min(np.abs(c[..., -1])) < _DIVISOR_FLOOR:
        raise SingularDivisorError(
            f"divisor coordinate below {_DIVISOR_FLOOR:g} for {kind.value}"
        )
    if kind is MapKind.KS3_SPHERE:
        return _map_ks(c)
    if kind is MapKind.HURWITZ5_SPHERE:
        return _map_hurwitz(c)
    qsig, _, s3sign, ifac = _family_params(kind, u)
    return _map_lc2_family(c, qsig, s3sign, ifac)


def _signatures(kind, u=None):
    """(u-signature, s-signature) used in the quadratic identity."""
    nu, ns = _KIND_DIMS[kind]
    if kind in (MapKind.LC2_FLAT, MapKind.LC2_SPHERE, MapKind.KS3_SPHERE,
                MapKind.HURWITZ5_SPHERE):
        return (1,) * nu, (1,) * ns
    qsig, ssig, _, _ = _family_params(kind, u)
    return qsig, ssig


def forward_map(kind, u):
    """Map a u-point to its s-point.

    Accepts an AmbientPoint or a plain coordinate sequence. For the PM
    hyperboloid kind the branch follows the u-point's space signature
    (upper for (+,+,+), lower for (-,-,+)); raw coordinates default to
    the upper branch.
    """
    c = _coords_of(u, kind)
    s = _map_coords(kind, c, u)
    space = None
    if isinstance(u, AmbientPoint) and u.space is not None:
        _, ssig = _signatures(kind, u)
        space = SpaceSpec(dim=s_dimension(kind), radius=u.space.radius**2,
                          signature=ssig)
    return AmbientPoint(coords=s, space=space)


def identity_residual(kind, u):
    """Normalized residual of the kind's quadratic identity at one point."""
    c = _coords_of(u, kind)
    return float(identity_residual_many(kind, c[None, :], u)[0])


def identity_residual_many(kind, points, u_template=None):
    """Vectorized identity residuals for a batch of u-points.

    points has shape (n, u_dim). The residual of
    sum sigma_i s_i^2 - (sum sigma'_i u_i^2)^2 is normalized by
    max(1, |sum sigma_i s_i^2|, |Q|^2).
    """
    c = np.asarray(points, dtype=complex)
    if c.shape[-1] != u_dimension(kind):
        raise DimensionMismatchError(
            f"{kind.value} expects {u_dimension(kind)} u coordinates"
        )
    qsig, ssig = _signatures(kind, u_template)
    s = _map_coords(kind, c, u_template)
    Q = np.sum(np.asarray(qsig) * c**2, axis=-1)
    ss = np.sum(np.asarray(ssig) * s**2, axis=-1)
    resid = np.abs(ss - Q**2)
    scale = np.maximum(1.0, np.maximum(np.abs(ss), np.abs(Q) ** 2))
    return resid / scale


# ------------------------------------------------------------- jacobians

def forward_jacobian(kind, u):
    """Analytic derivative matrix ds_i / du_j at a single u-point."""
    c = _coords_of(kind=kind, u=u)
    if c.ndim != 1:
        raise DimensionMismatchError("forward_jacobian takes a single point")
    if kind is MapKind.LC2_FLAT:
        u1, u2 = c
        return np.array([[2 * u1, -2 * u2], [2 * u2, 2 * u1]], dtype=complex)
    if abs(c[-1]) < _DIVISOR_FLOOR:
        raise SingularDivisorError("divisor coordinate too small")
    if kind is MapKind.KS3_SPHERE:
        return _jac_ks(c)
    if kind is MapKind.HURWITZ5_SPHERE:
        return _jac_hurwitz(c)
    qsig, _, s3sign, ifac = _family_params(kind, u)
    return _jac_lc2_family(c, qsig, s3sign, ifac)


def _jac_lc2_family(c, qsig, s3sign, ifac):
    u1, u2, u3 = c
    q1, q2, q3 = qsig
    Q = q1 * u1**2 + q2 * u2**2 + q3 * u3**2
    sq = np.sqrt(Q)
    p = u1**2 + u2**2
    dq = np.array([q1 * u1, q2 * u2, q3 * u3]) / sq
    g1 = (u1**2 - u2**2) / (2.0 * u3)
    g2 = u1 * u2 / u3
    g3 = u3 + s3sign * p / (2.0 * u3)
    dg1 = np.array([u1 / u3, -u2 / u3, -(u1**2 - u2**2) / (2.0 * u3**2)])
    dg2 = np.array([u2 / u3, u1 / u3, -u1 * u2 / u3**2])
    dg3 = np.array([
        s3sign * u1 / u3,
        s3sign * u2 / u3,
        1.0 - s3sign * p / (2.0 * u3**2),
    ])
    jac = np.empty((3, 3), dtype=complex)
    jac[0] = ifac * (dq * g1 + sq * dg1)
    jac[1] = ifac * (dq * g2 + sq * dg2)
    jac[2] = dq * g3 + sq * dg3
    return jac


def _jac_ks(c):
    u1, u2, u3, u4, u5 = c
    Q = np.sum(c**2)
    sq = np.sqrt(Q)
    dq = c / sq
    w = u1**2 + u2**2 + u3**2 + u4**2
    g = np.array([
        1j * (u1 * u3 + u2 * u4) / u5,
        1j * (u2 * u3 - u1 * u4) / u5,
        1j * (u1**2 + u2**2 - u3**2 - u4**2) / (2.0 * u5),
        u5 + w / (2.0 * u5),
    ])
    dg = np.array([
        [1j * u3 / u5, 1j * u4 / u5, 1j * u1 / u5, 1j * u2 / u5,
         -1j * (u1 * u3 + u2 * u4) / u5**2],
        [-1j * u4 / u5, 1j * u3 / u5, 1j * u2 / u5, -1j * u1 / u5,
         -1j * (u2 * u3 - u1 * u4) / u5**2],
        [1j * u1 / u5, 1j * u2 / u5, -1j * u3 / u5, -1j * u4 / u5,
         -1j * (u1**2 + u2**2 - u3**2 - u4**2) / (2.0 * u5**2)],
        [u1 / u5, u2 / u5, u3 / u5, u4 / u5, 1.0 - w / (2.0 * u5**2)],
    ])
    return np.outer(g, dq) + sq * dg


def _jac_hurwitz(c):
    u = c
    u9 = u[8]
    Q = np.sum(c**2)
    sq = np.sqrt(Q)
    dq = c / sq
    a2 = np.sum(u[0:4] ** 2)
    b2 = np.sum(u[4:8] ** 2)
    bil = np.array([
        u[0] * u[4] + u[1] * u[5] - u[2] * u[6] - u[3] * u[7],
        u[0] * u[5] - u[1] * u[4] + u[2] * u[7] - u[3] * u[6],
        u[0] * u[6] + u[1] * u[7] + u[2] * u[4] + u[3] * u[5],
        u[0] * u[7] - u[1] * u[6] - u[2] * u[5] + u[3] * u[4],
    ])
    dbil = np.array([
        [u[4], u[5], -u[6], -u[7], u[0], u[1], -u[2], -u[3], 0],
        [u[5], -u[4], u[7], -u[6], -u[1], u[0], -u[3], u[2], 0],
        [u[6], u[7], u[4], u[5], u[2], u[3], u[0], u[1], 0],
        [u[7], -u[6], -u[5], u[4], u[3], -u[2], -u[1], u[0], 0],
    ], dtype=complex)
    g = np.empty(6, dtype=complex)
    dg = np.zeros((6, 9), dtype=complex)
    for i in range(4):
        g[i] = 1j * bil[i] / u9
        dg[i] = 1j * dbil[i] / u9
        dg[i, 8] += -1j * bil[i] / u9**2
    g[4] = 1j * (a2 - b2) / (2.0 * u9)
    dg[4, 0:4] = 1j * u[0:4] / u9
    dg[4, 4:8] = -1j * u[4:8] / u9
    dg[4, 8] = -1j * (a2 - b2) / (2.0 * u9**2)
    g[5] = u9 + (a2 + b2) / (2.0 * u9)
    dg[5, 0:8] = u[0:8] / u9
    dg[5, 8] = 1.0 - (a2 + b2) / (2.0 * u9**2)
    return np.outer(g, dq) + sq * dg


# -------------------------------------------------------- parametrizations
# Chart components u_i = A(chi) * T_i(angles) for i < last with
# A = D sqrt(1 - e^{2 i chi}) (principal branch) and u_last = D e^{i chi}.
# Each T_i is a sum of terms; a term is (sign, factors) with factors either
# ("cos"/"sin", angle_name) meaning trig(angle/2) or ("pcos"/"psin", coeffs)
# meaning trig(sum coeffs[a] * angle_a / 2). Tangents come from the same
# tables by the product rule.

_LC2_TERMS = (
    ((1.0, (("pcos", (("phi", 1),)),)),),
    ((1.0, (("psin", (("phi", 1),)),)),),
)

_COOR34_TERMS = (
    ((1.0, (("cos", "beta"), ("pcos", (("alpha", 1), ("gamma", 1))))),),
    ((1.0, (("cos", "beta"), ("psin", (("alpha", 1), ("gamma", 1))))),),
    ((1.0, (("sin", "beta"), ("pcos", (("gamma", 1), ("alpha", -1))))),),
    ((1.0, (("sin", "beta"), ("psin", (("gamma", 1), ("alpha", -1))))),),
)

_P1 = (("alpha", 1), ("gamma", 1), ("alphaH", 1), ("gammaH", 1))
_P2 = (("alpha", 1), ("gamma", -1), ("alphaH", -1), ("gammaH", 1))
_P3 = (("alpha", 1), ("gamma", -1), ("alphaH", 1), ("gammaH", 1))
_P4 = (("alpha", 1), ("gamma", 1), ("alphaH", -1), ("gammaH", 1))
_SH = (("alphaH", 1), ("gammaH", 1))
_DH = (("alphaH", 1), ("gammaH", -1))

_SPHER8_TERMS = (
    ((1.0, (("cos", "theta"), ("cos", "betaH"), ("pcos", _SH))),),
    ((1.0, (("cos", "theta"), ("cos", "betaH"), ("psin", _SH))),),
    ((1.0, (("cos", "theta"), ("sin", "betaH"), ("pcos", _DH))),),
    ((1.0, (("cos", "theta"), ("sin", "betaH"), ("psin", _DH))),),
    ((1.0, (("sin", "theta"), ("cos", "beta"), ("cos", "betaH"), ("pcos", _P1))),
     (1.0, (("sin", "theta"), ("sin", "beta"), ("sin", "betaH"), ("pcos", _P2)))),
    ((1.0, (("sin", "theta"), ("cos", "beta"), ("cos", "betaH"), ("psin", _P1))),
     (-1.0, (("sin", "theta"), ("sin", "beta"), ("sin", "betaH"), ("psin", _P2)))),
    ((1.0, (("sin", "theta"), ("sin", "beta"), ("cos", "betaH"), ("pcos", _P3))),
     (-1.0, (("sin", "theta"), ("cos", "beta"), ("sin", "betaH"), ("pcos", _P4)))),
    ((1.0, (("sin", "theta"), ("sin", "beta"), ("cos", "betaH"), ("psin", _P3))),
     (1.0, (("sin", "theta"), ("cos", "beta"), ("sin", "betaH"), ("psin", _P4)))),
)

_CHART_TABLES = {
    MapKind.LC2_SPHERE: (_LC2_TERMS, ("chi", "phi")),
    MapKind.KS3_SPHERE: (_COOR34_TERMS, ("chi", "beta", "alpha", "gamma")),
    MapKind.HURWITZ5_SPHERE: (
        _SPHER8_TERMS,
        ("chi", "theta", "beta", "alpha", "gamma", "betaH", "alphaH", "gammaH"),
    ),
}

_ANGLE_RANGES = {
    "phi": 4.0 * math.pi,
    "alpha": 2.0 * math.pi,
    "gamma": 4.0 * math.pi,
    "alphaH": 2.0 * math.pi,
    "gammaH": 4.0 * math.pi,
}
_HALF_OPEN_TOL = 1e-12


def _factor_value(factor, angles):
    tag = factor[0]
    if tag == "cos":
        return math.cos(angles[factor[1]] / 2.0)
    if tag == "sin":
        return math.sin(angles[factor[1]] / 2.0)
    arg = sum(coeff * angles[name] for name, coeff in factor[1]) / 2.0
    if tag == "pcos":
        return math.cos(arg)
    return math.sin(arg)


def _factor_partial(factor, angles, wrt):
    tag = factor[0]
    if tag in ("cos", "sin"):
        if factor[1] != wrt:
            return 0.0
        half = angles[factor[1]] / 2.0
        return -0.5 * math.sin(half) if tag == "cos" else 0.5 * math.cos(half)
    coeff = dict(factor[1]).get(wrt, 0)
    if coeff == 0:
        return 0.0
    arg = sum(cc * angles[name] for name, cc in factor[1]) / 2.0
    if tag == "pcos":
        return -0.5 * coeff * math.sin(arg)
    return 0.5 * coeff * math.cos(arg)


def _terms_value(terms, angles):
    total = 0.0
    for sign, factors in terms:
        prod = sign
        for factor in factors:
            prod *= _factor_value(factor, angles)
        total += prod
    return total


def _terms_partial(terms, angles, wrt):
    total = 0.0
    for sign, factors in terms:
        for k in range(len(factors)):
            prod = sign
            for j, factor in enumerate(factors):
                prod *= (_factor_partial(factor, angles, wrt) if j == k
                         else _factor_value(factor, angles))
            total += prod
    return total


def _angles_dict(angles):
    return {
        "chi": angles.chi,
        "theta": angles.theta,
        "phi": angles.phi,
        "alpha": angles.alpha,
        "beta": angles.beta,
        "gamma": angles.gamma,
        "alphaH": angles.alphaH,
        "betaH": angles.betaH,
        "gammaH": angles.gammaH,
    }


def _validate_chart_angles(kind, adict, names):
    chi = adict["chi"]
    if isinstance(chi, complex) and chi.imag != 0.0:
        pass  # complexified chi is allowed on any branch-safe contour
    else:
        chi_r = chi.real if isinstance(chi, complex) else float(chi)
        if chi_r < -_HALF_OPEN_TOL or chi_r > math.pi + _HALF_OPEN_TOL:
            raise RangeError(f"chi = {chi_r:g} outside [0, pi]")
    for name in names:
        if name == "chi":
            continue
        value = float(adict[name])
        if name in ("beta", "betaH", "theta"):
            if value < -_HALF_OPEN_TOL or value > math.pi + _HALF_OPEN_TOL:
                raise RangeError(f"{name} = {value:g} outside [0, pi]")
        else:
            top = _ANGLE_RANGES[name]
            if value < -_HALF_OPEN_TOL or value >= top:
                raise RangeError(f"{name} = {value:g} outside [0, {top:g})")


def parametrize(kind, angles, D):
    """Point on the u-sphere of radius D from the kind's angle chart."""
    if kind not in _CHART_TABLES:
        raise KindError(f"no angle chart for {kind}")
    terms, names = _CHART_TABLES[kind]
    adict = _angles_dict(angles)
    _validate_chart_angles(kind, adict, names)
    chi = complex(adict["chi"])
    A = D * cmath.sqrt(1.0 - cmath.exp(2j * chi))
    n = u_dimension(kind)
    coords = np.empty(n, dtype=complex)
    for i in range(n - 1):
        coords[i] = A * _terms_value(terms[i], adict)
    coords[n - 1] = D * cmath.exp(1j * chi)
    return AmbientPoint(coords=coords, space=sphere_space(n, D))


def chart_tangents(kind, angles, D, method="analytic", step=1e-6):
    """Partial derivatives of the chart point with respect to each angle.

    Returns a dict keyed by angle name. The analytic path differentiates
    the chart terms; the finite-difference path uses central differences
    with the given step, as an independent cross-check.
    """
    if kind not in _CHART_TABLES:
        raise KindError(f"no angle chart for {kind}")
    terms, names = _CHART_TABLES[kind]
    if method == "fd":
        out = {}
        for name in names:
            hi = _shift_chart(angles, name, step)
            lo = _shift_chart(angles, name, -step)
            up = parametrize(kind, hi, D).coords
            dn = parametrize(kind, lo, D).coords
            out[name] = (up - dn) / (2.0 * step)
        return out
    if method != "analytic":
        raise DomainError(f"unknown tangent method {method!r}")
    adict = _angles_dict(angles)
    chi = complex(adict["chi"])
    A = D * cmath.sqrt(1.0 - cmath.exp(2j * chi))
    dA = -1j * D * D * cmath.exp(2j * chi) / A
    n = u_dimension(kind)
    out = {}
    for name in names:
        vec = np.zeros(n, dtype=complex)
        if name == "chi":
            for i in range(n - 1):
                vec[i] = dA * _terms_value(terms[i], adict)
            vec[n - 1] = 1j * D * cmath.exp(1j * chi)
        else:
            for i in range(n - 1):
                vec[i] = A * _terms_partial(terms[i], adict, name)
        out[name] = vec
    return out


def _shift_chart(angles, name, delta):
    values = _angles_dict(angles)
    values[name] = values[name] + delta
    return AngleChart(**values)


# ----------------------------------------------------- one-forms and lifts

def oneform_rows(kind, u):
    """Coefficient rows of the kind's constraint one-forms at u."""
    c = _coords_of(u, kind)
    if kind is MapKind.KS3_SPHERE:
        u1, u2, u3, u4, _ = c
        return np.array([[u2, -u1, u4, -u3, 0.0]], dtype=complex)
    if kind is MapKind.HURWITZ5_SPHERE:
        u = c
        return np.array([
            [u[3], u[2], -u[1], -u[0], -u[7], -u[6], u[5], u[4], 0.0],
            [u[2], -u[3], -u[0], u[1], -u[6], u[7], u[4], -u[5], 0.0],
            [u[1], -u[0], u[3], -u[2], u[5], -u[4], u[7], -u[6], 0.0],
        ], dtype=complex)
    raise KindError(f"no constraint one-forms for {kind}")


def constraint_oneforms(kind, u, du):
    """Values of the constraint one-forms on the displacement du."""
    rows = oneform_rows(kind, u)
    dv = np.asarray(du, dtype=complex)
    if dv.shape[-1] != rows.shape[1]:
        raise DimensionMismatchError(
            f"du must have {rows.shape[1]} components, got {dv.shape[-1]}"
        )
    return rows @ dv


def horizontal_lift(kind, u, sdot):
    """Unique tangent udot with J udot = sdot, u . udot = 0, one-forms 0.

    Solved as a least-squares system; the residual is at rounding level
    whenever sdot is tangent to the s-sphere at forward_map(u).
    """
    c = _coords_of(u, kind)
    jac = forward_jacobian(kind, u)
    rows = [jac, c[None, :]]
    rhs = [np.asarray(sdot, dtype=complex), np.zeros(1, dtype=complex)]
    if kind in (MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE):
        om = oneform_rows(kind, u)
        rows.append(om)
        rhs.append(np.zeros(om.shape[0], dtype=complex))
    system = np.vstack(rows)
    target = np.concatenate(rhs)
    solution, _, _, _ = np.linalg.lstsq(system, target, rcond=None)
    return solution


# --------------------------------------------------------- metric relation

def metric_relation_residual(kind, u, du, include_oneform_terms=True):
    """Residual of the restricted metric relation ds.ds vs the u-side form.

    The relation is ds.ds = -(Q / u_last^2) [ (sum_{i<last} u_i^2) du.du
    - sum omega_k(u, du)^2 ] with Q = u.u; the one-form terms are absent
    for the Levi-Civita kind. With include_oneform_terms=False the
    omega^2 sum is dropped, so for a non-horizontal tangent the residual
    equals |(Q / u_last^2) sum omega_k^2|.
    """
    if kind not in (MapKind.LC2_SPHERE, MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE):
        raise KindError(f"metric relation not defined for {kind}")
    c = _coords_of(u, kind)
    dv = np.asarray(du, dtype=complex)
    if dv.shape != c.shape:
        raise DimensionMismatchError("du shape must match u")
    tangency = abs(np.sum(c * dv))
    scale = max(1.0, float(np.linalg.norm(c) * np.linalg.norm(dv)))
    if tangency > 1e-8 * scale:
        raise NonTangentError(
            f"u . du = {tangency:.3e} exceeds tangency tolerance"
        )
    jac = forward_jacobian(kind, u)
    ds = jac @ dv
    lhs = np.sum(ds**2)
    Q = np.sum(c**2)
    w = np.sum(c[:-1] ** 2)
    omega_sq = 0.0
    if include_oneform_terms and kind in (MapKind.KS3_SPHERE, MapKind.HURWITZ5_SPHERE):
        om = constraint_oneforms(kind, c, dv)
        omega_sq = np.sum(om**2)
    rhs = -(Q / c[-1] ** 2) * (w * np.sum(dv**2) - omega_sq)
    return abs(lhs - rhs)


# ------------------------------------------------------------ fiber angles

def hurwitz_angles(u):
    """Recover the fiber angles (alphaH, betaH, gammaH) of a chart point.

    Expects a real-slice point, i.e. u_i / A real for i <= 8 with
    A = sqrt(sum_{i<=8} u_i^2) on the principal branch. The gammaH sheet
    (period 4 pi) is fixed by reconstructing the first four components.
    """
    if isinstance(u, AmbientPoint):
        c = u.coords
    else:
        c = np.asarray(u, dtype=complex)
    if c.shape != (9,):
        raise DimensionMismatchError("hurwitz_angles expects 9 coordinates")
    A = np.sqrt(np.sum(c[:8] ** 2))
    if abs(A) < 1e-14:
        raise DegenerateAngleError("vanishing transverse amplitude")
    r = c[:8] / A
    if np.max(np.abs(r.imag)) > 1e-8:
        raise DomainError("point is not on the real slice of the chart")
    r = r.real
    p12 = r[0] ** 2 + r[1] ** 2
    p34 = r[2] ** 2 + r[3] ** 2
    if p12 < 1e-28:
        raise DegenerateAngleError("u1^2 + u2^2 vanishes; betaH undefined")
    betaH = 2.0 * math.atan2(math.sqrt(p34), math.sqrt(p12))
    theta_p = math.atan2(r[1], r[0])
    if p34 < 1e-28:
        alphaH = (2.0 * theta_p) % (2.0 * math.pi)
        return alphaH, 0.0, 0.0
    theta_m = math.atan2(r[3], r[2])
    alphaH = (theta_p + theta_m) % (2.0 * math.pi)
    gammaH = (theta_p - theta_m) % (4.0 * math.pi)
    # Resolve the double-cover sheet: the candidate must reproduce the
    # direction of (u1..u4), not its negative.
    cH = math.cos(betaH / 2.0)
    sH = math.sin(betaH / 2.0)
    cand = np.array([
        cH * math.cos((alphaH + gammaH) / 2.0),
        cH * math.sin((alphaH + gammaH) / 2.0),
        sH * math.cos((alphaH - gammaH) / 2.0),
        sH * math.sin((alphaH - gammaH) / 2.0),
    ])
    direction = r[:4] / math.sqrt(p12 + p34)
    if np.dot(cand, direction) < 0.0:
        gammaH = (gammaH + 2.0 * math.pi) % (4.0 * math.pi)
    return alphaH, betaH, gammaH


# ------------------------------------------------------------- contraction

def contract_to_flat(kind, ubar, D):
    """Nonhomogeneous Levi-Civita map; D = inf gives the flat-space limit."""
    if kind is not MapKind.LC2_SPHERE:
        raise KindError(f"flat contraction defined only for LC2_SPHERE, got {kind}")
    v = np.asarray(ubar, dtype=complex)
    if v.shape != (2,):
        raise DimensionMismatchError("contract_to_flat expects 2 coordinates")
    u1, u2 = v
    num1 = 1j * (u1**2 - u2**2) / 2.0
    num2 = 1j * u1 * u2
    if math.isinf(D):
        return np.array([num1, num2])
    denom = 1.0 + (u1**2 + u2**2) / (2.0 * D * D)
    return np.array([num1 / denom, num2 / denom])
