"""Command line front end for spectra, checks, orbits, and wavefunctions.

Every subcommand resolves its configuration from defaults, an optional JSON
config file, and command line flags (in that order), validates it fully, and
only then computes.  Output is CSV or JSON with 17 significant digits so
reruns are byte-identical apart from the optional timestamp line.
"""

import argparse
import concurrent.futures
import dataclasses
import datetime
import json
import math
import sys

import numpy as np

from ._errors import KsphereError, ParameterError, PoleError, RangeError
from .classical_dynamics import (
    ClassicalState,
    IntegratorConfig,
    duality_compare,
    energy,
    integrate_direct,
    integrate_regularized_physical,
    radial_period,
    regularized_initial,
    trajectory_to_csv,
)
from .duality_maps import (
    AmbientPoint,
    AngleChart,
    MapKind,
    SpaceSpec,
    chart_tangents,
    forward_map,
    identity_residual_many,
    metric_relation_residual,
    parametrize,
    u_dimension,
)
from .geometry_quadrature import (
    contour_identity_check,
    diamond_inner_product,
    gauss_legendre,
    laplacian_relation_residual,
)
from .quantum_spectra import (
    QuantumNumbers,
    coulomb_energy,
    coulomb_wavefunction,
    duality_params,
    flat_limit_wavefunction,
    oscillator_chart_function,
    oscillator_wavefunction,
    reduce_to_coulomb,
)

_KIND_BY_DIM = {
    2: MapKind.LC2_SPHERE,
    3: MapKind.KS3_SPHERE,
    5: MapKind.HURWITZ5_SPHERE,
}

_ORBIT_ANGLES = {
    2: ("chi", "phi"),
    3: ("chi", "beta", "alpha"),
    5: ("chi", "theta", "beta", "alpha", "gamma"),
}


class UsageError(Exception):
    pass


# ------------------------------------------------------------- formatting

def fmt_real(v):
    return "%.17g" % float(v)


def fmt_complex(z):
    z = complex(z)
    return "%.17g%+.17gj" % (z.real, z.imag)


def fmt_value(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, complex):
        return fmt_complex(v)
    if isinstance(v, (int, np.integer)):
        return "%d" % v
    return fmt_real(v)


# ------------------------------------------------------------ run config

@dataclasses.dataclass
class RunConfig:
    """Fully resolved invocation: command, physics, and output options."""

    command: str
    dim: int = 2
    mu: float = 1.0
    R: float = 1.0
    format: str = "csv"
    output_path: str = None
    quad_order: int = 64
    rel_tol: float = 1e-8
    jobs: int = 1
    seed: int = 42
    timestamp: bool = True
    inject_error: bool = False
    extras: dict = dataclasses.field(default_factory=dict)

    def validate(self):
        if self.dim not in (2, 3, 5):
            raise RangeError("dim must be 2, 3, or 5")
        if self.format not in ("csv", "json"):
            raise ParameterError("format must be csv or json")
        if not (self.R > 0.0 or math.isinf(self.R)):
            raise RangeError("radius must be positive or inf")
        if not math.isfinite(self.mu):
            raise RangeError("mu must be finite")
        if self.jobs < 1:
            raise RangeError("jobs must be at least 1")
        if self.quad_order < 8:
            raise RangeError("quad-order below 8 is rejected")
        if self.rel_tol <= 0.0:
            raise RangeError("rel-tol must be positive")


_COMMON_DEFAULTS = {
    "format": "csv",
    "output": None,
    "jobs": 1,
    "seed": 42,
    "no_timestamp": False,
    "inject_error": False,
}

_DEFAULTS = {
    "spectrum": {"dim": 2, "mu": 1.0, "radius": "1", "n_max": 10,
                 **_COMMON_DEFAULTS},
    "check": {"kind": None, "quad_order": 64, "rel_tol": 1e-8,
              "points": 400, **_COMMON_DEFAULTS},
    "orbit": {"dim": 2, "mu": 1.0, "radius": "1",
              "start": "chi=0.3,phi=0.0",
              "velocity": "chi=0.4,phi=5.1379664527260553",
              "t_end": None, "rel_tol": 1e-11, "abs_tol": 1e-13,
              "max_step": 0.01, **_COMMON_DEFAULTS},
    "wavefunction": {"dim": 2, "mu": 1.0, "radius": "1",
                     "picture": "coulomb", "n_r": 0, "m": 0, "ell": 0,
                     "m1": 0, "m2": 0, "lam": 0, "L": 0, "J": 0, "T": 0,
                     "M": 0, "t": 0, "nu": None, "grid": 48, "grid2": 12,
                     "quad_order": 64, **_COMMON_DEFAULTS},
    "contract": {"dim": 2, "mu": 1.0, "level": 1, "radii": "10,100,1000",
                 "sample_radii": "0.5,1.0,2.0", **_COMMON_DEFAULTS},
}


def parse_radius(text):
    if isinstance(text, (int, float)):
        return float(text)
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise UsageError("radius must be a number or inf")


def parse_assignments(text, allowed):
    """Parse "name=value,name=value" angle settings."""
    out = {}
    if not text:
        return out
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise UsageError("expected name=value, got %r" % piece)
        name, _, raw = piece.partition("=")
        name = name.strip()
        if name not in allowed:
            raise UsageError(
                "unknown angle %r (allowed: %s)" % (name, ", ".join(allowed)))
        try:
            out[name] = float(raw)
        except ValueError:
            raise UsageError("bad value for %s: %r" % (name, raw))
    return out


def parse_float_list(text, flag):
    try:
        values = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError("%s entries must be numbers" % flag)
    if not values:
        raise UsageError("%s must list at least one value" % flag)
    return values


def load_config_file(path, command):
    try:
        with open(path) as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise UsageError("cannot read config: %s" % exc)
    except json.JSONDecodeError as exc:
        raise UsageError("config is not valid JSON: %s" % exc)
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object with flat keys")
    known = _DEFAULTS[command]
    for key in raw:
        if key not in known:
            raise UsageError("unknown config key %r for %s" % (key, command))
    return raw


def resolve_options(args, command):
    merged = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config, command))
    for key in _DEFAULTS[command]:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            merged[key] = flag_value
    return merged


# ----------------------------------------------------------------- output

def timestamp_value():
    now = datetime.datetime.now(datetime.timezone.utc)
    return now.isoformat()


def jsonable(v):
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, complex):
        return fmt_complex(v)
    if isinstance(v, (bool, int, np.integer)):
        return int(v)
    return float(v)


class Emitter:
    def __init__(self, options):
        self.format = options["format"]
        self.output = options["output"]
        self.timestamp = not options["no_timestamp"]

    def write_table(self, header, rows, footer_lines=(), doc_extra=None,
                    path=None, stream=None):
        target = path if path is not None else self.output
        if self.format == "json":
            doc = {"rows": [
                {key: jsonable(v) for key, v in zip(header, row)}
                for row in rows
            ]}
            if doc_extra:
                doc.update(doc_extra)
            if self.timestamp:
                doc["generated"] = timestamp_value()
            text = json.dumps(doc, indent=2) + "\n"
        else:
            lines = []
            if self.timestamp:
                lines.append("# generated %s" % timestamp_value())
            lines.append(",".join(header))
            for row in rows:
                lines.append(",".join(fmt_value(v) for v in row))
            lines.extend(footer_lines)
            text = "\n".join(lines) + "\n"
        if stream is not None:
            stream.write(text)
        elif target:
            with open(target, "w") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)


def pool_map(jobs, fn, items):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------- spectrum

def cmd_spectrum(options):
    dim = int(options["dim"])
    mu = float(options["mu"])
    R = parse_radius(options["radius"])
    n_max = int(options["n_max"])
    cfg = RunConfig(command="spectrum", dim=dim, mu=mu, R=R,
                    format=options["format"], output_path=options["output"],
                    jobs=int(options["jobs"]), seed=int(options["seed"]),
                    timestamp=not options["no_timestamp"])
    cfg.validate()
    low = 1 if dim == 3 else 0
    if n_max < low:
        raise RangeError("n-max must be at least %d for dim %d" % (low, dim))

    def row(N):
        E = coulomb_energy(dim, N, mu, R)
        if math.isinf(R):
            return (N, E, None, None, None, None)
        p = duality_params(dim, mu, R, N)
        return (N, E, p.calE, p.omega2, p.nu, p.sigma)

    rows = pool_map(cfg.jobs, row, range(low, n_max + 1))
    header = ("N", "E_N", "calE", "omega2", "nu", "sigma")
    Emitter(options).write_table(header, rows)
    return 0


# ------------------------------------------------------------------ check

_KIND_TAGS = {
    MapKind.LC2_FLAT: "lc2_flat",
    MapKind.LC2_SPHERE: "lc2_sphere",
    MapKind.KS3_SPHERE: "ks3_sphere",
    MapKind.HURWITZ5_SPHERE: "hurwitz5_sphere",
    MapKind.LC2_H2C_TO_S2: "lc2_h2c_to_s2",
    MapKind.LC2_HYPERBOLOID_PM: "lc2_hyperboloid_pm",
    MapKind.LC2_ONE_SHEET: "lc2_one_sheet",
}


def random_u_points(kind, rng, n, floor=0.3):
    dim = u_dimension(kind)
    pts = (rng.uniform(-1.0, 1.0, (n, dim))
           + 1j * rng.uniform(-1.0, 1.0, (n, dim)))
    small = np.abs(pts[:, -1]) < floor
    pts[small, -1] += floor * (2.0 + 1j)
    return pts


def identity_check(kind, seed, n, template=None, flip_sign=False):
    rng = np.random.default_rng(seed)
    pts = random_u_points(kind, rng, n)
    if not flip_sign:
        return float(np.max(identity_residual_many(kind, pts, template)))
    # negative control: recompute the identity with one sign flipped, the
    # kind of transcription typo the check suite exists to catch
    worst = 0.0
    for row in pts[: min(n, 32)]:
        s = np.asarray(forward_map(kind, row).coords)
        Q = complex(np.sum(row * row))
        ss = complex(np.sum(s * s)) - 2.0 * s[0] ** 2
        resid = abs(ss - Q * Q) / max(1.0, abs(ss), abs(Q) ** 2)
        worst = max(worst, resid)
    return worst


_CHART_ANGLE_NAMES = {
    MapKind.LC2_SPHERE: ("chi", "phi"),
    MapKind.KS3_SPHERE: ("chi", "beta", "alpha", "gamma"),
    MapKind.HURWITZ5_SPHERE: ("chi", "theta", "beta", "alpha", "gamma",
                              "betaH", "alphaH", "gammaH"),
}

_POLAR_ANGLES = frozenset(("chi", "theta", "beta", "betaH"))


def metric_check(kind, seed, n):
    rng = np.random.default_rng(seed)
    names = _CHART_ANGLE_NAMES[kind]
    worst = 0.0
    for _ in range(min(n, 60)):
        draw = {}
        for name in names:
            if name in _POLAR_ANGLES:
                draw[name] = rng.uniform(0.3, math.pi - 0.3)
            else:
                draw[name] = rng.uniform(0.0, 2.0 * math.pi)
        angles = AngleChart(**draw)
        u = parametrize(kind, angles, 1.0)
        tangents = chart_tangents(kind, angles, 1.0)
        coeff = rng.uniform(-1.0, 1.0, len(names))
        du = sum(c * tangents[nm] for c, nm in zip(coeff, names))
        worst = max(worst, metric_relation_residual(kind, u, du))
    return worst


_LB22_FAMILY = [
    lambda a: np.cos(a.chi) + 0j,
    lambda a: np.sin(a.chi) * np.exp(1j * a.phi),
    lambda a: np.sin(a.chi) ** 2 * np.exp(2j * a.phi),
    lambda a: np.cos(a.chi) ** 2 + 0j,
    lambda a: np.sin(a.chi) * np.cos(a.chi) * np.exp(-1j * a.phi),
]

_LAP3_FAMILY = [
    lambda a: np.cos(a.chi) + 0j,
    lambda a: np.sin(a.chi) * np.cos(a.beta),
    lambda a: np.sin(a.chi) * np.sin(a.beta) * np.exp(1j * a.alpha),
    lambda a: np.cos(a.chi) ** 2 + 0j,
    lambda a: np.sin(2.0 * a.chi) * np.cos(a.beta),
]

_LAP5_FAMILY = [
    lambda a: np.cos(a.chi) + 0j,
    lambda a: np.sin(a.chi) * np.cos(a.theta),
    lambda a: (np.sin(a.chi) * np.sin(a.theta)
               * np.sin(a.beta) * np.exp(1j * a.alpha)),
]

_LAP_POINTS = {
    "LB22": AngleChart(chi=1.0, phi=0.5),
    "LAP3": AngleChart(chi=1.0, beta=0.8, alpha=0.3, gamma=0.6),
    "LAP5": AngleChart(chi=1.0, theta=0.9, beta=0.8, alpha=0.3, gamma=0.6,
                       alphaH=0.4, betaH=1.1, gammaH=0.2),
}


def laplacian_check(pair, family):
    at = _LAP_POINTS[pair]
    worst = 0.0
    for f in family:
        worst = max(worst, laplacian_relation_residual(pair, f, at,
                                                       h=1e-3, order=2))
    return worst


def contour_check():
    worst = 0.0
    for N in range(0, 3):
        sigma = 1.0 / (N + 0.5)
        nu = (N + 0.5) - 1j * sigma  # decaying continuation branch
        for n_r in range(0, 3):
            for m in range(0, 3):
                lhs, rhs = contour_identity_check(n_r, m, nu)
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst


def build_check_tasks(options):
    seed = int(options["seed"])
    n = int(options["points"])
    rel_tol = float(options["rel_tol"])
    inject = bool(options["inject_error"])
    tasks = []
    index = 0
    for kind, tag in _KIND_TAGS.items():
        templates = [None]
        if kind is MapKind.LC2_HYPERBOLOID_PM:
            upper = AmbientPoint(np.array([0.0, 0.0, 1.0 + 0j]),
                                 SpaceSpec(3, 1.0, (1, 1, 1)))
            lower = AmbientPoint(np.array([0.0, 0.0, 1.0 + 0j]),
                                 SpaceSpec(3, 1.0, (-1, -1, 1)))
            templates = [upper, lower]
        for branch, template in enumerate(templates):
            name = "identity" if len(templates) == 1 else (
                "identity_upper" if branch == 0 else "identity_lower")
            flip = inject and index == 0
            tasks.append((name, tag, 1e-12, lambda k=kind, s=seed + index,
                          t=template, fl=flip: identity_check(k, s, n, t,
                                                              fl)))
            index += 1
    for kind in (MapKind.LC2_SPHERE, MapKind.KS3_SPHERE,
                 MapKind.HURWITZ5_SPHERE):
        tasks.append(("metric", _KIND_TAGS[kind], 1e-10,
                      lambda k=kind, s=seed + index: metric_check(k, s, n)))
        index += 1
    tasks.append(("laplacian", "lc2_sphere", 1e-4,
                  lambda: laplacian_check("LB22", _LB22_FAMILY)))
    tasks.append(("laplacian", "ks3_sphere", 1e-4,
                  lambda: laplacian_check("LAP3", _LAP3_FAMILY)))
    tasks.append(("laplacian", "hurwitz5_sphere", 1e-4,
                  lambda: laplacian_check("LAP5", _LAP5_FAMILY)))
    tasks.append(("contour", "lc2_sphere", rel_tol,
                  lambda: contour_check()))
    return tasks


def cmd_check(options):
    cfg = RunConfig(command="check", format=options["format"],
                    output_path=options["output"],
                    quad_order=int(options["quad_order"]),
                    rel_tol=float(options["rel_tol"]),
                    jobs=int(options["jobs"]), seed=int(options["seed"]),
                    timestamp=not options["no_timestamp"],
                    inject_error=bool(options["inject_error"]))
    cfg.validate()
    if int(options["points"]) < 1:
        raise RangeError("points must be positive")
    tasks = build_check_tasks(options)
    token = options["kind"]
    if token:
        token = token.strip().lower()
        tasks = [t for t in tasks if token in t[1]]
        if not tasks:
            raise ParameterError("no checks match kind %r" % options["kind"])

    results = pool_map(cfg.jobs, lambda task: task[3](), tasks)
    rows = []
    all_pass = True
    for (name, tag, threshold, _), residual in zip(tasks, results):
        ok = residual < threshold
        all_pass = all_pass and ok
        rows.append((name, tag, residual, threshold,
                     "pass" if ok else "fail"))
    header = ("check", "kind", "max_residual", "threshold", "status")
    extra = {"status": "pass" if all_pass else "fail"}
    Emitter(options).write_table(header, rows, doc_extra=extra)
    return 0 if all_pass else 2


# ------------------------------------------------------------------ orbit

def sphere_point(dim, values, R):
    chi = values.get("chi", 0.0)
    if dim == 2:
        phi = values.get("phi", 0.0)
        return R * np.array([
            math.sin(chi) * math.cos(phi),
            math.sin(chi) * math.sin(phi),
            math.cos(chi),
        ])
    if dim == 3:
        beta = values.get("beta", 0.0)
        alpha = values.get("alpha", 0.0)
        return R * np.array([
            math.sin(chi) * math.sin(beta) * math.cos(alpha),
            math.sin(chi) * math.sin(beta) * math.sin(alpha),
            math.sin(chi) * math.cos(beta),
            math.cos(chi),
        ])
    theta = values.get("theta", 0.0)
    beta = values.get("beta", 0.0)
    alpha = values.get("alpha", 0.0)
    gamma = values.get("gamma", 0.0)
    z1 = (math.sin(chi) * math.sin(theta) * math.cos(beta / 2.0)
          * np.exp(0.5j * (alpha + gamma)))
    z2 = (math.sin(chi) * math.sin(theta) * math.sin(beta / 2.0)
          * np.exp(0.5j * (alpha - gamma)))
    return R * np.array([z1.real, z1.imag, z2.real, z2.imag,
                         math.sin(chi) * math.cos(theta), math.cos(chi)])


def orbit_initial_state(dim, start, rates, R):
    if not 1e-9 < start.get("chi", 0.0) < math.pi - 1e-9:
        raise PoleError("initial point sits at a pole of the chart; "
                        "choose chi strictly inside (0, pi)")
    s0 = sphere_point(dim, start, R)
    eps = 1e-6
    v = np.zeros_like(s0)
    for name, rate in rates.items():
        if rate == 0.0:
            continue
        plus = dict(start)
        minus = dict(start)
        plus[name] = start.get(name, 0.0) + eps
        minus[name] = start.get(name, 0.0) - eps
        v = v + rate * (sphere_point(dim, plus, R)
                        - sphere_point(dim, minus, R)) / (2.0 * eps)
    # kill the finite-difference radial leak
    v = v - (np.dot(v, s0) / np.dot(s0, s0)) * s0
    return ClassicalState(position=s0, velocity=v)


def orbit_summary_rows(result):
    direct = result["direct"]
    mapped = result["mapped"]
    deviation = result["deviation"]
    return [
        ("energy", result["energy"]),
        ("deviation", deviation),
        ("direct_energy_drift", direct.energy_drift),
        ("direct_constraint_drift", direct.constraint_drift),
        ("direct_steps", direct.steps_taken),
        ("direct_underflow", int(direct.underflow)),
        ("mapped_energy_drift", mapped.energy_drift),
        ("mapped_constraint_drift", mapped.constraint_drift),
        ("mapped_steps", mapped.steps_taken),
        ("mapped_underflow", int(mapped.underflow)),
    ]


def trajectory_rows(record):
    first = record.samples[0][1]
    names = ["s%d" % (i + 1) for i in range(first.position.size)]
    header = ["t"] + names + ["energy_residual", "constraint_residual"]
    rows = []
    for i, (t, state) in enumerate(record.samples):
        if i < len(record.sample_residuals):
            e_res, c_res = record.sample_residuals[i]
        else:
            e_res, c_res = 0.0, 0.0
        rows.append([t] + list(state.position) + [e_res, c_res])
    return header, rows


def cmd_orbit(options):
    dim = int(options["dim"])
    mu = float(options["mu"])
    R = parse_radius(options["radius"])
    cfg = RunConfig(command="orbit", dim=dim, mu=mu, R=R,
                    format=options["format"], output_path=options["output"],
                    timestamp=not options["no_timestamp"])
    cfg.validate()
    if math.isinf(R):
        raise RangeError("orbit runs need a finite radius")
    names = _ORBIT_ANGLES[dim]
    start = parse_assignments(options["start"], names)
    rates = parse_assignments(options["velocity"], names)
    config = IntegratorConfig(rel_tol=float(options["rel_tol"]),
                              abs_tol=float(options["abs_tol"]),
                              max_step=float(options["max_step"]))
    state0 = orbit_initial_state(dim, start, rates, R)
    E = energy(state0, mu, R)
    t_end = options["t_end"]
    if t_end is None:
        t_end = radial_period(dim, R, mu, state0, config)
    t_end = float(t_end)
    if t_end <= 0.0:
        raise RangeError("t-end must be positive")

    direct = integrate_direct(dim, R, mu, state0, t_end, config)
    if direct.underflow:
        kind = _KIND_BY_DIM[dim]
        reg0 = regularized_initial(kind, state0, math.sqrt(R))
        mapped = integrate_regularized_physical(kind, E, mu, math.sqrt(R),
                                                reg0, t_end, config)
        result = {"kind": kind, "energy": E, "deviation": math.nan,
                  "direct": direct, "mapped": mapped}
    else:
        result = duality_compare(dim, mu, R, state0, t_end, config)
        direct = result["direct"]
        mapped = result["mapped"]

    emitter = Emitter(options)
    summary = orbit_summary_rows(result)
    if options["format"] == "json":
        hd, rd = trajectory_rows(result["direct"])
        hm, rm = trajectory_rows(result["mapped"])
        doc = {
            "direct": [dict(zip(hd, map(jsonable, row))) for row in rd],
            "mapped": [dict(zip(hm, map(jsonable, row))) for row in rm],
            "summary": {k: jsonable(v) for k, v in summary},
        }
        if emitter.timestamp:
            doc["generated"] = timestamp_value()
        text = json.dumps(doc, indent=2) + "\n"
        if options["output"]:
            with open(options["output"], "w") as handle:
                handle.write(text)
        else:
            sys.stdout.write(text)
        return 0

    stamp = (["# generated %s" % timestamp_value()]
             if emitter.timestamp else [])

    def csv_text(record):
        hdr, rows = trajectory_rows(record)
        lines = list(stamp)
        lines.append(",".join(hdr))
        for row in rows:
            lines.append(",".join(fmt_value(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    summary_lines = list(stamp) + ["quantity,value"] + [
        "%s,%s" % (k, fmt_value(v)) for k, v in summary]
    if options["output"]:
        base, dot, ext = options["output"].rpartition(".")
        if not dot:
            base, ext = options["output"], "csv"
        with open("%s_direct.%s" % (base, ext), "w") as handle:
            handle.write(csv_text(result["direct"]))
        with open("%s_mapped.%s" % (base, ext), "w") as handle:
            handle.write(csv_text(result["mapped"]))
        sys.stdout.write("\n".join(summary_lines) + "\n")
    else:
        sys.stdout.write("# direct\n" + csv_text(result["direct"]))
        sys.stdout.write("# mapped\n" + csv_text(result["mapped"]))
        sys.stdout.write("\n".join(summary_lines) + "\n")
    return 0


# ----------------------------------------------------------- wavefunction

def build_quantum_numbers(dim, options):
    if dim == 2:
        return QuantumNumbers(dim=2, n_r=int(options["n_r"]),
                              m=int(options["m"]))
    if dim == 3:
        return QuantumNumbers(dim=3, n_r=int(options["n_r"]),
                              ell=int(options["ell"]), m1=int(options["m1"]),
                              m2=int(options["m2"]))
    return QuantumNumbers(dim=5, n_r=int(options["n_r"]),
                          lam=int(options["lam"]), L=int(options["L"]),
                          J=int(options["J"]), T=int(options["T"]),
                          M=int(options["M"]), m=int(options["m"]),
                          t=int(options["t"]))


_SECONDARY_ANGLE = {2: "phi", 3: "beta", 5: "theta"}


def coulomb_norm_quadrature(dim, q, params, order):
    """Full-sphere norm; azimuthal phases drop from the modulus."""
    rc = gauss_legendre(order, 0.0, math.pi)
    R = params.R
    if dim == 2:
        vals = coulomb_wavefunction(2, q, params, AngleChart(chi=rc.nodes))
        return (R * R * 2.0 * math.pi
                * float(np.sum(rc.weights * np.abs(vals) ** 2
                               * np.sin(rc.nodes))))
    rb = gauss_legendre(max(order // 4, 16), 0.0, math.pi)
    if dim == 3:
        total = 0.0
        for wb, b in zip(rb.weights, rb.nodes):
            vals = coulomb_wavefunction(
                3, q, params, AngleChart(chi=rc.nodes, beta=b))
            total += wb * math.sin(b) * float(
                np.sum(rc.weights * np.abs(vals) ** 2
                       * np.sin(rc.nodes) ** 2))
        return R ** 3 * 2.0 * math.pi * total
    rt = gauss_legendre(max(order // 4, 16), 0.0, math.pi)
    total = 0.0
    for wt, th in zip(rt.weights, rt.nodes):
        for wb, b in zip(rb.weights, rb.nodes):
            vals = coulomb_wavefunction(
                5, q, params, AngleChart(chi=rc.nodes, theta=th, beta=b))
            total += wt * wb * math.sin(th) ** 3 * math.sin(b) * float(
                np.sum(rc.weights * np.abs(vals) ** 2
                       * np.sin(rc.nodes) ** 4))
    return R ** 5 * math.pi ** 2 * total


def cmd_wavefunction(options):
    dim = int(options["dim"])
    mu = float(options["mu"])
    R = parse_radius(options["radius"])
    picture = options["picture"]
    cfg = RunConfig(command="wavefunction", dim=dim, mu=mu, R=R,
                    format=options["format"], output_path=options["output"],
                    quad_order=int(options["quad_order"]),
                    timestamp=not options["no_timestamp"])
    cfg.validate()
    if picture not in ("coulomb", "oscillator"):
        raise ParameterError("picture must be coulomb or oscillator")
    if math.isinf(R):
        raise RangeError("wavefunction grids need a finite radius")
    grid = int(options["grid"])
    grid2 = int(options["grid2"])
    if grid < 4 or grid2 < 1:
        raise RangeError("grid sizes are too small")

    q = build_quantum_numbers(dim, options)
    secondary = _SECONDARY_ANGLE[dim]
    if picture == "coulomb":
        q = reduce_to_coulomb(dim, q)
        params = duality_params(dim, mu, R, q.N)

        def evaluate(chi, sec):
            return coulomb_wavefunction(
                dim, q, params, AngleChart(**{"chi": chi, secondary: sec}))

        chi_max = math.pi
        norm = coulomb_norm_quadrature(dim, q, params, cfg.quad_order)
        first_axis = "chi"
    else:
        if options["nu"] is not None:
            try:
                nu = complex(str(options["nu"]))
            except ValueError:
                raise ParameterError("nu must parse as a complex number")
        else:
            reduced = reduce_to_coulomb(dim, q)
            nu = duality_params(dim, mu, R, reduced.N).nu
        D = math.sqrt(R)

        def evaluate(vt, sec):
            return oscillator_wavefunction(
                dim, q, nu, AngleChart(**{"vartheta": vt, secondary: sec}),
                D)

        chi_max = math.pi / 2.0
        f = oscillator_chart_function(dim, q, nu, D)
        # skip the norm when the tensor grid would be unreasonably large
        n_axes = max(len(f.depends_on), 1)
        if cfg.quad_order ** n_axes <= 5_000_000:
            norm = diamond_inner_product(dim, f, f, order=cfg.quad_order,
                                         D=D)
        else:
            norm = None
        first_axis = "vartheta"

    sec_max = 2.0 * math.pi if dim == 2 else math.pi
    rows = []
    for k in range(grid):
        chi = (k + 0.5) * chi_max / grid
        for j in range(grid2):
            sec = ((j + 0.5) * sec_max / grid2 if dim != 2
                   else j * sec_max / grid2)
            value = complex(evaluate(chi, sec))
            rows.append((chi, sec, value.real, value.imag,
                         abs(value) ** 2))
    header = (first_axis, secondary, "re", "im", "abs2")
    Emitter(options).write_table(
        header, rows, footer_lines=["norm,%s" % fmt_value(norm)],
        doc_extra={"norm": jsonable(norm)})
    return 0


# --------------------------------------------------------------- contract

def cmd_contract(options):
    dim = int(options["dim"])
    mu = float(options["mu"])
    level = int(options["level"])
    cfg = RunConfig(command="contract", dim=dim, mu=mu,
                    format=options["format"], output_path=options["output"],
                    jobs=int(options["jobs"]),
                    timestamp=not options["no_timestamp"])
    cfg.validate()
    if dim not in (2, 5):
        raise RangeError("the contraction sweep covers dims 2 and 5")
    if level < 0:
        raise RangeError("level must be non-negative")
    radii = parse_float_list(options["radii"], "--radii")
    samples = parse_float_list(options["sample_radii"], "--sample-radii")
    if any(r <= 0 for r in radii):
        raise RangeError("radii must be positive")
    if any(r <= 0 for r in samples):
        raise RangeError("sample radii must be positive")
    if max(samples) >= math.pi * min(radii):
        raise RangeError("sample radii must stay inside the sphere charts")

    if dim == 2:
        q = reduce_to_coulomb(2, QuantumNumbers(dim=2, n_r=level, m=0))
    else:
        q = reduce_to_coulomb(5, QuantumNumbers(dim=5, n_r=level, lam=0,
                                                L=0, J=0))
    E_flat = coulomb_energy(dim, level, mu, math.inf)

    def row(R):
        params = duality_params(dim, mu, R, level)
        sup_err = 0.0
        for r in samples:
            vs = coulomb_wavefunction(dim, q, params,
                                      AngleChart(chi=r / R))
            vf = flat_limit_wavefunction(dim, q, mu, r, AngleChart())
            sup_err = max(sup_err, abs(complex(vs) - complex(vf)))
        return (R, coulomb_energy(dim, level, mu, R), E_flat, sup_err)

    rows = pool_map(cfg.jobs, row, radii)
    header = ("R", "E_N", "E_flat", "sup_error")
    Emitter(options).write_table(header, rows)
    return 0


# ------------------------------------------------------------- arg parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(sub):
    sub.add_argument("--format", choices=["csv", "json"], default=None)
    sub.add_argument("--output", default=None, metavar="PATH")
    sub.add_argument("--jobs", type=int, default=None, metavar="N")
    sub.add_argument("--seed", type=int, default=None, metavar="S")
    sub.add_argument("--no-timestamp", dest="no_timestamp",
                     action="store_const", const=True, default=None)
    sub.add_argument("--config", default=None, metavar="PATH")
    sub.add_argument("--inject-error", dest="inject_error",
                     action="store_const", const=True, default=None,
                     help=argparse.SUPPRESS)


def build_parser():
    parser = _Parser(
        prog="ksphere",
        description="Spectra, wavefunctions, identity checks, orbit runs, "
                    "and contraction sweeps for the sphere dualities.")
    commands = parser.add_subparsers(dest="command", required=True)

    sp = commands.add_parser("spectrum", help="dual spectrum table")
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--radius", default=None)
    sp.add_argument("--n-max", dest="n_max", type=int, default=None)
    _add_common(sp)

    ck = commands.add_parser("check", help="residual check suite")
    ck.add_argument("--kind", default=None)
    ck.add_argument("--quad-order", dest="quad_order", type=int,
                    default=None)
    ck.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    ck.add_argument("--points", type=int, default=None)
    _add_common(ck)

    ob = commands.add_parser("orbit", help="direct vs regularized orbit")
    ob.add_argument("--dim", type=int, default=None)
    ob.add_argument("--mu", type=float, default=None)
    ob.add_argument("--radius", default=None)
    ob.add_argument("--start", default=None,
                    metavar="chi=0.3,phi=0.0")
    ob.add_argument("--velocity", default=None,
                    metavar="chi=0.4,phi=0.9")
    ob.add_argument("--t-end", dest="t_end", type=float, default=None)
    ob.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    ob.add_argument("--abs-tol", dest="abs_tol", type=float, default=None)
    ob.add_argument("--max-step", dest="max_step", type=float, default=None)
    _add_common(ob)

    wf = commands.add_parser("wavefunction", help="sampled wavefunction")
    wf.add_argument("--dim", type=int, default=None)
    wf.add_argument("--mu", type=float, default=None)
    wf.add_argument("--radius", default=None)
    wf.add_argument("--picture", choices=["coulomb", "oscillator"],
                    default=None)
    wf.add_argument("--n-r", dest="n_r", type=int, default=None)
    wf.add_argument("--m", type=int, default=None)
    wf.add_argument("--ell", type=int, default=None)
    wf.add_argument("--m1", type=int, default=None)
    wf.add_argument("--m2", type=int, default=None)
    wf.add_argument("--lam", type=int, default=None)
    wf.add_argument("--L", type=int, default=None)
    wf.add_argument("--J", type=int, default=None)
    wf.add_argument("--T", type=int, default=None)
    wf.add_argument("--M", type=int, default=None)
    wf.add_argument("--t", type=int, default=None)
    wf.add_argument("--nu", default=None)
    wf.add_argument("--grid", type=int, default=None)
    wf.add_argument("--grid2", type=int, default=None)
    wf.add_argument("--quad-order", dest="quad_order", type=int,
                    default=None)
    _add_common(wf)

    ct = commands.add_parser("contract", help="flat-limit sweep")
    ct.add_argument("--dim", type=int, default=None)
    ct.add_argument("--mu", type=float, default=None)
    ct.add_argument("--level", type=int, default=None)
    ct.add_argument("--radii", default=None)
    ct.add_argument("--sample-radii", dest="sample_radii", default=None)
    _add_common(ct)
    return parser


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "check": cmd_check,
    "orbit": cmd_orbit,
    "wavefunction": cmd_wavefunction,
    "contract": cmd_contract,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        options = resolve_options(args, args.command)
        return _COMMANDS[args.command](options)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except KsphereError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
