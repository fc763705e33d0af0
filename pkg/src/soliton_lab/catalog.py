"""Factory for the manifolds and immersions the verification suite uses.

Every entry carries its chart (with singular loci such as poles and cone
apexes outside the box), a metric, a potential field, and the verdicts the
suite is expected to reproduce.  Targets are addressed by strings such as
``hypercylinder?k=2&n=3``; see :func:`resolve`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from urllib.parse import unquote

import numpy as np

from . import geometry as geo
from .charts import DEFAULT_MARGIN, Chart
from .exprlang import ExprError, Tape, parse, unparse
from .submanifold import Immersion, InducedMetric, TangentialField

COLAT = (0.15, math.pi - 0.15)
AZIMUTH = (-3.0, 3.0)
FLAT_BOX = (-2.0, 2.0)
RATIO_TOL = 1e-10
CURVE_TOL = 1e-8


class CatalogError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    family: str
    kind: str                       # "metric", "immersion" or "warped"
    params: dict
    chart: Chart
    metric: geo.MetricField
    potential: geo.VectorField | None
    description: str
    immersion: Immersion | None = None
    warping: object | None = None   # Expr in s, warped products only
    fiber: "CatalogEntry | None" = None
    lam: float | None = None        # None: recorded from the least-squares fit
    concurrent: bool = False        # potential is a concurrent field
    expected: dict = field(default_factory=dict)
    margin: float = DEFAULT_MARGIN
    inverse: object | None = None   # ambient point -> chart coordinates

    @property
    def dim(self):
        return self.chart.dim

    def sample(self, count, seed=0):
        return self.chart.sample(count, seed, self.margin)


def _lit(x):
    return repr(float(x))


# --- round spheres -----------------------------------------------------------

def sphere_names(k, prefix="t"):
    return [f"{prefix}{i + 1}" for i in range(k)]


def sphere_box(names):
    k = len(names)
    return [(nm, *(COLAT if i < k - 1 else AZIMUTH)) for i, nm in enumerate(names)]


def sphere_components(names, r):
    """Hyperspherical embedding of ``S^k(r)`` into ``E^{k+1}`` as sources."""
    k = len(names)
    out = []
    prefix = []
    for i, nm in enumerate(names):
        head = "*".join([_lit(r)] + prefix)
        out.append(f"{head}*cos({nm})")
        prefix.append(f"sin({nm})")
    out.append("*".join([_lit(r)] + prefix))
    # the last coordinate uses sin of the azimuth, already in prefix
    assert len(out) == k + 1
    return out


def sphere_metric_diagonal(names, r):
    entries = []
    for i in range(len(names)):
        factors = [f"{_lit(r)}^2"] + [f"sin({names[j]})^2" for j in range(i)]
        entries.append("*".join(factors))
    return entries


def sphere_inverse(y, r):
    """Chart coordinates of points ``y`` (``(..., k+1)``) on ``S^k(r)``."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    k = y.shape[-1] - 1
    ang = np.empty(y.shape[:-1] + (k,))
    rest = np.full(y.shape[:-1], float(r))
    for i in range(k - 1):
        ang[..., i] = np.arccos(np.clip(y[..., i] / rest, -1.0, 1.0))
        rest = rest * np.sin(ang[..., i])
    ang[..., k - 1] = np.arctan2(y[..., k], y[..., k - 1])
    return ang


def make_round_sphere(k, r=1.0):
    """Intrinsic round metric on ``S^k(r)`` in an angular chart."""
    if k < 1:
        raise CatalogError(f"sphere dimension must be at least 1, got {k}")
    if not r > 0:
        raise CatalogError(f"sphere radius must be positive, got {r}")
    names = sphere_names(k)
    chart = Chart.box(sphere_box(names))
    metric = geo.ExprMetric.diagonal(sphere_metric_diagonal(names, r), names, chart)
    lam = (k - 1) / r ** 2
    return CatalogEntry(
        name=f"sphere-metric?k={k}&r={_fmt(r)}", family="sphere-metric", kind="metric",
        params={"k": k, "r": r}, chart=chart, metric=metric, potential=None,
        description=f"round metric on S^{k}({_fmt(r)})",
        expected={"einstein_constant": lam},
    )


def _fmt(x):
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


# --- flat and conical -------------------------------------------------------

def make_euclidean(n=2):
    """Euclidean ``n``-space with its position field."""
    if n < 1:
        raise CatalogError(f"dimension must be at least 1, got {n}")
    names = [f"x{i + 1}" for i in range(n)]
    chart = Chart.box([(nm, *FLAT_BOX) for nm in names])
    metric = geo.ExprMetric.diagonal(["1"] * n, names, chart)
    potential = geo.ExprVectorField(names, names)
    return CatalogEntry(
        name=f"euclidean?n={n}", family="euclidean", kind="metric", params={"n": n},
        chart=chart, metric=metric, potential=potential, lam=1.0, concurrent=True,
        description=f"E^{n} with the position field",
        expected={"shrinking": True, "trivial": True, "gradient": True, "soliton": True},
    )


def make_plane(n=2, m=3):
    """Coordinate ``n``-plane through the origin of ``E^m``: minimal, flat."""
    if not 1 <= n <= m:
        raise CatalogError(f"need 1 <= n <= m, got n={n}, m={m}")
    names = [f"x{i + 1}" for i in range(n)]
    chart = Chart.box([(nm, *FLAT_BOX) for nm in names])
    imm = Immersion(names + ["0"] * (m - n), names, chart)
    return _immersion_entry(
        f"plane?n={n}&m={m}", "plane", {"n": n, "m": m}, imm, lam=1.0, concurrent=True,
        description=f"plane E^{n} through the origin of E^{m}",
        expected={"shrinking": True, "trivial": True, "gradient": True, "soliton": True,
                  "minimal": True, "umbilical": True},
    )


def _immersion_entry(name, family, params, imm, description, lam=None, concurrent=False,
                     expected=None, inverse=None):
    return CatalogEntry(
        name=name, family=family, kind="immersion", params=params, chart=imm.chart,
        metric=InducedMetric(imm), potential=TangentialField(imm), immersion=imm,
        description=description, lam=lam, concurrent=concurrent,
        expected=dict(expected or {}), inverse=inverse,
    )


def check_unit_speed_spherical(curve, samples=33, interval=AZIMUTH):
    """Raise unless the curve lies on the unit sphere with unit speed."""
    s = np.linspace(interval[0], interval[1], samples)[:, None]
    out = Tape(curve, 1).evaluate(s)
    val, vel = out[..., 0], out[..., 1]
    rad = np.abs(np.linalg.norm(val, axis=-1) - 1.0)
    speed = np.abs(np.linalg.norm(vel, axis=-1) - 1.0)
    if rad.max() > CURVE_TOL:
        raise CatalogError(f"curve leaves the unit sphere (| |gamma| - 1 | = {rad.max():.3g})")
    if speed.max() > CURVE_TOL:
        raise CatalogError(f"curve is not unit speed (| |gamma'| - 1 | = {speed.max():.3g})")


def make_cone_over_curve(curve=("cos(s)", "sin(s)"), n=2, m=None):
    """Cone ``(s, x2, ..., xn) -> (gamma(s) x2, x2, x3, ..., xn)`` in ``E^m``.

    ``gamma`` is a unit-speed curve on the unit sphere of ``E^{m-n+1}``
    given by expressions in ``s``.  The chart keeps ``x2`` away from zero.
    """
    curve = [c if not isinstance(c, str) else parse(c, ["s"]) for c in curve]
    if m is None:
        m = len(curve) + n - 1
    if n < 2:
        raise CatalogError(f"cone needs n >= 2, got {n}")
    if len(curve) != m - n + 1:
        raise CatalogError(f"curve must have m - n + 1 = {m - n + 1} components, got {len(curve)}")
    check_unit_speed_spherical(curve)
    names = ["s"] + [f"x{i}" for i in range(2, n + 1)]
    comps = [f"({unparse(c)})*x2" for c in curve] + names[1:]
    box = [("s", *AZIMUTH), ("x2", 0.5, 2.0)] + [(nm, *FLAT_BOX) for nm in names[2:]]
    imm = Immersion(comps, names, Chart.box(box))
    curve_txt = ",".join(unparse(c) for c in curve)
    return _immersion_entry(
        f"cone?n={n}&m={m}&curve={curve_txt}", "cone", {"n": n, "m": m, "curve": curve_txt},
        imm, lam=1.0, concurrent=True,
        description=f"cone over a unit-speed spherical curve, M^{n} in E^{m}",
        expected={"shrinking": True, "trivial": True, "gradient": True, "soliton": True,
                  "flat": True, "tangent_position": True, "umbilical": True},
    )


def make_spherical_hypercylinder(k=2, n=3, chart=1):
    """``S^k(sqrt(k-1)) x E^{n-k}`` in ``E^{n+1}``.

    ``chart=2`` selects a second angular chart whose poles sit on a
    different axis, for overlap comparisons.
    """
    if not 2 <= k <= n - 1:
        raise CatalogError(f"hypercylinder needs 2 <= k <= n - 1, got k={k}, n={n}"
                           + (" (k = 1 gives radius 0)" if k == 1 else ""))
    if chart not in (1, 2):
        raise CatalogError(f"hypercylinder chart must be 1 or 2, got {chart}")
    r = math.sqrt(k - 1)
    names = sphere_names(k)
    flat = [f"z{i + 1}" for i in range(n - k)]
    sph = sphere_components(names, r)
    if chart == 2:
        sph = sph[1:] + sph[:1]
    box = sphere_box(names) + [(nm, *FLAT_BOX) for nm in flat]
    imm = Immersion(sph + flat, names + flat, Chart.box(box))

    def inverse(x, chart=chart, k=k, r=r):
        x = np.atleast_2d(x)
        y = x[..., :k + 1]
        if chart == 2:
            y = np.roll(y, 1, axis=-1)
        return np.concatenate([sphere_inverse(y, r), x[..., k + 1:]], axis=-1)

    suffix = "" if chart == 1 else "&chart=2"
    return _immersion_entry(
        f"hypercylinder?k={k}&n={n}{suffix}", "hypercylinder", {"k": k, "n": n, "chart": chart},
        imm, lam=1.0, inverse=inverse,
        description=f"spherical hypercylinder S^{k}(sqrt({k - 1})) x E^{n - k} in E^{n + 1}",
        expected={"shrinking": True, "trivial": False, "gradient": True, "soliton": True,
                  "umbilical": False, "principal_multiplicities": {"0": n - k, "c": k}},
    )


def make_product_of_spheres(dims=(2, 2), radii=(1.0, 1.0)):
    """``S^{n1}(r1) x ... x S^{np}(rp)`` in ``E^{n+p}``, standard embedding."""
    dims = tuple(int(d) for d in dims)
    radii = tuple(float(r) for r in radii)
    if len(dims) != len(radii) or not dims:
        raise CatalogError("sphere product needs matching, nonempty dims and radii")
    if any(d < 2 for d in dims):
        raise CatalogError(f"every factor dimension must be at least 2, got {dims}")
    if any(not r > 0 for r in radii):
        raise CatalogError(f"radii must be positive, got {radii}")
    ratios = [(d - 1) / r ** 2 for d, r in zip(dims, radii)]
    if max(ratios) - min(ratios) > RATIO_TOL * max(1.0, max(ratios)):
        raise CatalogError(f"(n_i - 1)/r_i^2 must agree across factors, got {ratios}")
    names, comps, box = [], [], []
    for f, (d, r) in enumerate(zip(dims, radii)):
        nm = sphere_names(d, prefix=f"t{f + 1}_")
        names += nm
        comps += sphere_components(nm, r)
        box += sphere_box(nm)
    imm = Immersion(comps, names, Chart.box(box))
    label = ",".join(str(d) for d in dims)
    rlabel = ",".join(_fmt(r) for r in radii)
    return _immersion_entry(
        f"sphere-product?dims={label}&radii={rlabel}", "sphere-product",
        {"dims": list(dims), "radii": list(radii)}, imm, lam=ratios[0],
        description="product of spheres " + " x ".join(
            f"S^{d}({_fmt(r)})" for d, r in zip(dims, radii)),
        expected={"shrinking": True, "trivial": True, "gradient": True, "soliton": True},
    )


def make_hypersphere(n=2, r=1.0):
    """``S^n(r)`` in ``E^{n+1}``; the soliton constant comes from the fit."""
    if not r > 0:
        raise CatalogError(f"radius must be positive, got {r}")
    if n < 1:
        raise CatalogError(f"dimension must be at least 1, got {n}")
    names = sphere_names(n)
    imm = Immersion(sphere_components(names, r), names, Chart.box(sphere_box(names)))
    return _immersion_entry(
        f"hypersphere?n={n}&r={_fmt(r)}", "hypersphere", {"n": n, "r": float(r)}, imm,
        lam=None, inverse=lambda x, r=r: sphere_inverse(x, r),
        description=f"round hypersphere S^{n}({_fmt(r)}) in E^{n + 1}",
        expected={"shrinking": n > 1, "trivial": True, "gradient": True, "soliton": True,
                  "umbilical": True},
    )


def make_warped_product(f="s", fiber=None, s_interval=(0.5, 3.0)):
    """``I x_f F`` with metric ``ds^2 + f(s)^2 g_F`` and field ``s d/ds``.

    ``fiber`` is an intrinsic entry (default: the unit 2-sphere).
    """
    if fiber is None:
        fiber = make_round_sphere(2, 1.0)
    if fiber.kind != "metric":
        raise CatalogError("warped product fiber must be an intrinsic metric entry")
    fexpr = parse(f, ["s"]) if isinstance(f, str) else f
    grid = np.linspace(s_interval[0], s_interval[1], 513)[:, None]
    try:
        fval = Tape([fexpr], 1).values(grid)[:, 0]
    except ExprError as err:
        raise CatalogError(f"warping function undefined on the interval: {err}") from None
    if np.any(fval <= 0):
        bad = float(grid[np.flatnonzero(fval <= 0)[0], 0])
        raise CatalogError(f"warping function must be positive on {s_interval}; f({bad:g}) <= 0")
    fnames = list(fiber.chart.names)
    if "s" in fnames:
        raise CatalogError("fiber coordinates may not be named 's'")
    names = ["s"] + fnames
    ftxt = unparse(fexpr)
    comps = [[parse("0", names) for _ in names] for _ in names]
    comps[0][0] = parse("1", names)
    for a in range(len(fnames)):
        for b in range(len(fnames)):
            gf = unparse(fiber.metric.components[a][b])
            comps[a + 1][b + 1] = parse(f"({ftxt})^2*({gf})", names)
    box = [("s", *s_interval)] + list(zip(fnames, fiber.chart.lo, fiber.chart.hi))
    chart = Chart.box(box)
    metric = geo.ExprMetric(comps, names, chart)
    potential = geo.ExprVectorField(["s"] + ["0"] * len(fnames), names)
    concurrent = bool(np.max(np.abs(fval - grid[:, 0])) <= 1e-12)
    n = len(names)
    lam = 1.0 if concurrent else None
    fiber_ok = abs(fiber.expected.get("einstein_constant", math.nan) - (n - 2)) <= 1e-12
    return CatalogEntry(
        name=f"warped?f={ftxt}&fiber={fiber.name}", family="warped", kind="warped",
        params={"f": ftxt, "fiber": fiber.name, "s_interval": list(s_interval)},
        chart=chart, metric=metric, potential=potential, warping=fexpr, fiber=fiber,
        lam=lam, concurrent=concurrent,
        description=f"warped product I x_f F with f(s) = {ftxt}, F = {fiber.description}",
        expected={"shrinking": True, "trivial": True, "gradient": True,
                  "soliton": concurrent and fiber_ok} if concurrent else {},
    )


# --- target strings -----------------------------------------------------------

FAMILIES = {
    "euclidean": "Euclidean space with its position field",
    "plane": "coordinate plane through the origin (minimal)",
    "cone": "cone generated by lines through the origin over a spherical curve",
    "hypercylinder": "spherical hypercylinder S^k(sqrt(k-1)) x E^(n-k)",
    "sphere-product": "product of spheres with equal (n_i - 1)/r_i^2",
    "warped": "warped product ds^2 + f(s)^2 g_F with the field s d/ds",
    "hypersphere": "round hypersphere S^n(r)",
    "sphere-metric": "intrinsic round metric on S^k(r) (warped-product fiber)",
}


def parse_target(target):
    """Split ``family?key=value&...`` (values are percent-decoded, ``+``
    is kept literally)."""
    family, _, query = target.partition("?")
    params = {}
    if query:
        for item in query.split("&"):
            if not item:
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise CatalogError(f"malformed parameter {item!r} in target {target!r}")
            params[unquote(key)] = unquote(value)
    return family, params


def _int(params, key, default):
    try:
        return int(params.pop(key, default))
    except ValueError:
        raise CatalogError(f"parameter {key} must be an integer") from None


def _float(params, key, default):
    try:
        return float(params.pop(key, default))
    except ValueError:
        raise CatalogError(f"parameter {key} must be a number") from None


def _floats(text):
    out = []
    for part in str(text).split(","):
        part = part.strip()
        try:
            if part.startswith("sqrt(") and part.endswith(")"):
                out.append(math.sqrt(float(part[5:-1])))
            else:
                out.append(float(part))
        except ValueError:
            raise CatalogError(f"bad radius {part!r}; use a number or sqrt(x)") from None
    return out


def resolve(target) -> CatalogEntry:
    """Build the catalog entry named by a target string."""
    family, params = parse_target(target)
    if family == "euclidean":
        entry = make_euclidean(_int(params, "n", 2))
    elif family == "plane":
        entry = make_plane(_int(params, "n", 2), _int(params, "m", 3))
    elif family == "cone":
        n = _int(params, "n", 2)
        curve = params.pop("curve", None)
        m = params.pop("m", None)
        if curve is None:
            try:
                m = n + 1 if m is None else int(m)
            except ValueError:
                raise CatalogError("parameter m must be an integer") from None
            k = m - n + 1
            if k < 2:
                raise CatalogError(f"cone needs m >= n + 1, got n={n}, m={m}")
            curve = ["cos(s)", "sin(s)"] + ["0"] * (k - 2)
        else:
            curve = curve.split(",")
            try:
                m = None if m is None else int(m)
            except ValueError:
                raise CatalogError("parameter m must be an integer") from None
        entry = make_cone_over_curve(curve, n, m)
    elif family == "hypercylinder":
        entry = make_spherical_hypercylinder(_int(params, "k", 2), _int(params, "n", 3),
                                             _int(params, "chart", 1))
    elif family == "sphere-product":
        try:
            dims = [int(d) for d in params.pop("dims", "2,2").split(",")]
        except ValueError:
            raise CatalogError("parameter dims must be a comma-separated list of integers") from None
        radii = _floats(params.pop("radii", ",".join(["1"] * len(dims))))
        entry = make_product_of_spheres(dims, radii)
    elif family == "sphere-metric":
        entry = make_round_sphere(_int(params, "k", 2), _float(params, "r", 1.0))
    elif family == "hypersphere":
        entry = make_hypersphere(_int(params, "n", 2), _float(params, "r", 1.0))
    elif family == "warped":
        f = params.pop("f", "s")
        fiber = params.pop("fiber", None)
        n = _int(params, "n", 3)
        fiber_r = _float(params, "fiber_r", 1.0)
        lo = _float(params, "s_lo", 0.5)
        hi = _float(params, "s_hi", 3.0)
        if fiber is None:
            fib = make_round_sphere(n - 1, fiber_r)
        else:
            ffam, fparams = parse_target(fiber)
            if ffam != "sphere-metric":
                raise CatalogError(f"unsupported fiber {fiber!r}")
            fib = make_round_sphere(_int(fparams, "k", n - 1), _float(fparams, "r", 1.0))
        entry = make_warped_product(f, fib, (lo, hi))
    else:
        raise CatalogError(f"unknown catalog target {family!r}; known: {', '.join(FAMILIES)}")
    if params:
        raise CatalogError(f"unknown parameters for {family}: {', '.join(sorted(params))}")
    return entry


# The suite's fixed target list: every shipped instance, in report order.
SUITE_TARGETS = (
    "euclidean?n=2",
    "euclidean?n=3",
    "plane?n=2&m=3",
    "cone?n=2&m=3",
    "cone?n=2&m=4",
    "cone?n=3&m=4",
    "hypercylinder?k=2&n=3",
    "hypercylinder?k=2&n=4",
    "hypercylinder?k=3&n=4",
    "sphere-product?dims=2,2&radii=1,1",
    "sphere-product?dims=3,2&radii=sqrt(2),1",
    "warped?n=3",
    "warped?n=4",
    "hypersphere?n=2&r=1",
    "hypersphere?n=3&r=2",
)
