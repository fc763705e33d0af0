"""Check runner behind the command line: builds per-target reports and the
suite aggregate.

Reports are plain dicts ready for JSON; their content is a deterministic
function of target, seed, sample count, tolerances and package version.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import fdoracle
from . import geometry as geo
from . import soliton as sol
from . import submanifold as sub
from .catalog import SUITE_TARGETS, make_round_sphere, make_spherical_hypercylinder
from .catalog import make_warped_product, resolve
from .charts import SAMPLER

JET = 1e-8      # identities computed exactly by jets
FD1 = 1e-6      # one finite-difference layer
FD2 = 1e-4      # two layers
FD_REL = 1e-5   # relative agreement with the finite-difference oracle
LOWER = 0.1     # lower bound for data that must fail to be solitons
CONTROL = 0.05  # lower bound for perturbed controls
FD_POINTS = 8   # points used by the oracle comparison

REFS = {
    "soliton_equation": "1/2 L_xi g + Ric = lambda g",
    "concurrency": "nabla_Z v = Z for every tangent Z",
    "ricci_shift": "concurrent potential: Ric = (lambda - 1) g",
    "gradient_potential": "xi = grad phi with phi = 1/2 g(xi, xi)",
    "nonexistence_steady_expanding": "no steady or expanding soliton has a concurrent potential",
    "linear_warping": "soliton with concurrent potential: warped product I x_s F",
    "fiber_einstein": "fiber of the warped product satisfies Ric_F = (n - 2) g_F",
    "radial_sectional": "K(X, v) = 0 for X orthogonal to a concurrent v",
    "curvature_symmetries": "R_ijkl = -R_jikl = -R_ijlk = R_klij, first Bianchi identity",
    "finite_difference_agreement": "jet Christoffel and Riemann agree with finite differences",
    "soliton_criterion": "Ric(X,Y) = (lambda - 1) g(X,Y) - <h(X,Y), v_perp>",
    "pipeline_agreement": "intrinsic soliton equation with v^T equals the extrinsic criterion",
    "gauss_equation": "g(R(X,Y)Z,W) = <h(X,W),h(Y,Z)> - <h(X,Z),h(Y,W)>",
    "codazzi_equation": "(nabla_X h)(Y,Z) = (nabla_Y h)(X,Z)",
    "tangential_derivative": "nabla_X v^T = A_{v_perp} X + X",
    "normal_derivative": "D_X v_perp = -h(X, v^T)",
    "potential_gradients": "grad psi = -A_{v_perp} v^T and v^T = grad phi",
    "gauss_ricci_identity": "Ric(X,Y) = n <h(X,Y), H> - sum_i <h(X,e_i), h(Y,e_i)>",
    "principal_curvature_quadratic": "kappa^2 - (n alpha + rho) kappa + lambda - 1 = 0",
    "principal_curvature_structure": "at most two principal curvatures, the roots of the quadratic",
    "minimal_scalar_curvature": "minimal submanifold: tau = n (lambda - 1) / 2",
    "triviality_umbilicity": "soliton is trivial iff the submanifold is v_perp-umbilical",
    "chart_overlap": "invariants agree on the overlap of two charts",
    "control_warping_square": "f(s) = s^2 breaks the soliton equation",
    "control_fiber_radius": "fiber S^2(2) breaks the soliton equation",
}

SECTIONS = {
    "concurrent_potential_solitons": ("soliton_equation", "concurrency", "ricci_shift",
                                      "gradient_potential", "linear_warping", "fiber_einstein",
                                      "radial_sectional"),
    "nonexistence_steady_expanding": ("nonexistence_steady_expanding",),
    "submanifold_criterion": ("soliton_criterion", "pipeline_agreement"),
    "potential_functions": ("potential_gradients",),
    "gauss_ricci_identity": ("gauss_ricci_identity", "minimal_scalar_curvature"),
    "principal_curvatures": ("principal_curvature_quadratic", "principal_curvature_structure"),
    "triviality_umbilicity": ("triviality_umbilicity",),
    "structure_equations": ("gauss_equation", "codazzi_equation", "tangential_derivative",
                            "normal_derivative"),
    "differentiation": ("finite_difference_agreement", "curvature_symmetries", "chart_overlap"),
    "controls": ("control_warping_square", "control_fiber_radius"),
}
SECTION_OF = {name: sec for sec, names in SECTIONS.items() for name in names}


@dataclass(frozen=True)
class RunConfig:
    samples: int = 64
    seed: int = 0
    tolerances: dict = field(default_factory=dict)   # check name -> tolerance
    global_tol: float | None = None                  # bare --tol value
    margin: float | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError(f"sample count must be at least 1, got {self.samples}")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ValueError(f"tolerance for {k} must be positive, got {v}")
        if self.global_tol is not None and not self.global_tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.global_tol}")

    def tolerance(self, name, default):
        if name in self.tolerances:
            return self.tolerances[name]
        if self.global_tol is not None:
            return self.global_tol
        return default


class _Checks:
    def __init__(self, config):
        self.config = config
        self.items = []

    def add(self, name, value, default_tol, lower=False):
        """Record a check; ``lower`` checks require ``value >= tol``."""
        value = float(value)
        tol = self.config.tolerance(name, default_tol)
        ok = _passes(value, tol, lower)
        item = {"name": name, "paper_ref": REFS[name], "max_residual": _num(value),
                "tolerance": tol, "pass": ok, "comparison": ">=" if lower else "<=",
                "statistic": "min" if lower else "max"}
        if not ok and tol != default_tol and _passes(value, default_tol, lower):
            item["note"] = "tolerance-induced"
        self.items.append(item)


def _passes(value, tol, lower):
    if math.isnan(value):
        return False
    return value >= tol if lower else value <= tol


def _num(x):
    return float(x) if math.isfinite(x) else None


def _max(a):
    return float(np.max(a)) if np.size(a) else 0.0


# --- intrinsic data ----------------------------------------------------------------

def _curvature_symmetry_residual(curv):
    R = curv.riemann_down
    scale = max(1.0, _max(np.abs(R)))
    parts = [R + np.swapaxes(R, -4, -3), R + np.swapaxes(R, -2, -1),
             R - np.einsum("...ijkl->...klij", R),
             R + np.einsum("...jkil->...ijkl", R) + np.einsum("...kijl->...ijkl", R)]
    return max(_max(np.abs(p)) for p in parts) / scale


def _fd_residual(metric, pts, curv):
    q = pts[:FD_POINTS]
    gam = fdoracle.relative_error(fdoracle.christoffel(metric, q), curv.christoffel[:FD_POINTS])
    rie = fdoracle.relative_error(fdoracle.riemann(metric, q), curv.riemann[:FD_POINTS])
    return max(gam, rie)


def _nonexistence(metric, potential, pts):
    worst = np.inf
    for lam in (0.0, -1.0):
        _, norm = sol.soliton_residual(sol.SolitonDatum(metric, potential, lam), pts)
        worst = min(worst, float(np.min(norm)))
    return worst


def _intrinsic(entry, pts, checks):
    lam = 1.0 if entry.lam is None else entry.lam
    datum = sol.SolitonDatum(entry.metric, entry.potential, lam, concurrent=entry.concurrent)
    con = geo.connection(entry.metric, pts)
    curv = geo.curvature_bundle(con)
    rep = sol.classify(datum, pts)
    checks.add("soliton_equation", rep.max_soliton, JET)
    if entry.concurrent or entry.kind == "warped":
        checks.add("concurrency", rep.max_concurrency, JET)
    if entry.concurrent:
        shift = geo.g_norm(curv.ricci - (lam - 1.0) * curv.metric, curv.inverse)
        checks.add("ricci_shift", _max(shift), FD1)
        checks.add("gradient_potential", _max(rep.gradient), FD1)
        checks.add("nonexistence_steady_expanding",
                   _nonexistence(entry.metric, entry.potential, pts), LOWER, lower=True)
    if entry.kind == "warped":
        verdict = sol.concurrent_warped_verdict(entry, pts)
        checks.add("linear_warping", verdict.warping.residual, sol.LINEAR_FIT_TOL)
        checks.add("fiber_einstein", verdict.fiber.residual, JET)
        if entry.concurrent:
            K = sol.radial_sectional_curvatures(entry.metric, entry.potential, pts,
                                                seed=checks.config.seed)
            checks.add("radial_sectional", _max(K), JET)
    checks.add("curvature_symmetries", _curvature_symmetry_residual(curv), JET)
    checks.add("finite_difference_agreement", _fd_residual(entry.metric, pts, curv), FD_REL)
    return {"lambda": lam, "classification": rep.classification, "trivial": rep.trivial,
            "gradient": rep.gradient_flag}


# --- immersions --------------------------------------------------------------------

def _random_vectors(seed, shape, count):
    rng = np.random.Generator(np.random.PCG64(seed))
    return [rng.standard_normal(shape) for _ in range(count)]


def _overlap(entry, pts, lam):
    """Compare invariants between the entry's chart and a second chart of the
    same hypercylinder at shared points."""
    if entry.family != "hypercylinder" or entry.inverse is None:
        return None
    k, n, chart = entry.params["k"], entry.params["n"], entry.params["chart"]
    other = make_spherical_hypercylinder(k, n, 3 - chart)
    amb = entry.immersion.position(pts)
    q = other.inverse(amb)
    inside = other.chart.contains(q, other.margin)
    if not inside.any():
        return None
    p1, p2 = pts[inside], q[inside]

    def invariants(e, p):
        imm = e.immersion
        _, crit = sub.soliton_criterion_residual(imm, p, lam)
        tau = geo.curvature(e.metric, p).scalar
        ex = sub.extrinsic_bundle(imm, p, with_connection=False)
        kap = np.sort(np.linalg.eigvals(ex.shape_operators[:, 0]).real, axis=-1)
        H = np.linalg.norm(ex.mean_curvature, axis=-1)
        return np.column_stack([crit, tau, H, kap])

    pos = np.abs(entry.immersion.position(p1) - other.immersion.position(p2))
    return max(_max(np.abs(invariants(entry, p1) - invariants(other, p2))), _max(pos))


def _immersion(entry, pts, checks):
    imm = entry.immersion
    n = imm.dim
    b = pts.shape[0]
    lam = entry.lam
    if lam is None:
        lam, _ = sub.fit_lambda(imm, pts)
        lam = float(lam)
    E, curv, ex, split = sub.criterion_form(imm, pts, lam)
    crit = geo.g_norm(E, curv.inverse)
    checks.add("soliton_criterion", _max(crit), JET)
    con = geo.connection(entry.metric, pts)
    vt, dvt = entry.potential.evaluate(pts)
    intr = sol.soliton_form(con, curv.ricci, vt, dvt, lam)
    checks.add("soliton_equation", _max(geo.g_norm(intr, con.ginv)), JET)
    checks.add("pipeline_agreement", _max(geo.g_norm(intr - E, con.ginv)), JET)

    X, Y, Z, W = _random_vectors(checks.config.seed, (b, n), 4)
    checks.add("gauss_equation", _max(sub.gauss_residual(imm, pts, X, Y, Z, W)), JET)
    checks.add("codazzi_equation", _max(sub.codazzi_residual(imm, pts, X, Y, Z)), FD1)
    tang, norm = sub.tangential_derivative_check(imm, pts)
    checks.add("tangential_derivative", _max(tang), JET)
    checks.add("normal_derivative", _max(norm), FD1)

    gpsi = split.grad_psi + split.shape_vt
    gphi = split.grad_phi - split.tangential
    pot = max(_max(np.sqrt(np.abs(np.einsum("bi,bij,bj->b", d, curv.metric, d))))
              for d in (gpsi, gphi))
    checks.add("potential_gradients", pot, FD1)
    checks.add("curvature_symmetries", _curvature_symmetry_residual(curv), JET)
    checks.add("finite_difference_agreement", _fd_residual(entry.metric, pts, curv), FD_REL)
    gr = sub.gauss_ricci_form(imm, pts)
    checks.add("gauss_ricci_identity", _max(geo.g_norm(curv.ricci - gr, curv.inverse)), JET)

    if imm.codim == 1:
        reports = sub.principal_curvature_check(imm, pts, lam)
        checks.add("principal_curvature_quadratic", max(r.max_residual for r in reports), FD1)
        mism = []
        for r in reports:
            if not r.roots:
                mism.append(np.inf)
                continue
            scale = 1.0 + np.max(np.abs(r.kappas))
            mism.append(max(min(abs(v - root) for root in r.roots) for v, _ in r.clusters)
                        / scale if len(r.clusters) <= 2 else np.inf)
        checks.add("principal_curvature_structure", max(mism), FD1)

    Hn = np.linalg.norm(ex.mean_curvature, axis=-1)
    if _max(Hn) <= JET:
        tau = curv.scalar
        checks.add("minimal_scalar_curvature", _max(np.abs(tau - n * (lam - 1.0) / 2.0)), JET)

    c, ein = sol.einstein_fit(curv)
    trivial = _max(ein) <= sol.EINSTEIN_TOL
    umb = sub.umbilicity_check(imm, pts)
    checks.add("triviality_umbilicity", 0.0 if trivial == umb.umbilical else 1.0, JET)

    ov = _overlap(entry, pts, lam)
    if ov is not None:
        checks.add("chart_overlap", ov, JET)

    if entry.concurrent:
        checks.add("nonexistence_steady_expanding",
                   _nonexistence(entry.metric, entry.potential, pts), LOWER, lower=True)

    gradient = "yes" if _max(np.abs(gphi)) <= sol.GRADIENT_TOL else "no"
    return {"lambda": lam, "classification": sol.sign_class(lam), "trivial": bool(trivial),
            "gradient": gradient}


# --- entry points --------------------------------------------------------------

def report_for(entry, config: RunConfig, target=None):
    """Run every applicable check on a resolved entry."""
    if config.margin is not None:
        from dataclasses import replace
        entry = replace(entry, margin=config.margin)
    pts = entry.sample(config.samples, config.seed)
    checks = _Checks(config)
    if entry.kind == "immersion":
        verdicts = _immersion(entry, pts, checks)
    else:
        verdicts = _intrinsic(entry, pts, checks)
    items = sorted(checks.items, key=lambda c: c["name"])
    return {
        "target": target or entry.name,
        "description": entry.description,
        "seed": config.seed,
        "samples": config.samples,
        "sampler": SAMPLER,
        "version": __version__,
        "checks": items,
        "verdicts": verdicts,
        "pass": all(c["pass"] for c in items),
    }


def run_verify(target, config: RunConfig):
    """Resolve ``target`` (catalog name or ``.manifold`` path) and check it."""
    entry = load_target(target)
    return report_for(entry, config, target)


def load_target(target):
    if target.endswith(".manifold") or os.path.sep in target and os.path.exists(target):
        from .descriptor import load
        return load(target)
    return resolve(target)


def _controls(config: RunConfig):
    """Perturbed warped products that must fail the soliton equation."""
    out = []
    for name, entry in (
        ("control_warping_square", make_warped_product("s^2", make_round_sphere(2, 1.0))),
        ("control_fiber_radius", make_warped_product("s", make_round_sphere(2, 2.0))),
    ):
        pts = entry.sample(config.samples, config.seed)
        _, norm = sol.soliton_residual(sol.SolitonDatum(entry.metric, entry.potential, 1.0), pts)
        checks = _Checks(config)
        checks.add(name, float(np.min(norm)), CONTROL, lower=True)
        out.append((entry.name, checks.items[0]))
    return out


def thread_count(config: RunConfig):
    if config.threads is not None:
        return max(1, config.threads)
    env = os.environ.get("SOLITON_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"SOLITON_LAB_THREADS must be an integer, got {env!r}") from None
    return max(1, min(8, os.cpu_count() or 1))


def select_targets(only=None):
    targets = list(SUITE_TARGETS)
    if only:
        targets = [t for t in targets if any(pat in t for pat in only)]
    return targets


def run_suite(config: RunConfig, targets=None):
    """All catalog targets, the controls, and a per-identity section view."""
    targets = select_targets() if targets is None else list(targets)
    if not targets:
        raise ValueError("no suite targets selected")
    with ThreadPoolExecutor(max_workers=thread_count(config)) as pool:
        reports = list(pool.map(lambda t: run_verify(t, config), targets))
    reports.sort(key=lambda r: r["target"])
    controls = _controls(config)
    sections = {name: [] for name in SECTIONS}
    for rep in reports:
        for c in rep["checks"]:
            sections[SECTION_OF[c["name"]]].append(
                {"target": rep["target"], "name": c["name"], "max_residual": c["max_residual"],
                 "tolerance": c["tolerance"], "pass": c["pass"]})
    for target, c in controls:
        sections["controls"].append({"target": target, "name": c["name"],
                                     "max_residual": c["max_residual"],
                                     "tolerance": c["tolerance"], "pass": c["pass"]})
    for rows in sections.values():
        rows.sort(key=lambda r: (r["target"], r["name"]))
    ok = all(r["pass"] for r in reports) and all(c["pass"] for _, c in controls)
    return {
        "suite": True,
        "seed": config.seed,
        "samples": config.samples,
        "sampler": SAMPLER,
        "version": __version__,
        "targets": reports,
        "sections": sections,
        "pass": ok,
    }
