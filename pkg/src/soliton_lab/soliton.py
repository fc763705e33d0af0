"""Soliton-level judgments.

A Ricci soliton is a metric ``g`` with a potential field ``xi`` and a
constant ``lam`` such that ``1/2 L_xi g + Ric = lam g``.  This module
measures that equation, the concurrency condition ``nabla_Z v = Z``,
classifies data (shrinking/steady/expanding, trivial, gradient), and
decides the warped-product characterization of solitons whose potential
is concurrent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo

EINSTEIN_TOL = 1e-6
GRADIENT_TOL = 1e-6
LINEAR_FIT_TOL = 1e-6
SOLITON_TOL = 1e-8


class SolitonError(ValueError):
    pass


@dataclass(frozen=True)
class SolitonDatum:
    """The quadruple ``(M, g, xi, lam)``; ``metric`` carries the chart."""

    metric: geo.MetricField
    potential: geo.VectorField
    lam: float
    concurrent: bool = False   # the potential is claimed to be concurrent

    def __post_init__(self):
        if self.potential.dim != self.metric.dim:
            raise SolitonError(f"potential has dimension {self.potential.dim}, "
                               f"manifold has {self.metric.dim}")


def soliton_form(con: geo.Connection, ric, v, dv, lam):
    """``1/2 L_v g + Ric - lam g`` from precomputed pieces."""
    return 0.5 * geo.lie_derivative_from(con, v, dv) + ric - lam * con.g


def soliton_residual(datum: SolitonDatum, p):
    """``(E, |E|_g)`` with ``E = 1/2 L_xi g + Ric - lam g``."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    con = geo.connection(datum.metric, pts)
    curv = geo.curvature_bundle(con)
    v, dv = datum.potential.evaluate(pts)
    E = soliton_form(con, curv.ricci, v, dv, datum.lam)
    norm = geo.g_norm(E, con.ginv)
    if np.ndim(p) == 1:
        return E[0], float(norm[0])
    return E, norm


def concurrent_residual(metric: geo.MetricField, potential: geo.VectorField, p):
    """Max over ``Z = d_i`` of ``|nabla_Z v - Z|_g``."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    con = geo.connection(metric, pts)
    v, dv = potential.evaluate(pts)
    D = geo.covariant_jacobian(con, v, dv) - np.eye(metric.dim)
    norms = np.sqrt(np.abs(np.einsum("...ik,...kl,...il->...i", D, con.g, D)))
    out = norms.max(axis=-1)
    return float(out[0]) if np.ndim(p) == 1 else out


def einstein_fit(curv: geo.CurvatureBundle):
    """Einstein constant fitted by trace over all points, and the pointwise
    residuals ``|Ric - c g|_g``."""
    n = curv.metric.shape[-1]
    traces = np.einsum("...ij,...ij->...", curv.inverse, curv.ricci)
    c = float(np.mean(traces) / n)
    return c, geo.g_norm(curv.ricci - c * curv.metric, curv.inverse)


def gradient_residual(con: geo.Connection, v, dv):
    """``|v - grad phi|_g`` with ``phi = 1/2 g(v, v)``."""
    # d_k phi = 1/2 d_k g_ij v^i v^j + g_ij d_k v^i v^j
    dphi = (0.5 * np.einsum("...kij,...i,...j->...k", con.dg, v, v)
            + np.einsum("...ij,...ki,...j->...k", con.g, dv, v))
    diff = v - np.einsum("...ij,...j->...i", con.ginv, dphi)
    return np.sqrt(np.abs(np.einsum("...i,...ij,...j->...", diff, con.g, diff)))


def sign_class(lam):
    if lam > 0:
        return "shrinking"
    if lam < 0:
        return "expanding"
    return "steady"


@dataclass(frozen=True)
class SolitonReport:
    samples: int
    lam: float
    soliton: np.ndarray       # per-point |1/2 L g + Ric - lam g|_g
    concurrency: np.ndarray   # per-point concurrency residual
    einstein: np.ndarray      # per-point |Ric - c g|_g
    einstein_constant: float
    gradient: np.ndarray | None
    classification: str
    trivial: bool
    gradient_flag: str        # "yes", "no" or "not checked"

    @property
    def max_soliton(self):
        return float(np.max(self.soliton))

    @property
    def mean_soliton(self):
        return float(np.mean(self.soliton))

    @property
    def max_concurrency(self):
        return float(np.max(self.concurrency))

    @property
    def max_einstein(self):
        return float(np.max(self.einstein))


def classify(datum: SolitonDatum, points, einstein_tol=EINSTEIN_TOL,
             gradient_tol=GRADIENT_TOL) -> SolitonReport:
    """Residuals and verdicts for ``datum`` over sample ``points``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    con = geo.connection(datum.metric, pts)
    curv = geo.curvature_bundle(con)
    v, dv = datum.potential.evaluate(pts)
    sol = geo.g_norm(soliton_form(con, curv.ricci, v, dv, datum.lam), con.ginv)
    D = geo.covariant_jacobian(con, v, dv) - np.eye(datum.metric.dim)
    conc = np.sqrt(np.abs(np.einsum("...ik,...kl,...il->...i", D, con.g, D))).max(axis=-1)
    c, ein = einstein_fit(curv)
    if datum.concurrent:
        grad = gradient_residual(con, v, dv)
        flag = "yes" if np.max(grad) <= gradient_tol else "no"
    else:
        grad, flag = None, "not checked"
    return SolitonReport(
        samples=pts.shape[0], lam=float(datum.lam), soliton=sol, concurrency=conc,
        einstein=ein, einstein_constant=c, gradient=grad,
        classification=sign_class(datum.lam), trivial=bool(np.max(ein) <= einstein_tol),
        gradient_flag=flag,
    )


# --- warped products with concurrent potential ----------------------------------

@dataclass(frozen=True)
class Conjunct:
    name: str
    residual: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class WarpedVerdict:
    """Conjuncts of the characterization: the datum ``(g, s d/ds, 1)`` is a
    soliton, ``f`` is linear through the origin, and the fiber satisfies
    ``Ric_F = (n - 2) g_F``.  ``concurrency`` is reported alongside."""

    soliton: Conjunct
    warping: Conjunct
    fiber: Conjunct
    concurrency: Conjunct
    fit: tuple                # (a, b) of f ~ a s + b

    @property
    def conjuncts(self):
        return (self.soliton, self.warping, self.fiber)

    @property
    def passed(self):
        return all(c.passed for c in self.conjuncts) and self.concurrency.passed


def linear_warping_fit(f, s_interval, samples=257):
    """Least-squares fit ``f(s) ~ a s + b`` on a grid; returns
    ``(a, b, max fit residual)``."""
    from .exprlang import Tape

    s = np.linspace(s_interval[0], s_interval[1], samples)
    vals = Tape([f], 1).values(s[:, None])[:, 0]
    A = np.stack([s, np.ones_like(s)], axis=-1)
    (a, b), *_ = np.linalg.lstsq(A, vals, rcond=None)
    return float(a), float(b), float(np.max(np.abs(A @ (a, b) - vals)))


def concurrent_warped_verdict(entry, points, tol=SOLITON_TOL, fiber_points=None,
                              fit_tol=LINEAR_FIT_TOL):
    """Check a warped-product catalog entry against the characterization of
    solitons with concurrent potential."""
    if getattr(entry, "kind", None) != "warped" or entry.fiber is None:
        raise SolitonError("verdict needs a warped-product entry")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = entry.dim
    datum = SolitonDatum(entry.metric, entry.potential, 1.0, concurrent=True)
    _, sol = soliton_residual(datum, pts)
    conc = concurrent_residual(entry.metric, entry.potential, pts)
    lo, hi = entry.chart.lo[0], entry.chart.hi[0]
    a, b, fit_resid = linear_warping_fit(entry.warping, (lo, hi))
    ratio = abs(b / a) if abs(a) > fit_tol else np.inf
    warp_resid = max(fit_resid, ratio)
    if fiber_points is None:
        fiber_points = pts[:, 1:]
    fcurv = geo.curvature(entry.fiber.metric, fiber_points)
    fib = geo.g_norm(fcurv.ricci - (n - 2) * fcurv.metric, fcurv.inverse)
    return WarpedVerdict(
        soliton=Conjunct("soliton", float(np.max(sol)), tol, bool(np.max(sol) <= tol)),
        warping=Conjunct("linear_warping", float(warp_resid), fit_tol,
                         bool(warp_resid <= fit_tol)),
        fiber=Conjunct("fiber_einstein", float(np.max(fib)), tol, bool(np.max(fib) <= tol)),
        concurrency=Conjunct("concurrency", float(np.max(conc)), tol,
                             bool(np.max(conc) <= tol)),
        fit=(a, b),
    )


def radial_sectional_curvatures(metric: geo.MetricField, potential: geo.VectorField, p,
                                count=20, seed=0):
    """``|K(X, v)|`` for ``count`` random directions ``X`` orthogonal to
    ``v`` at each point; shape ``(points, count)``."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    curv = geo.curvature(metric, pts)
    v, _ = potential.evaluate(pts)
    rng = np.random.Generator(np.random.PCG64(seed))
    X = rng.standard_normal((pts.shape[0], count, metric.dim))
    g = curv.metric
    vv = np.einsum("bi,bij,bj->b", v, g, v)
    Xv = np.einsum("bci,bij,bj->bc", X, g, v)
    X = X - (Xv / vv[:, None])[..., None] * v[:, None, :]
    Rm = curv.riemann_down
    num = np.einsum("bijkl,bci,bj,bk,bcl->bc", Rm, X, v, v, X)
    XX = np.einsum("bci,bij,bcj->bc", X, g, X)
    return np.abs(num / (XX * vv[:, None]))
