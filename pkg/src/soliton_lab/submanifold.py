"""Extrinsic geometry of immersions into Euclidean space.

The ambient concurrent field is the position field ``v(q) = q - origin``.
Tangent vectors are chart components, normal vectors are ambient
components.  Conventions match Gauss ``D_X Y = nabla_X Y + h(X, Y)`` and
Weingarten ``D_X eta = -A_eta X + D^perp_X eta``, so
``<h(X, Y), eta> = g(A_eta X, Y)`` and a round sphere with outward normal
has ``A_N = -(1/r) I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import geometry as geo
from .charts import Chart
from .exprlang import Binary, Const, Pow, Tape, parse

RANK_FLOOR = 1e-8
FD_STEP = 1e-4
PROPAGATION_STEPS = 32


class ImmersionError(ValueError):
    pass


class NotMinimalError(ValueError):
    pass


class Immersion:
    """A map from a chart into Euclidean ``m``-space given by expressions."""

    def __init__(self, components, coords, chart: Chart | None = None, origin=None):
        self.coords = tuple(coords)
        self.dim = len(coords)
        self.components = [c if not isinstance(c, str) else parse(c, coords) for c in components]
        self.ambient_dim = len(self.components)
        if self.ambient_dim < self.dim:
            raise ImmersionError(f"cannot immerse {self.dim} dimensions into {self.ambient_dim}")
        self.chart = chart
        self.origin = np.zeros(self.ambient_dim) if origin is None else np.asarray(origin, float)
        if self.origin.shape != (self.ambient_dim,):
            raise ImmersionError(f"origin needs {self.ambient_dim} components")
        self.tape = Tape(self.components, self.dim)
        self._center_frame = None

    @property
    def codim(self):
        return self.ambient_dim - self.dim

    def jets(self, points):
        """``(phi, J, D2, D3)`` with ``J[..., a, i] = d_i phi^a`` etc."""
        out = self.tape.evaluate(np.atleast_2d(points))
        return self.tape.layout.split(out)

    def position(self, points):
        return self.tape.values(np.atleast_2d(points)) - self.origin

    def jacobian(self, points):
        return self.jets(points)[1]

    def check_rank(self, J, points=None):
        sv = np.linalg.svd(J, compute_uv=False)
        bad = np.flatnonzero(~(sv[..., -1] > RANK_FLOOR))
        if bad.size:
            where = "" if points is None else f" at point {tuple(np.atleast_2d(points)[bad[0]])}"
            raise ImmersionError(f"differential is rank deficient{where} "
                                 f"(smallest singular value {sv[bad[0], -1]:.3g})")

    def potential_expr(self):
        """``1/2 |x - origin|^2`` as an expression tree."""
        terms = []
        for comp, o in zip(self.components, self.origin):
            shifted = comp if o == 0 else Binary("-", comp, Const(float(o)))
            terms.append(Pow(shifted, 2))
        total = terms[0]
        for t in terms[1:]:
            total = Binary("+", total, t)
        return Binary("*", Const(0.5), total)

    # normal frames

    def center_frame(self):
        """Normal frame at the chart center, fixed by a deterministic rule."""
        if self._center_frame is None:
            if self.chart is None:
                raise ImmersionError("normal orientation needs a chart center")
            c = self.chart.center[None]
            J = self.jacobian(c)
            self.check_rank(J, c)
            if self.codim == 1:
                frame = _oriented_normal(J)
                self._cross_sign = float(np.sign(_cross(J)[0] @ frame[0, :, 0]))
            else:
                frame = _pivot_normals(J, self.codim)
            self._center_frame = frame[0]
        return self._center_frame

    def normal_frame(self, points, J=None):
        """Orthonormal normal frame ``(B, m, q)``, continuous over the chart.

        Hypersurfaces use the generalized cross product with its sign fixed
        once at the chart center (last nonzero component positive).  Higher
        codimension frames are carried from the center along the straight
        segment to each point by repeated projection.
        """
        pts = np.atleast_2d(points)
        if J is None:
            J = self.jacobian(pts)
        if self.codim == 0:
            return np.zeros(J.shape[:-1] + (0,))
        frame0 = self.center_frame()
        if self.codim == 1:
            nrm = self._cross_sign * _cross(J)
            return (nrm / np.linalg.norm(nrm, axis=-1, keepdims=True))[..., None]
        c = self.chart.center
        frame = np.broadcast_to(frame0, (pts.shape[0],) + frame0.shape).copy()
        for t in np.linspace(0.0, 1.0, PROPAGATION_STEPS + 1)[1:]:
            Jt = J if t == 1.0 else self.jacobian(c + t * (pts - c))
            frame = _reorthonormalize(_normal_projector(Jt) @ frame)
        return frame


def _cross(J):
    """Generalized cross product of the ``n`` columns of ``J`` (m = n + 1)."""
    m = J.shape[-2]
    out = np.empty(J.shape[:-2] + (m,))
    for k in range(m):
        minor = np.delete(J, k, axis=-2)
        out[..., k] = (-1) ** k * np.linalg.det(minor)
    return out


def _oriented_normal(J):
    nrm = _cross(J)
    nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
    for b in range(nrm.shape[0]):
        nz = np.flatnonzero(np.abs(nrm[b]) > 1e-12)
        if nrm[b, nz[-1]] < 0:
            nrm[b] = -nrm[b]
    return nrm[..., None]


def _normal_projector(J):
    g = np.einsum("...ai,...aj->...ij", J, J)
    P = np.einsum("...ai,...ij,...bj->...ab", J, np.linalg.inv(g), J)
    return np.eye(J.shape[-2]) - P


def _pivot_normals(J, q):
    """Gram-Schmidt on projected ambient basis vectors, lowest index first."""
    P = _normal_projector(J)
    frames = np.zeros(J.shape[:-2] + (J.shape[-2], q))
    for b in range(J.shape[0]):
        cols = []
        for a in range(J.shape[-2]):
            v = P[b, :, a].copy()
            for c in cols:
                v -= (c @ v) * c
            nv = np.linalg.norm(v)
            if nv > 1e-6:
                cols.append(v / nv)
            if len(cols) == q:
                break
        frames[b] = np.stack(cols, axis=-1)
    return frames


def _reorthonormalize(frame):
    q, r = np.linalg.qr(frame)
    # keep each column on the side of its predecessor
    signs = np.sign(np.einsum("...ii->...i", r))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


class InducedMetric(geo.MetricField):
    """Pull-back of the Euclidean metric along an immersion."""

    def __init__(self, immersion: Immersion):
        self.immersion = immersion
        self.dim = immersion.dim
        self.coords = immersion.coords
        self.chart = immersion.chart

    def jets(self, points):
        _, J, D2, D3 = self.immersion.jets(points)
        g = np.einsum("...ai,...aj->...ij", J, J)
        t = np.einsum("...aki,...aj->...kij", D2, J)
        dg = t + np.swapaxes(t, -1, -2)
        u = np.einsum("...alki,...aj->...klij", D3, J)
        w = np.einsum("...aki,...alj->...klij", D2, D2)
        ddg = u + np.swapaxes(u, -1, -2) + w + np.swapaxes(w, -1, -2)
        return g, dg, ddg


@dataclass(frozen=True)
class ExtrinsicBundle:
    """Extrinsic data at a batch of points (leading axis ``B``).

    ``second_fundamental[b, i, j]`` is the ambient vector ``h(d_i, d_j)``;
    ``shape_operators[b, a]`` is the matrix of ``A`` for normal ``a`` with
    ``(A X)^i = A[i, j] X^j``; ``normal_connection[b, i, a, c]`` is
    ``<D^perp_{d_i} xi_a, xi_c>``.
    """

    points: np.ndarray
    position: np.ndarray
    tangent: np.ndarray
    metric: np.ndarray
    inverse: np.ndarray
    normals: np.ndarray
    second_fundamental: np.ndarray
    mean_curvature: np.ndarray
    shape_operators: np.ndarray
    normal_connection: np.ndarray

    def shape_operator(self, eta):
        """Matrix of ``A_eta`` for an ambient normal vector (per point)."""
        hb = np.einsum("...ija,...a->...ij", self.second_fundamental, eta)
        return np.einsum("...ik,...kj->...ij", self.inverse, hb)


def _second_fundamental(J, D2, ginv):
    P = np.eye(J.shape[-2]) - np.einsum("...ai,...ij,...bj->...ab", J, ginv, J)
    return np.einsum("...ab,...bij->...ija", P, D2)


def extrinsic_bundle(imm: Immersion, p, with_connection=True) -> ExtrinsicBundle:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    phi, J, D2, _ = imm.jets(pts)
    imm.check_rank(J, pts)
    g = np.einsum("...ai,...aj->...ij", J, J)
    geo.check_metric(g, pts)
    ginv = np.linalg.inv(g)
    h = _second_fundamental(J, D2, ginv)
    H = np.einsum("...ij,...ija->...a", ginv, h) / imm.dim
    xi = imm.normal_frame(pts, J)
    hq = np.einsum("...ija,...ac->...cij", h, xi)
    A = np.einsum("...ik,...ckj->...cij", ginv, hq)
    if with_connection and imm.codim > 0:
        conn = np.empty(pts.shape[:1] + (imm.dim, imm.codim, imm.codim))
        for i in range(imm.dim):
            e = np.zeros(imm.dim)
            e[i] = FD_STEP
            dxi = (imm.normal_frame(pts + e) - imm.normal_frame(pts - e)) / (2 * FD_STEP)
            conn[:, i] = np.einsum("...ma,...mc->...ac", dxi, xi)
    else:
        conn = np.zeros(pts.shape[:1] + (imm.dim, imm.codim, imm.codim))
    return ExtrinsicBundle(pts, phi - imm.origin, J, g, ginv, xi, h, H, A, conn)


# --- Gauss and Codazzi -------------------------------------------------------

def _vectors(V, b, n):
    V = np.asarray(V, dtype=float)
    return np.broadcast_to(V, (b, n)) if V.ndim == 1 else V


def gauss_residual(imm: Immersion, p, X, Y, Z, W):
    """``|g(R(X,Y)Z,W) - <h(X,W),h(Y,Z)> + <h(X,Z),h(Y,W)>|`` (flat ambient)."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    b, n = pts.shape
    X, Y, Z, W = (_vectors(V, b, n) for V in (X, Y, Z, W))
    curv = geo.curvature(InducedMetric(imm), pts)
    ex = extrinsic_bundle(imm, pts, with_connection=False)
    lhs = np.einsum("...ijkl,...i,...j,...k,...l->...", curv.riemann_down, X, Y, Z, W)
    h = ex.second_fundamental

    def hv(U, V):
        return np.einsum("...ija,...i,...j->...a", h, U, V)

    rhs = (np.einsum("...a,...a->...", hv(X, W), hv(Y, Z))
           - np.einsum("...a,...a->...", hv(X, Z), hv(Y, W)))
    out = np.abs(lhs - rhs)
    return out[0] if np.ndim(p) == 1 else out


def second_fundamental_derivative(imm: Immersion, p):
    """``C[..., i, j, k, :] = (nablabar_{d_i} h)(d_j, d_k)``; the normal
    derivative of ``h`` is taken by central differences."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    n = imm.dim

    def h_at(q):
        _, J, D2, _ = imm.jets(q)
        g = np.einsum("...ai,...aj->...ij", J, J)
        return _second_fundamental(J, D2, np.linalg.inv(g))

    _, J, _, _ = imm.jets(pts)
    g = np.einsum("...ai,...aj->...ij", J, J)
    P = np.eye(imm.ambient_dim) - np.einsum("...ai,...ij,...bj->...ab", J, np.linalg.inv(g), J)
    h = h_at(pts)
    gam = geo.christoffel(InducedMetric(imm), pts)
    dh = np.empty(h.shape[:1] + (n,) + h.shape[1:])
    for i in range(n):
        e = np.zeros(n)
        e[i] = FD_STEP
        dh[:, i] = (h_at(pts + e) - h_at(pts - e)) / (2 * FD_STEP)
    Dh = np.einsum("...ab,...ijkb->...ijka", P, dh)
    return (Dh - np.einsum("...lij,...lka->...ijka", gam, h)
            - np.einsum("...lik,...jla->...ijka", gam, h))


def codazzi_residual(imm: Immersion, p, X, Y, Z):
    """``|(nablabar_X h)(Y,Z) - (nablabar_Y h)(X,Z)|`` (flat ambient)."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    b, n = pts.shape
    X, Y, Z = (_vectors(V, b, n) for V in (X, Y, Z))
    C = second_fundamental_derivative(imm, pts)
    diff = (np.einsum("...ijka,...i,...j,...k->...a", C, X, Y, Z)
            - np.einsum("...ijka,...i,...j,...k->...a", C, Y, X, Z))
    out = np.linalg.norm(diff, axis=-1)
    return out[0] if np.ndim(p) == 1 else out


# --- the concurrent field --------------------------------------------------

@dataclass(frozen=True)
class ConcurrentSplit:
    """``v = v^T + v^perp`` at a batch of points.

    ``tangential`` holds chart components of ``v^T``; ``tangential_ambient``
    the same vector in ambient components.  ``grad_psi`` and
    ``shape_vt`` (``A_{v^perp} v^T``) feed the first identity of the
    potential lemma, ``grad_phi`` the second (``v^T = grad phi``).
    """

    position: np.ndarray
    tangential: np.ndarray
    tangential_ambient: np.ndarray
    normal: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    grad_psi: np.ndarray
    shape_vt: np.ndarray
    grad_phi: np.ndarray


def concurrent_split(imm: Immersion, p) -> ConcurrentSplit:
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    phi_pos, J, D2, _ = imm.jets(pts)
    imm.check_rank(J, pts)
    v = phi_pos - imm.origin
    # orthogonal projection through an orthonormal tangent basis
    Q, R = np.linalg.qr(J)
    vt_amb = np.einsum("...ak,...bk,...b->...a", Q, Q, v)
    vt = np.linalg.solve(R, np.einsum("...ak,...a->...k", Q, vt_amb)[..., None])[..., 0]
    vperp = v - vt_amb
    g = np.einsum("...ai,...aj->...ij", J, J)
    ginv = np.linalg.inv(g)
    dg = np.einsum("...aki,...aj->...kij", D2, J)
    dg = dg + np.swapaxes(dg, -1, -2)
    # d_m psi = -vT^l <d_m d_l phi, v> + 1/2 vT^a d_m g_ab vT^b
    dpsi = (-np.einsum("...l,...aml,...a->...m", vt, D2, v)
            + 0.5 * np.einsum("...a,...mab,...b->...m", vt, dg, vt))
    grad_psi = np.einsum("...ij,...j->...i", ginv, dpsi)
    h = _second_fundamental(J, D2, ginv)
    Avp = np.einsum("...ik,...kja,...a->...ij", ginv, h, vperp)
    shape_vt = np.einsum("...ij,...j->...i", Avp, vt)
    pot = Tape([imm.potential_expr()], imm.dim).evaluate(pts)[:, 0]
    grad_phi = np.einsum("...ij,...j->...i", ginv, pot[:, 1:1 + imm.dim])
    psi = 0.5 * np.einsum("...a,...a->...", vperp, vperp)
    return ConcurrentSplit(v, vt, vt_amb, vperp, psi, pot[:, 0], grad_psi, shape_vt, grad_phi)


class TangentialField(geo.VectorField):
    """``v^T`` as an intrinsic vector field with exact first partials."""

    def __init__(self, immersion: Immersion):
        self.immersion = immersion
        self.dim = immersion.dim

    def evaluate(self, points):
        imm = self.immersion
        phi, J, D2, _ = imm.jets(points)
        v = phi - imm.origin
        g = np.einsum("...ai,...aj->...ij", J, J)
        ginv = np.linalg.inv(g)
        w = np.einsum("...ai,...a->...i", J, v)
        vt = np.einsum("...ij,...j->...i", ginv, w)
        dw = np.einsum("...aml,...a->...ml", D2, v) + g
        dg = np.einsum("...aki,...aj->...kij", D2, J)
        dg = dg + np.swapaxes(dg, -1, -2)
        rhs = dw - np.einsum("...mlj,...j->...ml", dg, vt)
        dvt = np.einsum("...kl,...ml->...mk", ginv, rhs)
        return vt, dvt


def _fit_lambda(B, g, ginv):
    """Least-squares ``lam`` minimizing ``sum |B - lam g|_g^2``."""
    n = g.shape[-1]
    lam = float(np.mean(np.einsum("...ij,...ij->...", ginv, B)) / n)
    return lam, geo.g_norm(B - lam * g, ginv)


def criterion_form(imm: Immersion, p, lam):
    """``Ric - (lam - 1) g + <h, v^perp>`` plus the pieces it was built
    from, for a batch of points."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    curv = geo.curvature(InducedMetric(imm), pts)
    split = concurrent_split(imm, pts)
    ex = extrinsic_bundle(imm, pts, with_connection=False)
    hv = np.einsum("...ija,...a->...ij", ex.second_fundamental, split.normal)
    E = curv.ricci - (lam - 1.0) * curv.metric + hv
    return E, curv, ex, split


def soliton_criterion_residual(imm: Immersion, p, lam):
    """Residual form of the submanifold soliton criterion and its g-norm."""
    E, curv, _, _ = criterion_form(imm, p, lam)
    norm = geo.g_norm(E, curv.inverse)
    if np.ndim(p) == 1:
        return E[0], norm[0]
    return E, norm


def fit_lambda(imm: Immersion, p):
    """The ``lam`` that best satisfies the criterion over the given points,
    with the per-point residual norm left over."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    E0, curv, _, _ = criterion_form(imm, pts, 1.0)
    # E0 = Ric + <h, v^perp>; the criterion reads E0 = (lam - 1) g
    lam1, resid = _fit_lambda(E0, curv.metric, curv.inverse)
    return lam1 + 1.0, resid


def tangential_derivative_check(imm: Immersion, p):
    """Residuals of ``nabla_X v^T = A_{v^perp} X + X`` and
    ``h(X, v^T) = -D^perp_X v^perp`` over coordinate directions ``X``."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    n = imm.dim
    metric = InducedMetric(imm)
    con = geo.connection(metric, pts)
    vt, dvt = TangentialField(imm).evaluate(pts)
    nab = geo.covariant_jacobian(con, vt, dvt)
    split = concurrent_split(imm, pts)
    h = _second_fundamental(*imm.jets(pts)[1:3], con.ginv)
    Avp = np.einsum("...ik,...kja,...a->...ij", con.ginv, h, split.normal)
    # row i: nabla_{d_i} v^T - A d_i - d_i
    tang = nab - np.swapaxes(Avp, -1, -2) - np.eye(n)
    tang_norm = np.max(np.sqrt(np.abs(np.einsum("...ik,...kl,...il->...i", tang, con.g, tang))),
                       axis=-1)
    P = np.eye(imm.ambient_dim) - np.einsum("...ai,...ij,...bj->...ab",
                                            imm.jacobian(pts), con.ginv, imm.jacobian(pts))
    resid = np.empty(pts.shape[:1] + (n,))
    for i in range(n):
        e = np.zeros(n)
        e[i] = FD_STEP
        dv = (concurrent_split(imm, pts + e).normal
              - concurrent_split(imm, pts - e).normal) / (2 * FD_STEP)
        Dv = np.einsum("...ab,...b->...a", P, dv)
        hxv = np.einsum("...ja,...j->...a", h[:, i], vt)
        resid[:, i] = np.linalg.norm(hxv + Dv, axis=-1)
    norm_norm = resid.max(axis=-1)
    if np.ndim(p) == 1:
        return float(tang_norm[0]), float(norm_norm[0])
    return tang_norm, norm_norm


def gauss_ricci_form(imm: Immersion, p):
    """``n <h(X,Y), H> - sum_i <h(X,e_i), h(Y,e_i)>`` as a matrix."""
    ex = extrinsic_bundle(imm, p, with_connection=False)
    h, H, ginv = ex.second_fundamental, ex.mean_curvature, ex.inverse
    return (imm.dim * np.einsum("...ija,...a->...ij", h, H)
            - np.einsum("...kl,...ika,...jla->...ij", ginv, h, h))


# --- hypersurface principal curvatures -----------------------------------------

@dataclass(frozen=True)
class PrincipalCurvatureReport:
    """Spectrum of ``A_N`` at one point against the quadratic
    ``k^2 - (n alpha + rho) k + lam - 1 = 0``."""

    kappas: np.ndarray
    alpha: float
    rho: float
    lam: float
    quadratic_residuals: np.ndarray
    roots: tuple
    clusters: tuple          # ((value, multiplicity), ...), ascending
    matches: bool

    @property
    def max_residual(self):
        return float(np.max(self.quadratic_residuals))


def cluster_eigenvalues(kappas, rel_gap=1e-6):
    kappas = np.sort(np.asarray(kappas, dtype=float))
    gap = rel_gap * (1.0 + np.max(np.abs(kappas)))
    groups = [[kappas[0]]]
    for k in kappas[1:]:
        if k - groups[-1][-1] > gap:
            groups.append([k])
        else:
            groups[-1].append(k)
    return tuple((float(np.mean(grp)), len(grp)) for grp in groups)


def principal_curvature_check(imm: Immersion, p, lam, tol=1e-6):
    """Principal curvature analysis of a hypersurface at point(s) ``p``.

    Returns one :class:`PrincipalCurvatureReport` per point (a list for a
    batch).
    """
    if imm.codim != 1:
        raise ImmersionError(f"principal curvature check needs a hypersurface, codimension is {imm.codim}")
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    ex = extrinsic_bundle(imm, pts, with_connection=False)
    N = ex.normals[..., 0]
    n = imm.dim
    reports = []
    for b in range(pts.shape[0]):
        hN = np.einsum("ija,a->ij", ex.second_fundamental[b], N[b])
        kap = scipy.linalg.eigh(0.5 * (hN + hN.T), ex.metric[b], eigvals_only=True)
        alpha = float(np.trace(ex.shape_operators[b, 0]) / n)
        rho = float(N[b] @ ex.position[b])
        c = n * alpha + rho
        quad = np.abs(kap ** 2 - c * kap + lam - 1.0)
        disc = c * c + 4.0 - 4.0 * lam
        clusters = cluster_eigenvalues(kap)
        if disc < -tol:
            roots = ()
            ok = False
        else:
            s = np.sqrt(max(disc, 0.0))
            roots = ((c - s) / 2.0, (c + s) / 2.0)
            scale = 1.0 + np.max(np.abs(kap))
            ok = len(clusters) <= 2 and all(
                min(abs(val - r) for r in roots) <= tol * scale for val, _ in clusters)
        reports.append(PrincipalCurvatureReport(kap, alpha, rho, float(lam), quad, roots,
                                                clusters, bool(ok)))
    return reports[0] if np.ndim(p) == 1 else reports


def minimal_scalar_check(imm: Immersion, p, lam=None, minimal_tol=1e-8):
    """``|tau - n(lam - 1)/2|`` on a minimal submanifold.

    ``lam`` defaults to the best fit of the soliton criterion over ``p``.
    """
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    ex = extrinsic_bundle(imm, pts, with_connection=False)
    Hn = np.linalg.norm(ex.mean_curvature, axis=-1)
    if np.any(Hn > minimal_tol):
        raise NotMinimalError(f"submanifold is not minimal (|H| = {Hn.max():.3g})")
    if lam is None:
        lam, _ = fit_lambda(imm, pts)
    tau = geo.curvature(InducedMetric(imm), pts).scalar
    out = np.abs(tau - imm.dim * (lam - 1.0) / 2.0)
    return out[0] if np.ndim(p) == 1 else out


@dataclass(frozen=True)
class UmbilicityVerdict:
    deviations: np.ndarray     # per point, g-norm of A - (tr A / n) I
    factors: np.ndarray        # per point, tr A / n
    umbilical: bool


def umbilicity_check(imm: Immersion, p, tol=1e-8):
    """Whether ``A_{v^perp}`` is a multiple of the identity at every point."""
    pts = np.atleast_2d(np.asarray(p, dtype=float))
    ex = extrinsic_bundle(imm, pts, with_connection=False)
    split = concurrent_split(imm, pts)
    B = np.einsum("...ija,...a->...ij", ex.second_fundamental, split.normal)
    n = imm.dim
    fac = np.einsum("...ij,...ij->...", ex.inverse, B) / n
    dev = geo.g_norm(B - fac[..., None, None] * ex.metric, ex.inverse)
    return UmbilicityVerdict(dev, fac, bool(np.all(dev <= tol)))
