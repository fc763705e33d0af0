"""Intrinsic Riemannian geometry on a coordinate chart.

Every routine takes a single point ``(n,)`` or a batch ``(B, n)`` and
returns arrays with the matching leading shape.  Index conventions:

* ``dg[..., k, i, j] = d_k g_ij`` and ``ddg[..., k, l, i, j] = d_k d_l g_ij``
* ``christoffel[..., k, i, j] = Gamma^k_ij``
* ``riemann[..., l, i, j, k] = R^l_ijk``, the ``l`` component of
  ``R(d_i, d_j) d_k`` with ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``
* ``riemann_down[..., i, j, k, l] = g(R(d_i, d_j) d_k, d_l)``
* ``ricci[..., j, k] = R^i_ijk``, so the round sphere has positive Ricci
  and sectional curvature

Scalar curvature follows the frame-sum convention
``tau = sum_{i<j} K(e_i, e_j)``, which is HALF of the usual trace
``g^ij Ric_ij``.  Under it the unit 2-sphere has ``tau = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import Chart
from .exprlang import Expr, Tape, parse

COND_LIMIT = 1e12
EIG_FLOOR = 1e-9
GRAM_FLOOR = 1e-10


class MetricError(ValueError):
    """Metric is singular, ill-conditioned or not positive definite."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at point {tuple(float(c) for c in point)}"
        super().__init__(message)
        self.point = point


class DegeneratePlaneError(ValueError):
    pass


def _batch(points, dim):
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != dim:
        raise ValueError(f"points have {pts.shape[-1]} coordinates, manifold has {dim}")
    return pts, single


def _unbatch(single, *arrays):
    out = tuple(a[0] if single else a for a in arrays)
    return out[0] if len(out) == 1 else out


def _vec(v, batch):
    v = np.asarray(v, dtype=float)
    return np.broadcast_to(v, (batch,) + v.shape[-1:]) if v.ndim == 1 else v


class MetricField:
    """Base class: a metric on a chart that yields jets of its components."""

    dim: int
    chart: Chart | None = None

    def jets(self, points):
        """``(g, dg, ddg)`` at a batch of points."""
        raise NotImplementedError

    def values(self, points):
        return self.jets(points)[0]


class ExprMetric(MetricField):
    """Metric with component expressions ``g_ij`` in chart coordinates.

    ``components`` is a full ``n x n`` nested list (symmetric) of Expr
    trees or source strings; only the upper triangle is compiled.
    """

    def __init__(self, components, coords, chart=None):
        n = len(coords)
        if len(components) != n or any(len(row) != n for row in components):
            raise ValueError(f"metric needs {n}x{n} components")
        self.dim = n
        self.coords = tuple(coords)
        self.chart = chart
        exprs = [[c if not isinstance(c, str) else parse(c, coords) for c in row]
                 for row in components]
        for i in range(n):
            for j in range(i):
                if exprs[i][j] != exprs[j][i]:
                    raise ValueError(f"metric components g[{i}][{j}] and g[{j}][{i}] differ")
        self.components = exprs
        self._iu = np.triu_indices(n)
        self.tape = Tape([exprs[i][j] for i, j in zip(*self._iu)], n)

    @classmethod
    def diagonal(cls, entries, coords, chart=None):
        n = len(coords)
        zero = parse("0", coords)
        comps = [[(entries[i] if i == j else zero) for j in range(n)] for i in range(n)]
        return cls(comps, coords, chart)

    def jets(self, points):
        pts = np.atleast_2d(points)
        lay = self.tape.layout
        out = self.tape.evaluate(pts)
        val, d1, d2, _ = lay.split(out)
        n = self.dim
        b = pts.shape[0]
        g = np.empty((b, n, n))
        dg = np.empty((b, n, n, n))
        ddg = np.empty((b, n, n, n, n))
        for q, (i, j) in enumerate(zip(*self._iu)):
            for (a, c) in {(i, j), (j, i)}:
                g[:, a, c] = val[:, q]
                dg[:, :, a, c] = d1[:, q]
                ddg[:, :, :, a, c] = d2[:, q]
        return g, dg, ddg


def check_metric(g, points=None):
    """Raise :class:`MetricError` unless every ``g`` is symmetric positive
    definite and well conditioned."""
    g = np.asarray(g, dtype=float)
    g = g.reshape((-1,) + g.shape[-2:])
    if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise MetricError("metric is not symmetric")
    ev = np.linalg.eigvalsh(g)
    for b in range(g.shape[0]):
        pt = None if points is None else np.atleast_2d(points)[b]
        if not ev[b, 0] > EIG_FLOOR:
            raise MetricError(f"metric not positive definite (smallest eigenvalue {ev[b, 0]:.3g})", pt)
        if ev[b, -1] / ev[b, 0] > COND_LIMIT:
            raise MetricError(f"metric condition number {ev[b, -1] / ev[b, 0]:.3g} exceeds {COND_LIMIT:g}", pt)


@dataclass(frozen=True)
class Connection:
    """Metric, inverse, Christoffels and their first partials at points."""

    g: np.ndarray
    dg: np.ndarray
    ginv: np.ndarray
    christoffel: np.ndarray
    dchristoffel: np.ndarray   # [..., m, k, i, j] = d_m Gamma^k_ij


def connection(metric: MetricField, points) -> Connection:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    g, dg, ddg = metric.jets(pts)
    check_metric(g, pts)
    ginv = np.linalg.inv(g)
    # first kind: G[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
    gam = np.einsum("...kl,...lij->...kij", ginv, first)
    dfirst = 0.5 * (np.einsum("...mijl->...mlij", ddg) + np.einsum("...mjil->...mlij", ddg)
                    - ddg)
    dginv = -np.einsum("...ka,...mab,...bl->...mkl", ginv, dg, ginv)
    dgam = (np.einsum("...mkl,...lij->...mkij", dginv, first)
            + np.einsum("...kl,...mlij->...mkij", ginv, dfirst))
    return Connection(g, dg, ginv, gam, dgam)


def christoffel(metric: MetricField, p):
    """``Gamma^k_ij`` (index order ``[k, i, j]``)."""
    pts, single = _batch(p, metric.dim)
    return _unbatch(single, connection(metric, pts).christoffel)


@dataclass(frozen=True)
class CurvatureBundle:
    metric: np.ndarray
    inverse: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    riemann_down: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray

    def at(self, b):
        """The bundle at one batch index."""
        return CurvatureBundle(*(getattr(self, f)[b] for f in self.__dataclass_fields__))


def _curvature_from(con: Connection):
    gam, dgam = con.christoffel, con.dchristoffel
    riem = (np.einsum("...iljk->...lijk", dgam)
            - np.einsum("...jlik->...lijk", dgam)
            + np.einsum("...lim,...mjk->...lijk", gam, gam)
            - np.einsum("...ljm,...mik->...lijk", gam, gam))
    down = np.einsum("...lm,...mijk->...ijkl", con.g, riem)
    ric = np.einsum("...iijk->...jk", riem)
    tau = 0.5 * np.einsum("...ij,...ij->...", con.ginv, ric)
    return riem, down, ric, tau


def curvature_bundle(con: Connection) -> CurvatureBundle:
    """Batched curvature bundle from an already computed connection."""
    riem, down, ric, tau = _curvature_from(con)
    return CurvatureBundle(con.g, con.ginv, con.christoffel, riem, down, ric, tau)


def curvature(metric: MetricField, p) -> CurvatureBundle:
    """Christoffels, Riemann, Ricci and scalar curvature at point(s) ``p``.

    A batch input gives a bundle of batched arrays; use ``.at(b)``.
    """
    pts, single = _batch(p, metric.dim)
    con = connection(metric, pts)
    bundle = curvature_bundle(con)
    return bundle.at(0) if single else bundle


def riemann(metric: MetricField, p):
    return curvature(metric, p).riemann


def ricci(metric: MetricField, p):
    return curvature(metric, p).ricci


def scalar_curvature(metric: MetricField, p):
    """Frame-sum scalar curvature (half the trace of Ricci)."""
    return curvature(metric, p).scalar


def sectional_curvature(metric: MetricField, p, X, Y):
    """``K(X, Y)`` for tangent vectors given in chart components."""
    pts, single = _batch(p, metric.dim)
    con = connection(metric, pts)
    _, down, _, _ = _curvature_from(con)
    b = pts.shape[0]
    X, Y = _vec(X, b), _vec(Y, b)
    g = con.g
    xx = np.einsum("...i,...ij,...j->...", X, g, X)
    yy = np.einsum("...i,...ij,...j->...", Y, g, Y)
    xy = np.einsum("...i,...ij,...j->...", X, g, Y)
    gram = xx * yy - xy ** 2
    if np.any(gram <= GRAM_FLOOR):
        raise DegeneratePlaneError(f"tangent vectors span a degenerate plane (Gram determinant {gram.min():.3g})")
    num = np.einsum("...ijkl,...i,...j,...k,...l->...", down, X, Y, Y, X)
    return _unbatch(single, num / gram)


def inner(g, X, Y):
    return np.einsum("...i,...ij,...j->...", X, g, Y)


def orthonormal_frame(g):
    """Gram-Schmidt of the coordinate basis against ``g``, lowest index
    first.  Column ``a`` of the result holds the components of ``e_a``."""
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    frame = np.zeros(g.shape)
    for a in range(n):
        v = np.zeros(g.shape[:-1])
        v[..., a] = 1.0
        for c in range(a):
            e = frame[..., :, c]
            v = v - inner(g, v, e)[..., None] * e
        v = v / np.sqrt(inner(g, v, v))[..., None]
        frame[..., :, a] = v
    return frame


# --- vector fields ---------------------------------------------------------

class VectorField:
    """A tangent vector field: components and first partials at points.

    ``evaluate`` returns ``(v, dv)`` with ``dv[..., i, k] = d_i v^k``.
    """

    dim: int

    def evaluate(self, points):
        raise NotImplementedError


class ExprVectorField(VectorField):
    def __init__(self, components, coords):
        if len(components) != len(coords):
            raise ValueError(f"vector field needs {len(coords)} components, got {len(components)}")
        self.dim = len(coords)
        self.coords = tuple(coords)
        self.components = [c if not isinstance(c, str) else parse(c, coords) for c in components]
        self.tape = Tape(self.components, self.dim)

    def evaluate(self, points):
        out = self.tape.evaluate(np.atleast_2d(points))
        return out[..., 0], np.swapaxes(out[..., 1:1 + self.dim], -1, -2)


def covariant_jacobian(con: Connection, v, dv):
    """``N[..., i, k] = (nabla_{d_i} v)^k``."""
    return dv + np.einsum("...kij,...j->...ik", con.christoffel, v)


def covariant_derivative(metric: MetricField, p, field: VectorField, Z):
    """``nabla_Z field`` in chart components."""
    pts, single = _batch(p, metric.dim)
    con = connection(metric, pts)
    v, dv = field.evaluate(pts)
    Z = _vec(Z, pts.shape[0])
    return _unbatch(single, np.einsum("...i,...ik->...k", Z, covariant_jacobian(con, v, dv)))


def lie_derivative_from(con: Connection, v, dv):
    nab = covariant_jacobian(con, v, dv)
    low = np.einsum("...ik,...kj->...ij", nab, con.g)   # g(nabla_i v, d_j)
    return low + np.swapaxes(low, -1, -2)


def lie_derivative_metric(metric: MetricField, p, field: VectorField):
    """Components ``(L_v g)_ij = g(nabla_i v, d_j) + g(nabla_j v, d_i)``."""
    pts, single = _batch(p, metric.dim)
    con = connection(metric, pts)
    v, dv = field.evaluate(pts)
    return _unbatch(single, lie_derivative_from(con, v, dv))


def gradient(metric: MetricField, p, f):
    """Gradient of a scalar expression (Expr or source in chart coordinates)."""
    pts, single = _batch(p, metric.dim)
    if isinstance(f, str):
        coords = getattr(metric, "coords", None) or (metric.chart.names if metric.chart else None)
        if coords is None:
            raise ValueError("metric has no coordinate names; pass a parsed Expr")
        f = parse(f, coords)
    tape = Tape([f], metric.dim)
    df = tape.evaluate(pts)[:, 0, 1:1 + metric.dim]
    g = metric.values(pts)
    check_metric(g, pts)
    return _unbatch(single, np.linalg.solve(g, df[..., None])[..., 0])


def g_norm(B, ginv):
    """``sqrt(tr(g^-1 B g^-1 B^T))``: the orthonormal-frame Frobenius norm
    of a bilinear form."""
    return np.sqrt(np.abs(np.einsum("...ij,...jk,...kl,...il->...", ginv, B, ginv, B)))


def vector_norm(g, v):
    return np.sqrt(np.abs(inner(g, v, v)))
