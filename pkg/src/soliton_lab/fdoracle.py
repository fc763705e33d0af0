"""Finite-difference oracle for curvature.

Independent of the jet machinery: it consumes only metric *values* and
differentiates them with fourth-order central stencils.  Used by the test
suite and the ``differentiation`` check to cross-examine jet results.
"""

from __future__ import annotations

import numpy as np

STEP = 1e-3
_W = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_OFF = np.array([-2.0, -1.0, 1.0, 2.0])


def partials(fn, points, h=STEP):
    """``out[..., k, *shape] = d_k fn`` by the five-point stencil."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[-1]
    cols = []
    for k in range(n):
        acc = 0.0
        for w, o in zip(_W, _OFF):
            q = pts.copy()
            q[:, k] += o * h
            acc = acc + w * fn(q)
        cols.append(acc / h)
    return np.stack(cols, axis=1)


def christoffel_fn(gfn, h=STEP):
    """Callable computing ``Gamma^k_ij`` from FD derivatives of ``gfn``."""

    def gamma(points):
        g = gfn(points)
        dg = partials(gfn, points, h)
        ginv = np.linalg.inv(g)
        low = 0.5 * (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg)
                     - dg)
        # low[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
        return np.einsum("...kl,...lij->...kij", ginv, low)

    return gamma


def christoffel(metric, points, h=STEP):
    return christoffel_fn(metric.values, h)(points)


def riemann(metric, points, h=STEP):
    """``R^l_ijk`` from nested finite differences (two layers)."""
    gam_fn = christoffel_fn(metric.values, h)
    gam = gam_fn(points)
    dgam = partials(gam_fn, points, h)          # dgam[m, k, i, j] = d_m Gamma^k_ij
    return (np.einsum("...iljk->...lijk", dgam)
            - np.einsum("...jlik->...lijk", dgam)
            + np.einsum("...lim,...mjk->...lijk", gam, gam)
            - np.einsum("...ljm,...mik->...lijk", gam, gam))


def relative_error(a, b):
    """``max |a - b| / max(1, max |b|)``."""
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))
