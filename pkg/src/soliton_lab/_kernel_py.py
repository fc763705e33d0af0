"""Pure-numpy jet kernels, batched over a leading point axis.

A jet row has length ``1 + n + P2 + P3`` laid out as
``[value, d1[0..n), d2 packed (i<=j), d3 packed (i<=j<=k)]``.
``pairs`` is a (P2, 2) table of (i, j); ``triples`` is a (P3, 6) table of
(i, j, k, pos(j,k), pos(i,k), pos(i,j)) where ``pos`` indexes the packed d2
block.  The compiled kernel in ``_kernel_cy.pyx`` implements the same
functions with the same signatures.
"""

import numpy as np

from ._opcodes import (
    OP_ADD, OP_CONST, OP_COS, OP_DIV, OP_EXP, OP_MUL, OP_NEG, OP_POW,
    OP_SIN, OP_SQRT, OP_SUB, OP_VAR, OPCODES, KernelDomainError,
)

NAME = "python"


def _split(a, n, p2):
    return a[:, 0], a[:, 1:1 + n], a[:, 1 + n:1 + n + p2], a[:, 1 + n + p2:]


def mul(a, b, pairs, triples, n):
    p2 = pairs.shape[0]
    a0, a1, a2, a3 = _split(a, n, p2)
    b0, b1, b2, b3 = _split(b, n, p2)
    out = np.empty_like(a)
    o0, o1, o2, o3 = _split(out, n, p2)
    o0[:] = a0 * b0
    o1[:] = a0[:, None] * b1 + b0[:, None] * a1
    pi, pj = pairs[:, 0], pairs[:, 1]
    o2[:] = (a0[:, None] * b2 + b0[:, None] * a2
             + a1[:, pi] * b1[:, pj] + a1[:, pj] * b1[:, pi])
    ti, tj, tk = triples[:, 0], triples[:, 1], triples[:, 2]
    qjk, qik, qij = triples[:, 3], triples[:, 4], triples[:, 5]
    o3[:] = (a0[:, None] * b3 + b0[:, None] * a3
             + a1[:, ti] * b2[:, qjk] + a1[:, tj] * b2[:, qik] + a1[:, tk] * b2[:, qij]
             + b1[:, ti] * a2[:, qjk] + b1[:, tj] * a2[:, qik] + b1[:, tk] * a2[:, qij])
    return out


def compose(u, f, pairs, triples, n):
    """Chain rule through order 3: ``f[:, r]`` is the r-th derivative of the
    outer scalar function evaluated at ``u[:, 0]``."""
    p2 = pairs.shape[0]
    u0, u1, u2, u3 = _split(u, n, p2)
    f1, f2, f3 = f[:, 1:2], f[:, 2:3], f[:, 3:4]
    out = np.empty_like(u)
    o0, o1, o2, o3 = _split(out, n, p2)
    o0[:] = f[:, 0]
    o1[:] = f1 * u1
    pi, pj = pairs[:, 0], pairs[:, 1]
    o2[:] = f1 * u2 + f2 * u1[:, pi] * u1[:, pj]
    ti, tj, tk = triples[:, 0], triples[:, 1], triples[:, 2]
    qjk, qik, qij = triples[:, 3], triples[:, 4], triples[:, 5]
    ui, uj, uk = u1[:, ti], u1[:, tj], u1[:, tk]
    o3[:] = (f1 * u3
             + f2 * (ui * u2[:, qjk] + uj * u2[:, qik] + uk * u2[:, qij])
             + f3 * ui * uj * uk)
    return out


def unary_derivs(op, x, p=0):
    """Derivatives 0..3 of the elementary function ``op`` at values ``x``."""
    f = np.empty((x.shape[0], 4))
    if op == OP_SIN:
        s, c = np.sin(x), np.cos(x)
        f[:, 0], f[:, 1], f[:, 2], f[:, 3] = s, c, -s, -c
    elif op == OP_COS:
        s, c = np.sin(x), np.cos(x)
        f[:, 0], f[:, 1], f[:, 2], f[:, 3] = c, -s, -c, s
    elif op == OP_EXP:
        e = np.exp(x)
        f[:] = e[:, None]
    elif op == OP_SQRT:
        r = np.sqrt(x)
        f[:, 0] = r
        f[:, 1] = 0.5 / r
        f[:, 2] = -0.25 / (r * x)
        f[:, 3] = 0.375 / (r * x * x)
    elif op == OP_DIV:
        # reciprocal
        inv = 1.0 / x
        f[:, 0] = inv
        f[:, 1] = -inv * inv
        f[:, 2] = 2.0 * inv ** 3
        f[:, 3] = -6.0 * inv ** 4
    elif op == OP_POW:
        coef = 1.0
        for r in range(4):
            e = p - r
            if coef == 0.0:
                f[:, r] = 0.0
            else:
                f[:, r] = coef * x ** float(e) if e != 0 else coef
            coef *= e
    else:
        raise ValueError(f"not a unary opcode: {op}")
    return f


def eval_tape(code, consts, points, pairs, triples, n):
    """Evaluate an instruction tape at every row of ``points``.

    ``code`` is an (I, 3) integer array of (opcode, a, b).  Returns the
    register file as a (B, I, L) array.
    """
    code = np.asarray(code)
    points = np.asarray(points, dtype=float)
    nb = points.shape[0]
    p2, p3 = pairs.shape[0], triples.shape[0]
    width = 1 + n + p2 + p3
    regs = np.zeros((nb, code.shape[0], width))
    for ip in range(code.shape[0]):
        op, a, b = (int(v) for v in code[ip])
        if op == OP_CONST:
            regs[:, ip, 0] = consts[a]
        elif op == OP_VAR:
            regs[:, ip, 0] = points[:, a]
            regs[:, ip, 1 + a] = 1.0
        elif op == OP_ADD:
            regs[:, ip] = regs[:, a] + regs[:, b]
        elif op == OP_SUB:
            regs[:, ip] = regs[:, a] - regs[:, b]
        elif op == OP_NEG:
            regs[:, ip] = -regs[:, a]
        elif op == OP_MUL:
            regs[:, ip] = mul(regs[:, a], regs[:, b], pairs, triples, n)
        elif op == OP_DIV:
            den = regs[:, b, 0]
            bad = np.flatnonzero(den == 0.0)
            if bad.size:
                raise KernelDomainError(ip, int(bad[0]), "division by zero")
            rec = compose(regs[:, b], unary_derivs(OP_DIV, den), pairs, triples, n)
            regs[:, ip] = mul(regs[:, a], rec, pairs, triples, n)
        elif op in (OP_SIN, OP_COS, OP_EXP, OP_SQRT, OP_POW):
            x = regs[:, a, 0]
            if op == OP_SQRT:
                bad = np.flatnonzero(~(x > 0.0))
                if bad.size:
                    raise KernelDomainError(ip, int(bad[0]), "sqrt of nonpositive value")
            if op == OP_POW and b < 0:
                bad = np.flatnonzero(x == 0.0)
                if bad.size:
                    raise KernelDomainError(ip, int(bad[0]), "negative power of zero")
            regs[:, ip] = compose(regs[:, a], unary_derivs(op, x, b), pairs, triples, n)
        else:
            raise ValueError(f"bad opcode {op} at {ip}")
    return regs
