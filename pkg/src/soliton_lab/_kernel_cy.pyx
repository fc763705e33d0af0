# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled jet kernels; same API as ``_kernel_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, sqrt, pow

from ._opcodes import KernelDomainError

cnp.import_array()

NAME = "cython"

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_ADD = 2
    OP_SUB = 3
    OP_MUL = 4
    OP_DIV = 5
    OP_NEG = 6
    OP_SIN = 7
    OP_COS = 8
    OP_EXP = 9
    OP_SQRT = 10
    OP_POW = 11

OPCODES = {
    "const": OP_CONST, "var": OP_VAR, "add": OP_ADD, "sub": OP_SUB,
    "mul": OP_MUL, "div": OP_DIV, "neg": OP_NEG, "sin": OP_SIN,
    "cos": OP_COS, "exp": OP_EXP, "sqrt": OP_SQRT, "pow": OP_POW,
}


cdef void _mul_row(const double[:] a, const double[:] b, double[:] o,
                   const Py_ssize_t[:, :] pairs, const Py_ssize_t[:, :] triples,
                   Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t p2 = pairs.shape[0], p3 = triples.shape[0]
    cdef Py_ssize_t s1 = 1, s2 = 1 + n, s3 = 1 + n + p2
    cdef Py_ssize_t q, i, j, k
    cdef double a0 = a[0], b0 = b[0]
    o[0] = a0 * b0
    for q in range(n):
        o[s1 + q] = a0 * b[s1 + q] + b0 * a[s1 + q]
    for q in range(p2):
        i = pairs[q, 0]
        j = pairs[q, 1]
        o[s2 + q] = (a0 * b[s2 + q] + b0 * a[s2 + q]
                     + a[s1 + i] * b[s1 + j] + a[s1 + j] * b[s1 + i])
    for q in range(p3):
        i = triples[q, 0]
        j = triples[q, 1]
        k = triples[q, 2]
        o[s3 + q] = (a0 * b[s3 + q] + b0 * a[s3 + q]
                     + a[s1 + i] * b[s2 + triples[q, 3]]
                     + a[s1 + j] * b[s2 + triples[q, 4]]
                     + a[s1 + k] * b[s2 + triples[q, 5]]
                     + b[s1 + i] * a[s2 + triples[q, 3]]
                     + b[s1 + j] * a[s2 + triples[q, 4]]
                     + b[s1 + k] * a[s2 + triples[q, 5]])


cdef void _compose_row(const double[:] u, double f0, double f1, double f2, double f3,
                       double[:] o, const Py_ssize_t[:, :] pairs,
                       const Py_ssize_t[:, :] triples, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t p2 = pairs.shape[0], p3 = triples.shape[0]
    cdef Py_ssize_t s1 = 1, s2 = 1 + n, s3 = 1 + n + p2
    cdef Py_ssize_t q
    cdef double ui, uj, uk
    o[0] = f0
    for q in range(n):
        o[s1 + q] = f1 * u[s1 + q]
    for q in range(p2):
        o[s2 + q] = f1 * u[s2 + q] + f2 * u[s1 + pairs[q, 0]] * u[s1 + pairs[q, 1]]
    for q in range(p3):
        ui = u[s1 + triples[q, 0]]
        uj = u[s1 + triples[q, 1]]
        uk = u[s1 + triples[q, 2]]
        o[s3 + q] = (f1 * u[s3 + q]
                     + f2 * (ui * u[s2 + triples[q, 3]] + uj * u[s2 + triples[q, 4]]
                             + uk * u[s2 + triples[q, 5]])
                     + f3 * ui * uj * uk)


cdef void _derivs(int op, double x, long p, double* f) noexcept nogil:
    cdef double s, c, e, r, inv, coef
    cdef int q
    cdef long ex
    if op == OP_SIN:
        s = sin(x)
        c = cos(x)
        f[0] = s; f[1] = c; f[2] = -s; f[3] = -c
    elif op == OP_COS:
        s = sin(x)
        c = cos(x)
        f[0] = c; f[1] = -s; f[2] = -c; f[3] = s
    elif op == OP_EXP:
        e = exp(x)
        f[0] = e; f[1] = e; f[2] = e; f[3] = e
    elif op == OP_SQRT:
        r = sqrt(x)
        f[0] = r; f[1] = 0.5 / r; f[2] = -0.25 / (r * x); f[3] = 0.375 / (r * x * x)
    elif op == OP_DIV:
        inv = 1.0 / x
        f[0] = inv; f[1] = -inv * inv; f[2] = 2.0 * inv * inv * inv
        f[3] = -6.0 * inv * inv * inv * inv
    else:
        coef = 1.0
        for q in range(4):
            ex = p - q
            if coef == 0.0:
                f[q] = 0.0
            elif ex == 0:
                f[q] = coef
            else:
                f[q] = coef * pow(x, <double>ex)
            coef = coef * ex


def _tables(pairs, triples):
    return (np.ascontiguousarray(pairs, dtype=np.intp),
            np.ascontiguousarray(triples, dtype=np.intp))


def mul(a, b, pairs, triples, Py_ssize_t n):
    pairs, triples = _tables(pairs, triples)
    cdef const double[:, :] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, :] bv = np.ascontiguousarray(b, dtype=np.float64)
    out = np.empty((av.shape[0], av.shape[1]))
    cdef double[:, :] ov = out
    cdef const Py_ssize_t[:, :] pv = pairs
    cdef const Py_ssize_t[:, :] tv = triples
    cdef Py_ssize_t r
    with nogil:
        for r in range(av.shape[0]):
            _mul_row(av[r], bv[r], ov[r], pv, tv, n)
    return out


def compose(u, f, pairs, triples, Py_ssize_t n):
    pairs, triples = _tables(pairs, triples)
    cdef const double[:, :] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[:, :] fv = np.ascontiguousarray(f, dtype=np.float64)
    out = np.empty((uv.shape[0], uv.shape[1]))
    cdef double[:, :] ov = out
    cdef const Py_ssize_t[:, :] pv = pairs
    cdef const Py_ssize_t[:, :] tv = triples
    cdef Py_ssize_t r
    with nogil:
        for r in range(uv.shape[0]):
            _compose_row(uv[r], fv[r, 0], fv[r, 1], fv[r, 2], fv[r, 3], ov[r], pv, tv, n)
    return out


def unary_derivs(int op, x, long p=0):
    cdef const double[:] xv = np.ascontiguousarray(x, dtype=np.float64)
    f = np.empty((xv.shape[0], 4))
    cdef double[:, :] fv = f
    cdef Py_ssize_t r
    for r in range(xv.shape[0]):
        _derivs(op, xv[r], p, &fv[r, 0])
    return f


def eval_tape(code, consts, points, pairs, triples, Py_ssize_t n):
    pairs, triples = _tables(pairs, triples)
    cdef const long[:, :] cv = np.ascontiguousarray(code, dtype=np.int_)
    cdef const double[:] kv = np.ascontiguousarray(consts, dtype=np.float64)
    cdef const double[:, :] xv = np.ascontiguousarray(points, dtype=np.float64)
    cdef const Py_ssize_t[:, :] pv = pairs
    cdef const Py_ssize_t[:, :] tv = triples
    cdef Py_ssize_t nb = xv.shape[0], ni = cv.shape[0]
    cdef Py_ssize_t width = 1 + n + pv.shape[0] + tv.shape[0]
    regs = np.zeros((nb, ni, width))
    cdef double[:, :, :] rv = regs
    tmp = np.empty(width)
    cdef double[:] tmpv = tmp
    cdef double f[4]
    cdef Py_ssize_t r, ip, q
    cdef long op, a, b
    cdef double x
    cdef Py_ssize_t bad_ip = -1, bad_pt = -1
    cdef int reason = 0
    with nogil:
        for ip in range(ni):
            op = cv[ip, 0]
            a = cv[ip, 1]
            b = cv[ip, 2]
            for r in range(nb):
                if op == OP_CONST:
                    rv[r, ip, 0] = kv[a]
                elif op == OP_VAR:
                    rv[r, ip, 0] = xv[r, a]
                    rv[r, ip, 1 + a] = 1.0
                elif op == OP_ADD:
                    for q in range(width):
                        rv[r, ip, q] = rv[r, a, q] + rv[r, b, q]
                elif op == OP_SUB:
                    for q in range(width):
                        rv[r, ip, q] = rv[r, a, q] - rv[r, b, q]
                elif op == OP_NEG:
                    for q in range(width):
                        rv[r, ip, q] = -rv[r, a, q]
                elif op == OP_MUL:
                    _mul_row(rv[r, a], rv[r, b], rv[r, ip], pv, tv, n)
                elif op == OP_DIV:
                    x = rv[r, b, 0]
                    if x == 0.0:
                        bad_ip = ip; bad_pt = r; reason = 1
                        break
                    _derivs(OP_DIV, x, 0, f)
                    _compose_row(rv[r, b], f[0], f[1], f[2], f[3], tmpv, pv, tv, n)
                    _mul_row(rv[r, a], tmpv, rv[r, ip], pv, tv, n)
                else:
                    x = rv[r, a, 0]
                    if op == OP_SQRT and not (x > 0.0):
                        bad_ip = ip; bad_pt = r; reason = 2
                        break
                    if op == OP_POW and b < 0 and x == 0.0:
                        bad_ip = ip; bad_pt = r; reason = 3
                        break
                    _derivs(op, x, b, f)
                    _compose_row(rv[r, a], f[0], f[1], f[2], f[3], rv[r, ip], pv, tv, n)
            if bad_ip >= 0:
                break
    if bad_ip >= 0:
        msg = {1: "division by zero", 2: "sqrt of nonpositive value",
               3: "negative power of zero"}[reason]
        raise KernelDomainError(bad_ip, bad_pt, msg)
    return regs
