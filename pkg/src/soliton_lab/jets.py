"""Order-3 truncated Taylor arithmetic in ``n`` variables.

Second and third partials are stored packed over ``i <= j`` and
``i <= j <= k``, so symmetry holds by construction.  Heavy lifting happens
in the kernel picked by :mod:`soliton_lab.backend`; this module adds the
scalar :class:`Jet3` type and the layout bookkeeping.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _opcodes as ops
from .backend import kernel


class JetDomainError(ArithmeticError):
    """An elementary function was applied outside its domain."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at point {tuple(float(c) for c in point)}"
        super().__init__(message)
        self.point = None if point is None else tuple(float(c) for c in point)


@dataclass(frozen=True, eq=False)
class Layout:
    n: int
    pairs: np.ndarray     # (P2, 2)
    triples: np.ndarray   # (P3, 6): i, j, k, pos(j,k), pos(i,k), pos(i,j)
    idx2: np.ndarray      # (n, n) -> packed pair position
    idx3: np.ndarray      # (n, n, n) -> packed triple position

    @property
    def width(self):
        return 1 + self.n + len(self.pairs) + len(self.triples)

    @property
    def s2(self):
        return 1 + self.n

    @property
    def s3(self):
        return 1 + self.n + len(self.pairs)

    def unpack2(self, packed):
        """Packed d2 block(s) ``(..., P2)`` -> full symmetric ``(..., n, n)``."""
        return packed[..., self.idx2]

    def unpack3(self, packed):
        return packed[..., self.idx3]

    def split(self, data):
        """Split jet rows ``(..., width)`` into value, d1, full d2, full d3."""
        return (data[..., 0], data[..., 1:self.s2],
                self.unpack2(data[..., self.s2:self.s3]),
                self.unpack3(data[..., self.s3:]))


@functools.lru_cache(maxsize=None)
def layout(n: int) -> Layout:
    if n < 1:
        raise ValueError(f"jet needs at least one variable, got n={n}")
    pairs = list(itertools.combinations_with_replacement(range(n), 2))
    pos2 = {p: q for q, p in enumerate(pairs)}
    idx2 = np.empty((n, n), dtype=np.intp)
    for i, j in itertools.product(range(n), repeat=2):
        idx2[i, j] = pos2[tuple(sorted((i, j)))]
    trip = list(itertools.combinations_with_replacement(range(n), 3))
    pos3 = {t: q for q, t in enumerate(trip)}
    idx3 = np.empty((n, n, n), dtype=np.intp)
    for t in itertools.product(range(n), repeat=3):
        idx3[t] = pos3[tuple(sorted(t))]
    triples = np.array([(i, j, k, pos2[(j, k)], pos2[(i, k)], pos2[(i, j)])
                        for i, j, k in trip], dtype=np.intp).reshape(-1, 6)
    for arr in (idx2, idx3, triples):
        arr.setflags(write=False)
    pairs_arr = np.array(pairs, dtype=np.intp).reshape(-1, 2)
    pairs_arr.setflags(write=False)
    return Layout(n, pairs_arr, triples, idx2, idx3)


class Jet3:
    """Value and all partial derivatives through order 3 of a scalar.

    Instances are immutable.  ``point`` (optional) is carried along only
    to make domain errors report where they happened.
    """

    __slots__ = ("_data", "_layout", "point")

    def __init__(self, data, n, point=None):
        lay = layout(n)
        data = np.array(data, dtype=float)
        if data.shape != (lay.width,):
            raise ValueError(f"jet of {n} variables needs {lay.width} entries, got {data.shape}")
        data.setflags(write=False)
        self._data = data
        self._layout = lay
        self.point = point

    @classmethod
    def constant(cls, c, n, point=None):
        data = np.zeros(layout(n).width)
        data[0] = c
        return cls(data, n, point)

    @property
    def n(self):
        return self._layout.n

    @property
    def data(self):
        return self._data

    @property
    def value(self):
        return float(self._data[0])

    @property
    def d1(self):
        return self._data[1:self._layout.s2]

    @property
    def d2_packed(self):
        return self._data[self._layout.s2:self._layout.s3]

    @property
    def d3_packed(self):
        return self._data[self._layout.s3:]

    @property
    def d2(self):
        return self._layout.unpack2(self.d2_packed)

    @property
    def d3(self):
        return self._layout.unpack3(self.d3_packed)

    def __repr__(self):
        return f"Jet3(n={self.n}, value={self.value!r}, d1={self.d1.tolist()!r})"

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Jet3):
            if other.n != self.n:
                raise ValueError(f"jets over different variable counts: {self.n} vs {other.n}")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet3.constant(float(other), self.n, self.point)
        return NotImplemented

    def _wrap(self, data, other=None):
        pt = self.point if self.point is not None else getattr(other, "point", None)
        return Jet3(data, self.n, pt)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self._data + other._data, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._wrap(self._data - other._data, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return self._wrap(-self._data)

    def __pos__(self):
        return self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        lay = self._layout
        out = kernel.mul(self._data[None], other._data[None], lay.pairs, lay.triples, lay.n)
        return self._wrap(out[0], other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * _unary(ops.OP_DIV, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) or (isinstance(p, float) and p.is_integer()):
            return power(self, int(p))
        return NotImplemented


def _unary(op, u, p=0):
    x = u.value
    if op == ops.OP_DIV and x == 0.0:
        raise JetDomainError("division by zero", u.point)
    if op == ops.OP_SQRT and not x > 0.0:
        raise JetDomainError(f"sqrt of nonpositive value {x!r}", u.point)
    if op == ops.OP_POW and p < 0 and x == 0.0:
        raise JetDomainError("negative power of zero", u.point)
    lay = u._layout
    f = kernel.unary_derivs(op, np.array([x]), p)
    out = kernel.compose(u.data[None], f, lay.pairs, lay.triples, lay.n)
    return Jet3(out[0], u.n, u.point)


def sin(u: Jet3) -> Jet3:
    return _unary(ops.OP_SIN, u)


def cos(u: Jet3) -> Jet3:
    return _unary(ops.OP_COS, u)


def exp(u: Jet3) -> Jet3:
    return _unary(ops.OP_EXP, u)


def sqrt(u: Jet3) -> Jet3:
    return _unary(ops.OP_SQRT, u)


def power(u: Jet3, p: int) -> Jet3:
    """Integer power ``u**p``."""
    if not isinstance(p, (int, np.integer)):
        raise TypeError(f"integer exponent required, got {p!r}")
    return _unary(ops.OP_POW, u, int(p))


def seed(point, var_index: int) -> Jet3:
    """The coordinate function ``x[var_index]`` as a jet at ``point``."""
    coords = tuple(float(c) for c in np.atleast_1d(point))
    n = len(coords)
    if not 0 <= var_index < n:
        raise IndexError(f"variable index {var_index} out of range for {n} coordinates")
    if not all(math.isfinite(c) for c in coords):
        raise ValueError(f"non-finite coordinate in {coords}")
    data = np.zeros(layout(n).width)
    data[0] = coords[var_index]
    data[1 + var_index] = 1.0
    return Jet3(data, n, coords)


def seed_all(point):
    """All coordinate jets at ``point``."""
    n = len(np.atleast_1d(point))
    return [seed(point, i) for i in range(n)]
