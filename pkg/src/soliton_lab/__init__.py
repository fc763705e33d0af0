"""Numerical verification of Ricci solitons whose potential is a concurrent
vector field, and of the submanifold criteria built on the position field.

Derivatives come from order-3 jets propagated through compiled expression
tapes (a compiled kernel when available, numpy otherwise), so curvature
identities hold to rounding rather than to a finite-difference step.
"""

__version__ = "0.1.0"

from .backend import kernel as _kernel  # noqa: E402

BACKEND = _kernel.NAME

__all__ = ["BACKEND", "__version__"]
