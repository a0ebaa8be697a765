"""Fast application of Pauli operators to dense state vectors.

Every exact-diagonalization matvec in the package funnels through here.  Terms
are precompiled into bit masks once (:func:`compile_terms`) and then applied
by one of two interchangeable backends:

* ``clusterhull._kernels`` -- Cython extension, built at install time;
* ``clusterhull._kernels_py`` -- pure numpy fallback.

The compiled backend is used when importable unless the environment variable
``CLUSTERHULL_PURE`` is set to a non-empty value.  ``BACKEND`` records the
choice; ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DimensionError
from .pauli import as_operator_sum

__all__ = ["TermTable", "compile_terms", "apply_terms", "linear_operator", "BACKEND"]

if os.environ.get("CLUSTERHULL_PURE"):
    from . import _kernels_py as _backend

    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _backend  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _backend

        BACKEND = "numpy"


class TermTable:
    """Mask-compiled form of an OperatorSum.

    Attributes
    ----------
    n_sites, dim : int
    mx, mz : uint64 arrays, one entry per term
        X-component and Z-component site masks (site 0 = most significant bit).
    weights : complex128 array
        Term coefficients with the ``i**n_Y`` phase folded in.
    is_real : bool
        True when every folded weight is real; such operators map real vectors
        to real vectors and are Hermitian with a real matrix.
    """

    __slots__ = ("n_sites", "dim", "mx", "mz", "weights", "real_weights", "is_real")

    def __init__(self, n_sites, mx, mz, weights):
        self.n_sites = n_sites
        self.dim = 1 << n_sites
        self.mx = mx
        self.mz = mz
        self.weights = weights
        self.is_real = bool(np.all(weights.imag == 0.0))
        self.real_weights = weights.real.copy() if self.is_real else None

    def __len__(self):
        return len(self.weights)


def compile_terms(op):
    """Compile a PauliString/OperatorSum into a :class:`TermTable`."""
    op = as_operator_sum(op)
    nt = len(op.terms)
    mx = np.empty(nt, dtype=np.uint64)
    mz = np.empty(nt, dtype=np.uint64)
    weights = np.empty(nt, dtype=np.complex128)
    for t, term in enumerate(op.terms):
        x, z, n_y = term.masks()
        mx[t] = x
        mz[t] = z
        weights[t] = term.coefficient * (1j) ** n_y
    return TermTable(op.n_sites, mx, mz, weights)


def apply_terms(table, vec, out=None):
    """Return ``op @ vec`` (accumulating into ``out`` when provided).

    Real tables keep real vectors real; any complex input or complex table
    promotes the computation to complex128.
    """
    vec = np.asarray(vec)
    if vec.shape != (table.dim,):
        raise DimensionError(f"vector shape {vec.shape} does not match dim {table.dim}")
    real_path = table.is_real and not np.iscomplexobj(vec)
    dtype = np.float64 if real_path else np.complex128
    v = np.ascontiguousarray(vec, dtype=dtype)
    if out is None:
        out = np.zeros(table.dim, dtype=dtype)
    if real_path:
        _backend.apply_real(table.mx, table.mz, table.real_weights, v, out)
    else:
        _backend.apply_complex(table.mx, table.mz, table.weights, v, out)
    return out


def linear_operator(op):
    """Wrap an operator as a scipy ``LinearOperator`` over its term table."""
    from scipy.sparse.linalg import LinearOperator

    table = op if isinstance(op, TermTable) else compile_terms(op)
    dtype = np.float64 if table.is_real else np.complex128

    def matvec(v):
        return apply_terms(table, np.asarray(v).ravel())

    return LinearOperator((table.dim, table.dim), matvec=matvec, dtype=dtype)
