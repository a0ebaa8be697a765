"""Pauli-string algebra and matrix realization.

Operators are weighted tensor products of single-site Pauli matrices
(:class:`PauliString`) and sums thereof (:class:`OperatorSum`).  The basis
convention is fixed once for the whole package: states live in the
computational (Z) basis and **site 0 is the most significant qubit**, i.e.
basis index ``b`` assigns to site ``s`` the bit ``(b >> (n_sites - 1 - s)) & 1``.

The textual round-trip format is ``<coefficient> * <axis><site> ...``, for
example ``1.0 * X0 Z1 X2`` or ``(0.5+1j) * Y3``.  The identity is written
``1.0 *`` with no factors.  Coefficients are Python float/complex literals.
"""

from __future__ import annotations

import re
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

from .errors import CapacityError, DimensionError

__all__ = [
    "PauliString",
    "OperatorSum",
    "multiply",
    "commutes",
    "commutator_norm",
    "realize",
    "PAULI_MATRICES",
]

DENSE_MAX_SITES = 14
SPARSE_MAX_SITES = 24

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

# single-site products: (a, b) -> (phase, axis), with "I" for a == b
_SINGLE_PRODUCT = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_FACTOR_RE = re.compile(r"^([XYZ])(\d+)$")


class PauliString:
    """A signed/weighted product of single-site Pauli operators.

    Parameters
    ----------
    n_sites : int
        Number of sites the operator acts on (identity on absent sites).
    factors : mapping {site: axis} or iterable of (site, axis) pairs
        ``axis`` is one of ``"X"``, ``"Y"``, ``"Z"``; sites are 0-based.
    coefficient : complex
        Scalar weight; finite.  Real for every Hamiltonian term here, but
        products generate imaginary phases, so storage is complex.
    """

    __slots__ = ("n_sites", "_factors", "coefficient")

    def __init__(self, n_sites, factors=None, coefficient=1.0):
        if not isinstance(n_sites, (int, np.integer)) or n_sites < 1:
            raise DimensionError(f"n_sites must be a positive integer, got {n_sites!r}")
        if factors is None:
            factors = {}
        if isinstance(factors, Mapping):
            items = factors.items()
        else:
            items = list(factors)
        norm = {}
        for site, axis in items:
            site = int(site)
            if not 0 <= site < n_sites:
                raise DimensionError(f"site {site} outside [0, {n_sites})")
            if axis not in ("X", "Y", "Z"):
                raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
            if site in norm:
                raise ValueError(f"duplicate site {site} in factors")
            norm[site] = axis
        coefficient = complex(coefficient)
        if not np.isfinite(coefficient.real) or not np.isfinite(coefficient.imag):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "n_sites", int(n_sites))
        object.__setattr__(self, "_factors", tuple(sorted(norm.items())))
        object.__setattr__(self, "coefficient", coefficient)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @property
    def factors(self):
        """Site -> axis map (a fresh dict; absent sites are identity)."""
        return dict(self._factors)

    @property
    def factor_items(self):
        """Canonical (site, axis) tuple, sorted by site."""
        return self._factors

    @property
    def weight(self):
        """Number of non-identity sites."""
        return len(self._factors)

    @property
    def is_identity(self):
        return not self._factors

    def with_coefficient(self, coefficient):
        """Copy with a replaced scalar coefficient."""
        return PauliString(self.n_sites, self._factors, coefficient)

    def scaled(self, factor):
        return PauliString(self.n_sites, self._factors, self.coefficient * factor)

    def masks(self):
        """Return ``(mx, mz, n_y)``: X- and Z-component bit masks plus Y count.

        Bit ``n_sites - 1 - s`` represents site ``s`` (site 0 = MSB).  The
        string equals ``coefficient * i**n_y * X(mx) * Z(mz)`` with
        ``X(mx) Z(mz) |b> = (-1)**popcount(b & mz) |b ^ mx>``.
        """
        mx = 0
        mz = 0
        n_y = 0
        n = self.n_sites
        for site, axis in self._factors:
            bit = 1 << (n - 1 - site)
            if axis != "Z":
                mx |= bit
            if axis != "X":
                mz |= bit
            if axis == "Y":
                n_y += 1
        return mx, mz, n_y

    def to_text(self):
        """Serialize to the documented ``coeff * X0 Z1 ...`` format."""
        c = self.coefficient
        coeff = repr(c.real) if c.imag == 0.0 else repr(c)
        body = " ".join(f"{axis}{site}" for site, axis in self._factors) or "I"
        return f"{coeff} * {body}"

    @classmethod
    def from_text(cls, text, n_sites):
        """Parse the ``coeff * X0 Z1 ...`` format back into a string."""
        head, star, tail = text.partition("*")
        if not star:
            raise ValueError(f"missing '*' in {text!r}")
        try:
            coefficient = complex(head.strip())
        except ValueError as exc:
            raise ValueError(f"bad coefficient in {text!r}: {exc}") from None
        factors = []
        for token in tail.split():
            if token == "I":
                continue
            m = _FACTOR_RE.match(token)
            if m is None:
                raise ValueError(f"bad factor token {token!r} in {text!r}")
            factors.append((int(m.group(2)), m.group(1)))
        return cls(n_sites, factors, coefficient)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.n_sites == other.n_sites
            and self._factors == other._factors
            and self.coefficient == other.coefficient
        )

    def __hash__(self):
        return hash((self.n_sites, self._factors, self.coefficient))

    def __repr__(self):
        return f"PauliString({self.n_sites}, {self.to_text()!r})"


class OperatorSum:
    """A sum of :class:`PauliString` terms on a common set of sites.

    The term list may be empty (the zero operator).  Instances are immutable;
    arithmetic helpers return new objects.
    """

    __slots__ = ("n_sites", "terms")

    def __init__(self, n_sites, terms=()):
        terms = tuple(terms)
        for t in terms:
            if not isinstance(t, PauliString):
                raise TypeError(f"terms must be PauliString, got {type(t).__name__}")
            if t.n_sites != n_sites:
                raise DimensionError(
                    f"term on {t.n_sites} sites in an OperatorSum on {n_sites}"
                )
        object.__setattr__(self, "n_sites", int(n_sites))
        object.__setattr__(self, "terms", terms)

    def __setattr__(self, name, value):
        raise AttributeError("OperatorSum is immutable")

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __add__(self, other):
        other = as_operator_sum(other)
        if other.n_sites != self.n_sites:
            raise DimensionError("cannot add operators on different site counts")
        return OperatorSum(self.n_sites, self.terms + other.terms)

    def scaled(self, factor):
        return OperatorSum(self.n_sites, tuple(t.scaled(factor) for t in self.terms))

    def __rmul__(self, factor):
        return self.scaled(factor)

    def collect(self, drop_tol=0.0):
        """Merge terms with identical factors; drop |coefficient| <= drop_tol."""
        acc = {}
        for t in self.terms:
            acc[t.factor_items] = acc.get(t.factor_items, 0.0) + t.coefficient
        kept = [
            PauliString(self.n_sites, fac, c)
            for fac, c in sorted(acc.items())
            if abs(c) > drop_tol
        ]
        return OperatorSum(self.n_sites, kept)

    def to_text(self):
        return "\n".join(t.to_text() for t in self.terms)

    @classmethod
    def from_text(cls, text, n_sites):
        lines = [ln for ln in (ln.strip() for ln in text.splitlines()) if ln]
        return cls(n_sites, [PauliString.from_text(ln, n_sites) for ln in lines])

    def __eq__(self, other):
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.n_sites == other.n_sites and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_sites, self.terms))

    def __repr__(self):
        return f"OperatorSum({self.n_sites}, {len(self.terms)} terms)"


def as_operator_sum(op):
    """Coerce a PauliString into a one-term OperatorSum (sums pass through)."""
    if isinstance(op, OperatorSum):
        return op
    if isinstance(op, PauliString):
        return OperatorSum(op.n_sites, (op,))
    raise TypeError(f"expected PauliString or OperatorSum, got {type(op).__name__}")


def multiply(a, b):
    """Product of two Pauli strings with the phase folded into the coefficient.

    Sites where both operands act compose through the single-site Pauli table;
    the accumulated phase is in {1, -1, 1j, -1j} times the coefficients.
    """
    if a.n_sites != b.n_sites:
        raise DimensionError(f"n_sites mismatch: {a.n_sites} vs {b.n_sites}")
    fa = a.factors
    fb = b.factors
    phase = 1.0 + 0.0j
    out = {}
    for site in sorted(set(fa) | set(fb)):
        pa = fa.get(site)
        pb = fb.get(site)
        if pa is None:
            out[site] = pb
        elif pb is None:
            out[site] = pa
        elif pa == pb:
            pass  # squares to identity
        else:
            ph, axis = _SINGLE_PRODUCT[(pa, pb)]
            phase *= ph
            out[site] = axis
    return PauliString(a.n_sites, out, a.coefficient * b.coefficient * phase)


def commutes(a, b):
    """True iff the two strings commute.

    Two Pauli strings either commute or anticommute; the outcome is the parity
    of the number of sites where both act with different axes.
    """
    if a.n_sites != b.n_sites:
        raise DimensionError(f"n_sites mismatch: {a.n_sites} vs {b.n_sites}")
    fa = a.factors
    clashes = 0
    for site, axis in b.factor_items:
        other = fa.get(site)
        if other is not None and other != axis:
            clashes += 1
    return clashes % 2 == 0


def _term_entries(term, dim):
    """Vectorized (rows, cols, vals) for one string's matrix elements."""
    mx, mz, n_y = term.masks()
    cols = np.arange(dim, dtype=np.uint64)
    rows = cols ^ np.uint64(mx)
    signs = 1.0 - 2.0 * (np.bitwise_count(cols & np.uint64(mz)) & 1)
    vals = (term.coefficient * (1j) ** n_y) * signs
    return rows, cols, vals


def realize(op, format="dense"):
    """Realize an operator as an explicit matrix in the computational basis.

    Parameters
    ----------
    op : PauliString or OperatorSum
    format : "dense" | "sparse"
        Dense requires ``n_sites <= 14``; sparse (CSR) ``n_sites <= 24``.
        Assembly iterates terms in their stored order, so repeated builds are
        bit-identical.

    Returns
    -------
    numpy.ndarray (complex) or scipy.sparse.csr_matrix
    """
    op = as_operator_sum(op)
    n = op.n_sites
    dim = 1 << n
    if format == "dense":
        if n > DENSE_MAX_SITES:
            raise CapacityError(f"dense realization capped at {DENSE_MAX_SITES} sites, got {n}")
        mat = np.zeros((dim, dim), dtype=complex)
        for term in op.terms:
            rows, cols, vals = _term_entries(term, dim)
            mat[rows, cols] += vals
        return mat
    if format == "sparse":
        from scipy.sparse import coo_matrix

        if n > SPARSE_MAX_SITES:
            raise CapacityError(f"sparse realization capped at {SPARSE_MAX_SITES} sites, got {n}")
        all_rows = []
        all_cols = []
        all_vals = []
        for term in op.terms:
            rows, cols, vals = _term_entries(term, dim)
            all_rows.append(rows)
            all_cols.append(cols)
            all_vals.append(vals)
        if not all_rows:
            return coo_matrix((dim, dim), dtype=complex).tocsr()
        mat = coo_matrix(
            (
                np.concatenate(all_vals),
                (
                    np.concatenate(all_rows).astype(np.int64),
                    np.concatenate(all_cols).astype(np.int64),
                ),
            ),
            shape=(dim, dim),
        )
        return mat.tocsr()
    raise ValueError(f"format must be 'dense' or 'sparse', got {format!r}")


def kron_matrix(term):
    """Direct Kronecker-product realization of a single string (slow, small n).

    Retained as an independent route for cross-checks; `realize` assembles
    entries from bit masks instead.
    """
    mats = [PAULI_MATRICES[term.factors.get(s, "I")] for s in range(term.n_sites)]
    return term.coefficient * reduce(np.kron, mats)


def commutator_norm(a, b):
    """Largest-magnitude entry of the commutator [A, B], computed densely.

    Accepts strings or sums; capped at 14 sites.  A result at the 1e-12 scale
    indicates commuting operators.
    """
    a = as_operator_sum(a)
    b = as_operator_sum(b)
    if a.n_sites != b.n_sites:
        raise DimensionError(f"n_sites mismatch: {a.n_sites} vs {b.n_sites}")
    if a.n_sites > DENSE_MAX_SITES:
        raise CapacityError(
            f"commutator_norm needs a dense realization (<= {DENSE_MAX_SITES} sites)"
        )
    if not a.terms or not b.terms:
        return 0.0
    ma = realize(a)
    mb = realize(b)
    comm = ma @ mb - mb @ ma
    return float(np.max(np.abs(comm)))
