"""Model builders: cluster-chain Hamiltonians, the XY form, and symmetries.

Site indexing is 0-based throughout (the common physics convention numbers
sites from 1; subtract one).  Sublattice A is the even 0-based sites, B the
odd ones, so cells are the pairs (0,1), (2,3), ...

The three named operator blocks are

* ``h1``: sum of three-site stabilizer terms ``X_{i-1} Z_i X_{i+1}``
  (N-2 terms open, N terms periodic with wraparound),
* ``h2``: sum of single-site ``Z_i``,
* ``h3``: the transverse X field, either on every site (``x_field_mode
  "bulk"``) or only on the two edge sites (``"boundary"``),

and the full Hamiltonian is ``j1*(1+alpha)*h1 + j2*(1-alpha)*h2 - bx*h3``
plus an optional uniform ``bz * sum_i Z_i`` field.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DimensionError, ParameterError
from .pauli import OperatorSum, PauliString, multiply

__all__ = [
    "ModelParams",
    "ModelBundle",
    "build_cluster",
    "build_xy",
    "cz_chain_transform",
    "symmetry_generators",
    "cluster_field",
    "assemble_bundle",
    "stabilizer_sum",
    "z_field_sum",
    "x_field_sum",
    "boundary_x_sum",
]

BOUNDARIES = ("obc", "pbc")
X_FIELD_MODES = ("bulk", "boundary")


@dataclass(frozen=True)
class ModelParams:
    """Couplings and geometry of one model instance.

    ``j1``/``j2`` are restricted to +-1 and ``alpha`` to [-1, 1], so the two
    cluster couplings are ``j1*(1+alpha)`` and ``j2*(1-alpha)``.  ``bx`` is the
    transverse-field strength (nonnegative), applied bulk-wide or on the two
    edge sites depending on ``x_field_mode``; ``bz`` is a uniform Z field.
    """

    n_sites: int
    boundary: str = "obc"
    j1: int = 1
    j2: int = 1
    alpha: float = 0.0
    bx: float = 0.0
    bz: float = 0.0
    x_field_mode: str = "boundary"

    def __post_init__(self):
        if self.n_sites < 4 or self.n_sites % 2:
            raise ParameterError(f"n_sites must be even and >= 4, got {self.n_sites}")
        if self.boundary not in BOUNDARIES:
            raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.j1 not in (-1, 1) or self.j2 not in (-1, 1):
            raise ParameterError(f"j1, j2 must be +-1, got {self.j1}, {self.j2}")
        if not -1.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [-1, 1], got {self.alpha}")
        if self.bx < 0.0:
            raise ParameterError(f"bx must be nonnegative, got {self.bx}")
        if self.x_field_mode not in X_FIELD_MODES:
            raise ParameterError(
                f"x_field_mode must be one of {X_FIELD_MODES}, got {self.x_field_mode!r}"
            )


@dataclass(frozen=True)
class ModelBundle:
    """A Hamiltonian together with its three building blocks and norms.

    ``norms`` holds the coordinate denominators ``(n1, n2, 2)`` used by the
    boundary-field expectation triple: ``n1 = N-2`` open / ``N`` periodic,
    ``n2 = N``, and 2 for the two-edge X average.
    """

    hamiltonian: OperatorSum
    h1: OperatorSum
    h2: OperatorSum
    h3: OperatorSum
    norms: Tuple[float, float, float]
    params: Optional[ModelParams] = None

    @property
    def n_sites(self):
        return self.hamiltonian.n_sites


def _check_even(n):
    if n < 4 or n % 2:
        raise ParameterError(f"n_sites must be even and >= 4, got {n}")


def stabilizer_sum(n_sites, boundary="obc"):
    """Sum of three-site ``X Z X`` stabilizer terms.

    Open chains carry the N-2 interior-centered terms; periodic chains all N,
    including the two wraparound terms (at N=4 those are ``X2 Z3 X0`` and
    ``X3 Z0 X1``).
    """
    _check_even(n_sites)
    terms = []
    if boundary == "obc":
        centers = range(1, n_sites - 1)
    elif boundary == "pbc":
        centers = range(n_sites)
    else:
        raise ParameterError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    for c in centers:
        sites = ((c - 1) % n_sites, c, (c + 1) % n_sites)
        terms.append(PauliString(n_sites, {sites[0]: "X", sites[1]: "Z", sites[2]: "X"}))
    return OperatorSum(n_sites, terms)


def z_field_sum(n_sites):
    """Uniform Z field, one term per site."""
    return OperatorSum(n_sites, [PauliString(n_sites, {i: "Z"}) for i in range(n_sites)])


def x_field_sum(n_sites):
    """Uniform X field, one term per site."""
    return OperatorSum(n_sites, [PauliString(n_sites, {i: "X"}) for i in range(n_sites)])


def boundary_x_sum(n_sites):
    """X on the two edge sites only."""
    return OperatorSum(
        n_sites,
        [PauliString(n_sites, {0: "X"}), PauliString(n_sites, {n_sites - 1: "X"})],
    )


def assemble_bundle(n_sites, boundary, c1, c2, bx, bz=0.0, x_field_mode="boundary", params=None):
    """Assemble a :class:`ModelBundle` from raw coupling coefficients.

    ``hamiltonian = c1*h1 + c2*h2 - bx*h3 (+ bz * sum_i Z_i)``.  Groups whose
    scalar prefactor is exactly zero are dropped from the assembled sum (the
    blocks h1/h2/h3 themselves are always returned in full).  This is the
    low-level entry used by :func:`build_cluster` and by scans that need
    coefficients outside the ``j*(1 +- alpha)`` family (e.g. the field-only
    flat-facet experiment).
    """
    _check_even(n_sites)
    h1 = stabilizer_sum(n_sites, boundary)
    h2 = z_field_sum(n_sites)
    if x_field_mode == "bulk":
        h3 = x_field_sum(n_sites)
    elif x_field_mode == "boundary":
        h3 = boundary_x_sum(n_sites)
    else:
        raise ParameterError(
            f"x_field_mode must be one of {X_FIELD_MODES}, got {x_field_mode!r}"
        )
    terms = []
    if c1 != 0.0:
        terms += h1.scaled(c1).terms
    if c2 != 0.0:
        terms += h2.scaled(c2).terms
    if bx != 0.0:
        terms += h3.scaled(-bx).terms
    if bz != 0.0:
        terms += z_field_sum(n_sites).scaled(bz).terms
    ham = OperatorSum(n_sites, terms)
    n1 = n_sites - 2 if boundary == "obc" else n_sites
    return ModelBundle(ham, h1, h2, h3, (float(n1), float(n_sites), 2.0), params)


def build_cluster(params):
    """Build the cluster-chain Hamiltonian bundle for the given parameters."""
    return assemble_bundle(
        params.n_sites,
        params.boundary,
        params.j1 * (1.0 + params.alpha),
        params.j2 * (1.0 - params.alpha),
        params.bx,
        params.bz,
        params.x_field_mode,
        params=params,
    )


def cluster_field(n_sites, bz=0.0, boundary="obc"):
    """Stabilizer sum plus a uniform Z field (``sum XZX + bz * sum Z``).

    The plain cluster model in a longitudinal field.  Not expressible through
    :class:`ModelParams` (whose two couplings cannot be (1, 0)), hence this
    helper; used by the symmetry checks.
    """
    op = stabilizer_sum(n_sites, boundary)
    if bz != 0.0:
        op = op + z_field_sum(n_sites).scaled(bz)
    return op


def build_xy(params):
    """XY-model image of the cluster chain under the CZ/Hadamard chain.

    Open chains only.  Bonds with an odd 0-based left site carry coefficient
    ``j1*(1+alpha)``, bonds with an even left site ``j2*(1-alpha)``; each bond
    contributes ``X X + Z Z``.
    """
    if params.boundary != "obc":
        raise ParameterError("the XY mapping is derived for open chains only")
    n = params.n_sites
    c_odd = params.j1 * (1.0 + params.alpha)
    c_even = params.j2 * (1.0 - params.alpha)
    terms = []
    for left in range(1, n - 2, 2):
        for axis in ("X", "Z"):
            terms.append(
                PauliString(n, {left: axis, left + 1: axis}, c_odd)
            )
    for left in range(0, n - 1, 2):
        for axis in ("X", "Z"):
            terms.append(
                PauliString(n, {left: axis, left + 1: axis}, c_even)
            )
    return OperatorSum(n, terms)


# Generator substitution rules for the CZ-pair + A-sublattice-Hadamard chain.
# A = even 0-based site s (cell partner s+1), B = odd site s (partner s-1).
# Forward:  X_A -> Z_A,  Z_A -> X_A X_B,  X_B -> X_B,  Z_B -> Z_A Z_B
# Inverse:  X_A -> Z_A X_B,  Z_A -> X_A,  X_B -> X_B,  Z_B -> X_A Z_B
def _substitute(n, site, axis, inverse):
    a_site = site % 2 == 0
    if not inverse:
        if a_site:
            rules = {"X": {site: "Z"}, "Z": {site: "X", site + 1: "X"}}
        else:
            rules = {"X": {site: "X"}, "Z": {site - 1: "Z", site: "Z"}}
    else:
        if a_site:
            rules = {"X": {site: "Z", site + 1: "X"}, "Z": {site: "X"}}
        else:
            rules = {"X": {site: "X"}, "Z": {site - 1: "X", site: "Z"}}
    if axis in rules:
        return PauliString(n, rules[axis])
    # Y = i X Z, extended multiplicatively
    return multiply(PauliString(n, rules["X"], 1j), PauliString(n, rules["Z"]))


def cz_chain_transform(op, n_sites=None, inverse=False):
    """Conjugate an operator through the CZ-pair + sublattice-Hadamard chain.

    The transformation is applied by substituting each single-site generator
    and multiplying the images, so it scales to long chains without any dense
    matrices.  It maps the open cluster Hamiltonian onto the XY form and back
    (``inverse=True``).  Cells are the fixed pairs (0,1), (2,3), ...; there is
    no wraparound cell, so operators built for periodic chains are outside the
    mapping's derivation.

    Parameters
    ----------
    op : PauliString or OperatorSum
    n_sites : int, optional
        Must match ``op.n_sites`` when given (kept for call-site clarity).
    inverse : bool
        Apply the inverse substitution instead.

    Returns
    -------
    OperatorSum
    """
    from .pauli import as_operator_sum

    op = as_operator_sum(op)
    n = op.n_sites
    if n_sites is not None and n_sites != n:
        raise DimensionError(f"n_sites {n_sites} does not match operator ({n})")
    if n % 2:
        raise ParameterError(f"the transform needs an even chain, got n_sites={n}")
    out_terms = []
    for term in op.terms:
        image = PauliString(n, {}, term.coefficient)
        for site, axis in term.factor_items:
            image = multiply(image, _substitute(n, site, axis, inverse))
        out_terms.append(image)
    return OperatorSum(n, out_terms)


def symmetry_generators(n_sites):
    """The two Z-parity generators and the hidden-rotation generator.

    Returns
    -------
    (PauliString, PauliString, OperatorSum)
        ``o1``: product of Z over even 0-based sites (odd sites counted from
        one); ``o2``: over odd 0-based sites; ``u1``: the continuous-symmetry
        generator ``sum_cells (Y_s X_{s+1} - X_s Y_{s+1})`` over cell starts s.
    """
    _check_even(n_sites)
    o1 = PauliString(n_sites, {s: "Z" for s in range(0, n_sites, 2)})
    o2 = PauliString(n_sites, {s: "Z" for s in range(1, n_sites, 2)})
    u1_terms = []
    for s in range(0, n_sites, 2):
        u1_terms.append(PauliString(n_sites, {s: "Y", s + 1: "X"}, 1.0))
        u1_terms.append(PauliString(n_sites, {s: "X", s + 1: "Y"}, -1.0))
    return o1, o2, OperatorSum(n_sites, u1_terms)
