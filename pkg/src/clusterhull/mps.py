"""Matrix-product states with a movable canonical center.

Site tensors have shape ``(chi_left, 2, chi_right)`` with dummy unit bonds at
both chain ends.  Tensors strictly left of the canonical center are left
isometries, tensors right of it right isometries; the center tensor carries
the state's norm.  The dense-vector convention matches the rest of the
package: site 0 is the most significant bit.

Checkpoints are numpy ``.npz`` archives (format version 1): one array per
site tensor plus a JSON metadata blob with shapes, the bond cap, the center,
and any engine info such as the resolved evolution schedule.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DimensionError
from .pauli import PAULI_MATRICES, as_operator_sum

__all__ = ["MatrixProductState", "mps_expectation"]

CHECKPOINT_VERSION = 1


class MatrixProductState:
    """Open-boundary MPS; mutated in place by gate applications.

    Attributes
    ----------
    tensors : list of ndarray, shape (chi_l, 2, chi_r)
    max_bond : int
        Bond cap used by truncating operations.
    canonical_center : int or None
        Site carrying the norm; None when the gauge is unknown.
    truncation_log : list of float
        Discarded-weight fractions recorded by truncating operations; callers
        (the evolution loop) reset and aggregate it.
    info : dict
        Free-form engine metadata (energy, sweep counts, ...).
    """

    def __init__(self, tensors, max_bond, canonical_center=None):
        tensors = [np.asarray(t) for t in tensors]
        if not tensors:
            raise DimensionError("an MPS needs at least one site")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise DimensionError("boundary bonds must have dimension 1")
        for i, t in enumerate(tensors):
            if t.ndim != 3 or t.shape[1] != 2:
                raise DimensionError(f"site tensor {i} has shape {t.shape}, want (chi, 2, chi')")
            if i and t.shape[0] != tensors[i - 1].shape[2]:
                raise DimensionError(f"bond mismatch between sites {i - 1} and {i}")
        self.tensors = tensors
        self.max_bond = int(max_bond)
        self.canonical_center = canonical_center
        self.truncation_log = []
        self.info = {}

    @property
    def n_sites(self):
        return len(self.tensors)

    @property
    def bond_dims(self):
        """Internal bond dimensions (length n_sites - 1)."""
        return [t.shape[2] for t in self.tensors[:-1]]

    @classmethod
    def product_state(cls, n_sites, local=None, max_bond=2):
        """Uniform product state; ``local`` defaults to ``|+> = (1,1)/sqrt(2)``."""
        if local is None:
            local = np.array([1.0, 1.0]) / np.sqrt(2.0)
        local = np.asarray(local, dtype=float)
        t = local.reshape(1, 2, 1)
        mps = cls([t.copy() for _ in range(n_sites)], max_bond, canonical_center=0)
        return mps

    @classmethod
    def from_dense(cls, vec, max_bond=None):
        """Exact MPS factorization of a dense state vector (for small chains)."""
        vec = np.asarray(vec)
        n = int(np.log2(vec.size))
        if 1 << n != vec.size:
            raise DimensionError(f"vector length {vec.size} is not a power of 2")
        cap = max_bond if max_bond is not None else vec.size
        tensors = []
        discarded = []
        rest = vec.reshape(1, -1)
        for _ in range(n - 1):
            chi_l = rest.shape[0]
            m = rest.reshape(chi_l * 2, -1)
            u, s, vh = np.linalg.svd(m, full_matrices=False)
            keep = min(cap, np.count_nonzero(s > s[0] * 1e-14) if s.size else 1)
            keep = max(keep, 1)
            total = float(np.sum(s**2))
            if total > 0.0:
                discarded.append(float(np.sum(s[keep:] ** 2)) / total)
            tensors.append(u[:, :keep].reshape(chi_l, 2, keep))
            rest = s[:keep, None] * vh[:keep]
        tensors.append(rest.reshape(rest.shape[0], 2, 1))
        mps = cls(tensors, cap, canonical_center=n - 1)
        for w in discarded:
            mps.record_truncation(w)
        return mps

    def copy(self):
        dup = MatrixProductState(
            [t.copy() for t in self.tensors], self.max_bond, self.canonical_center
        )
        dup.info = dict(self.info)
        return dup

    def to_dense(self):
        """Contract to a dense vector; exponential in n_sites, test-sized only."""
        psi = self.tensors[0]
        for t in self.tensors[1:]:
            psi = np.tensordot(psi, t, axes=[[-1], [0]])
        return psi.reshape(-1)

    def norm(self):
        if self.canonical_center is not None:
            return float(np.linalg.norm(self.tensors[self.canonical_center]))
        env = np.ones((1, 1))
        for t in self.tensors:
            env = np.einsum("xy,xsr,ysq->rq", env, t.conj(), t, optimize=True)
        return float(np.sqrt(abs(env[0, 0])))

    def normalize(self):
        """Scale the state to unit norm (canonicalizes first if needed)."""
        if self.canonical_center is None:
            self.canonicalize(0)
        c = self.canonical_center
        nrm = np.linalg.norm(self.tensors[c])
        if nrm == 0:
            raise ZeroDivisionError("cannot normalize a zero MPS")
        self.tensors[c] = self.tensors[c] / nrm
        return self

    def _shift_center_right(self, i):
        # QR split of site i; R absorbed into site i+1
        t = self.tensors[i]
        chi_l, _, chi_r = t.shape
        q, r = np.linalg.qr(t.reshape(chi_l * 2, chi_r))
        self.tensors[i] = q.reshape(chi_l, 2, q.shape[1])
        self.tensors[i + 1] = np.tensordot(r, self.tensors[i + 1], axes=[[1], [0]])

    def _shift_center_left(self, i):
        # split site i as C * B with B a right isometry; C absorbed into i-1
        t = self.tensors[i]
        chi_l, _, chi_r = t.shape
        m = t.reshape(chi_l, 2 * chi_r)
        q, r = np.linalg.qr(m.conj().T)
        b = q.conj().T
        c = r.conj().T
        self.tensors[i] = b.reshape(b.shape[0], 2, chi_r)
        self.tensors[i - 1] = np.tensordot(self.tensors[i - 1], c, axes=[[2], [0]])

    def move_center(self, target):
        """Move the canonical center to ``target`` with exact QR shifts."""
        if not 0 <= target < self.n_sites:
            raise DimensionError(f"center {target} outside chain of {self.n_sites}")
        if self.canonical_center is None:
            self.canonicalize(target)
            return self
        while self.canonical_center < target:
            self._shift_center_right(self.canonical_center)
            self.canonical_center += 1
        while self.canonical_center > target:
            self._shift_center_left(self.canonical_center)
            self.canonical_center -= 1
        return self

    def canonicalize(self, center):
        """Rebuild the mixed-canonical gauge from scratch around ``center``."""
        if not 0 <= center < self.n_sites:
            raise DimensionError(f"center {center} outside chain of {self.n_sites}")
        for i in range(center):
            self._shift_center_right(i)
        for i in range(self.n_sites - 1, center, -1):
            self._shift_center_left(i)
        self.canonical_center = center
        return self

    def check_canonical(self, tol=1e-10):
        """Max deviation from the isometry conditions around the center."""
        c = self.canonical_center
        if c is None:
            raise ValueError("no canonical center set")
        worst = 0.0
        for i, t in enumerate(self.tensors):
            chi_l, _, chi_r = t.shape
            if i < c:
                m = t.reshape(chi_l * 2, chi_r)
                dev = np.max(np.abs(m.conj().T @ m - np.eye(chi_r)))
            elif i > c:
                m = t.reshape(chi_l, 2 * chi_r)
                dev = np.max(np.abs(m @ m.conj().T - np.eye(chi_l)))
            else:
                continue
            worst = max(worst, float(dev))
        if worst > tol:
            raise ValueError(f"canonical-form deviation {worst:.3e} exceeds {tol}")
        return worst

    def record_truncation(self, weight):
        self.truncation_log.append(float(weight))

    def save_npz(self, path, extra_meta=None):
        """Write a version-1 checkpoint (tensors + JSON metadata)."""
        meta = {
            "format_version": CHECKPOINT_VERSION,
            "n_sites": self.n_sites,
            "max_bond": self.max_bond,
            "canonical_center": self.canonical_center,
            "shapes": [list(t.shape) for t in self.tensors],
            "info": _jsonable(self.info),
        }
        if extra_meta:
            meta.update(_jsonable(extra_meta))
        arrays = {f"site_{i:04d}": t for i, t in enumerate(self.tensors)}
        np.savez(path, meta=np.bytes_(json.dumps(meta)), **arrays)

    @classmethod
    def load_npz(cls, path):
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if meta["format_version"] != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta['format_version']}")
            tensors = [data[f"site_{i:04d}"] for i in range(meta["n_sites"])]
        mps = cls(tensors, meta["max_bond"], meta["canonical_center"])
        mps.info = meta.get("info", {})
        return mps


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _identity_transfer(env, t):
    return np.einsum("xy,xsr,ysq->rq", env, t.conj(), t, optimize=True)


def mps_expectation(mps, op):
    """Exact ``<psi|op|psi> / <psi|psi>`` by tensor contraction.

    No truncation is involved.  The state is brought to a right-canonical
    gauge on a working copy; left environments are accumulated once and shared
    by all terms of the sum.
    """
    op = as_operator_sum(op)
    n = mps.n_sites
    if op.n_sites != n:
        raise DimensionError(f"operator on {op.n_sites} sites, state on {n}")
    work = mps.copy()
    work.canonicalize(0)
    tensors = work.tensors

    lefts = [np.ones((1, 1))]
    for t in tensors:
        lefts.append(_identity_transfer(lefts[-1], t))
    norm2 = float(np.real(np.trace(lefts[-1])))

    total = 0.0 + 0.0j
    for term in op.terms:
        if term.is_identity:
            total += term.coefficient * norm2
            continue
        sites = term.factors
        a = min(sites)
        b = max(sites)
        env = lefts[a]
        for i in range(a, b + 1):
            axis = sites.get(i)
            t = tensors[i]
            if axis is None:
                env = _identity_transfer(env, t)
            else:
                w = PAULI_MATRICES[axis]
                env = np.einsum("xy,xsr,st,ytq->rq", env, t.conj(), w, t, optimize=True)
        total += term.coefficient * np.trace(env)
    value = total / norm2
    if abs(value.imag) > 1e-8:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)
