"""Pure-numpy kernel backend.

Same contract as the compiled extension: accumulate ``op @ v`` into ``out``
term by term, where each term is ``w * X(mx) * Z(mz)`` acting as
``out[i ^ mx] += w * (-1)**popcount(i & mz) * v[i]``.

XOR with a constant mask is a permutation of the index range, so the fancy
scatter below never hits an index twice per term.
"""

import numpy as np

_INDEX_CACHE = {}


def _indices(dim):
    idx = _INDEX_CACHE.get(dim)
    if idx is None:
        idx = np.arange(dim, dtype=np.uint64)
        _INDEX_CACHE[dim] = idx
    return idx


def _apply(mx, mz, w, v, out):
    dim = v.shape[0]
    idx = _indices(dim)
    for t in range(mx.shape[0]):
        vals = w[t] * v
        mzt = mz[t]
        if mzt:
            parity = np.bitwise_count(idx & mzt) & np.uint64(1)
            vals = np.where(parity.astype(bool), -vals, vals)
        mxt = mx[t]
        if mxt:
            out[idx ^ mxt] += vals
        else:
            out += vals
    return out


apply_real = _apply
apply_complex = _apply
