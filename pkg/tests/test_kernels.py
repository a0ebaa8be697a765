"""Mask kernels against the dense realization, on both backends."""

import numpy as np
import pytest

from clusterhull import _kernels_py
from clusterhull.errors import DimensionError
from clusterhull.kernels import BACKEND, apply_terms, compile_terms, linear_operator
from clusterhull.pauli import OperatorSum, PauliString, realize

try:
    from clusterhull import _kernels
except ImportError:
    _kernels = None

BACKENDS = [pytest.param(_kernels_py, id="numpy")]
if _kernels is not None:
    BACKENDS.append(pytest.param(_kernels, id="cython"))


def random_sum(rng, n, n_terms, complex_coeff=False):
    terms = []
    for _ in range(n_terms):
        k = rng.integers(0, n + 1)
        sites = rng.choice(n, size=k, replace=False)
        axes = rng.choice(list("XYZ"), size=k)
        coeff = rng.standard_normal()
        if complex_coeff:
            coeff = coeff + 1j * rng.standard_normal()
        terms.append(PauliString(n, {int(s): str(a) for s, a in zip(sites, axes)}, coeff))
    return OperatorSum(n, terms)


def backend_apply(backend, table, vec):
    real_path = table.is_real and not np.iscomplexobj(vec)
    dtype = np.float64 if real_path else np.complex128
    v = np.ascontiguousarray(vec, dtype=dtype)
    out = np.zeros(table.dim, dtype=dtype)
    if real_path:
        backend.apply_real(table.mx, table.mz, table.real_weights, v, out)
    else:
        backend.apply_complex(table.mx, table.mz, table.weights, v, out)
    return out


@pytest.mark.parametrize("backend", BACKENDS)
def test_backend_matches_dense_matvec(backend):
    rng = np.random.default_rng(7)
    for n in (1, 2, 4, 6):
        op = random_sum(rng, n, 5)
        table = compile_terms(op)
        mat = realize(op)
        v = rng.standard_normal(1 << n)
        np.testing.assert_allclose(backend_apply(backend, table, v), mat @ v, atol=1e-12)
        vc = v + 1j * rng.standard_normal(1 << n)
        np.testing.assert_allclose(
            backend_apply(backend, table, vc.astype(np.complex128)), mat @ vc, atol=1e-12
        )


@pytest.mark.skipif(_kernels is None, reason="compiled backend not built")
def test_backends_agree_bit_for_bit_scale():
    rng = np.random.default_rng(13)
    op = random_sum(rng, 8, 12, complex_coeff=True)
    table = compile_terms(op)
    v = rng.standard_normal(1 << 8) + 1j * rng.standard_normal(1 << 8)
    v = v.astype(np.complex128)
    a = backend_apply(_kernels, table, v)
    b = backend_apply(_kernels_py, table, v)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_apply_terms_real_path_stays_real():
    op = OperatorSum(3, [PauliString(3, {0: "X", 1: "Z", 2: "X"}, -1.0)])
    table = compile_terms(op)
    assert table.is_real
    out = apply_terms(table, np.ones(8))
    assert out.dtype == np.float64


def test_apply_terms_y_term_promotes_weights_but_pairs_stay_real():
    # A single Y has imaginary weight; Y pairs fold back to real.
    single = compile_terms(PauliString(2, {0: "Y"}))
    assert not single.is_real
    pair = compile_terms(PauliString(2, {0: "Y", 1: "Y"}))
    assert pair.is_real
    mat = realize(PauliString(2, {0: "Y", 1: "Y"}))
    v = np.arange(4.0)
    np.testing.assert_allclose(apply_terms(pair, v), mat @ v, atol=1e-14)


def test_apply_terms_accumulates_into_out():
    table = compile_terms(PauliString(1, {0: "Z"}))
    out = np.array([10.0, 20.0])
    apply_terms(table, np.array([1.0, 1.0]), out=out)
    np.testing.assert_allclose(out, [11.0, 19.0])


def test_apply_terms_rejects_wrong_shape():
    table = compile_terms(PauliString(2, {0: "X"}))
    with pytest.raises(DimensionError):
        apply_terms(table, np.ones(3))


def test_linear_operator_roundtrip():
    rng = np.random.default_rng(19)
    op = random_sum(rng, 5, 4)
    lo = linear_operator(op)
    mat = realize(op)
    v = rng.standard_normal(32)
    np.testing.assert_allclose(lo @ v, mat @ v, atol=1e-12)
    assert lo.shape == (32, 32)


def test_backend_constant_is_declared():
    assert BACKEND in ("cython", "numpy")
