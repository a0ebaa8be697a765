"""Tensor-train state: canonical form, dense round-trips, checkpointing."""

import numpy as np
import pytest

from clusterhull.ed import expectation
from clusterhull.errors import DimensionError
from clusterhull.models import stabilizer_sum, x_field_sum, z_field_sum
from clusterhull.mps import CHECKPOINT_VERSION, MatrixProductState, mps_expectation
from clusterhull.pauli import OperatorSum, PauliString


def random_mps(rng, n, chi):
    vec = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    vec /= np.linalg.norm(vec)
    return MatrixProductState.from_dense(vec, max_bond=chi), vec


def test_product_state_is_all_plus():
    mps = MatrixProductState.product_state(3)
    want = np.full(8, 2.0 ** (-1.5))
    np.testing.assert_allclose(mps.to_dense(), want, atol=1e-14)
    assert mps.bond_dims == [1, 1]
    assert mps.norm() == pytest.approx(1.0, abs=1e-12)


def test_product_state_custom_local():
    up = np.array([1.0, 0.0])
    mps = MatrixProductState.product_state(2, local=up)
    want = np.zeros(4)
    want[0] = 1.0
    np.testing.assert_allclose(mps.to_dense(), want, atol=1e-14)


def test_from_dense_round_trip():
    rng = np.random.default_rng(0)
    for n in (1, 2, 4, 6):
        mps, vec = random_mps(rng, n, chi=None)
        np.testing.assert_allclose(mps.to_dense(), vec, atol=1e-12)


def test_from_dense_ordering_site_zero_major():
    # amplitude 1 on computational state |01>: index 0b01 = 1 for two sites
    vec = np.zeros(4)
    vec[1] = 1.0
    mps = MatrixProductState.from_dense(vec)
    np.testing.assert_allclose(mps.to_dense(), vec, atol=1e-14)


def test_from_dense_rejects_bad_length():
    with pytest.raises(DimensionError):
        MatrixProductState.from_dense(np.ones(3))


def test_truncation_reduces_bond_and_records_weight():
    rng = np.random.default_rng(1)
    full, vec = random_mps(rng, 6, chi=None)
    assert max(full.bond_dims) == 8
    cut, _ = random_mps(rng, 6, chi=2)
    assert max(cut.bond_dims) <= 2
    assert sum(cut.truncation_log) > 0.0


def test_canonical_center_isometries():
    rng = np.random.default_rng(2)
    mps, _ = random_mps(rng, 5, chi=None)
    for center in (0, 2, 4):
        mps.canonicalize(center)
        assert mps.canonical_center == center
        assert mps.check_canonical() < 1e-10
        # left of center: A^dag A = 1; right: B B^dag = 1
        for i in range(center):
            t = mps.tensors[i]
            m = t.reshape(-1, t.shape[2])
            np.testing.assert_allclose(m.conj().T @ m, np.eye(t.shape[2]), atol=1e-12)
        for i in range(center + 1, mps.n_sites):
            t = mps.tensors[i]
            m = t.reshape(t.shape[0], -1)
            np.testing.assert_allclose(m @ m.conj().T, np.eye(t.shape[0]), atol=1e-12)


def test_move_center_preserves_state():
    rng = np.random.default_rng(3)
    mps, vec = random_mps(rng, 5, chi=None)
    mps.canonicalize(0)
    for target in (4, 1, 3, 0):
        mps.move_center(target)
        assert mps.canonical_center == target
        np.testing.assert_allclose(mps.to_dense(), vec, atol=1e-12)


def test_normalize_scales_to_unit_norm():
    mps = MatrixProductState.product_state(3)
    mps.canonicalize(1)
    mps.tensors[1] *= 3.0
    assert mps.norm() == pytest.approx(3.0, abs=1e-12)
    mps.normalize()
    assert mps.norm() == pytest.approx(1.0, abs=1e-12)


def test_copy_is_independent():
    mps = MatrixProductState.product_state(3)
    dup = mps.copy()
    dup.tensors[0] *= 2.0
    assert mps.norm() == pytest.approx(1.0, abs=1e-12)


def test_expectation_matches_dense_route():
    rng = np.random.default_rng(4)
    mps, vec = random_mps(rng, 6, chi=None)
    ops = [
        stabilizer_sum(6, "obc"),
        z_field_sum(6),
        x_field_sum(6).scaled(-0.5),
        OperatorSum(6, [PauliString(6, {1: "Y", 2: "X"}, 1.0), PauliString(6, {1: "X", 2: "Y"}, -1.0)]),
    ]
    for op in ops:
        got = mps_expectation(mps, op)
        want = expectation(vec, op)
        assert got == pytest.approx(want, abs=1e-10)


def test_expectation_handles_unnormalized_state():
    mps = MatrixProductState.product_state(4)
    mps.tensors[0] *= 2.0
    assert mps_expectation(mps, x_field_sum(4)) == pytest.approx(4.0, abs=1e-12)


def test_expectation_rejects_size_mismatch():
    mps = MatrixProductState.product_state(3)
    with pytest.raises(DimensionError):
        mps_expectation(mps, x_field_sum(4))


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    mps, vec = random_mps(rng, 5, chi=4)
    mps.info["energy"] = -1.25
    path = tmp_path / "state.npz"
    mps.save_npz(path)
    back = MatrixProductState.load_npz(path)
    assert back.n_sites == 5
    assert back.max_bond == mps.max_bond
    assert back.canonical_center == mps.canonical_center
    assert back.info["energy"] == -1.25
    np.testing.assert_allclose(back.to_dense(), mps.to_dense(), atol=1e-13)


def test_checkpoint_version_gate(tmp_path):
    mps = MatrixProductState.product_state(2)
    path = tmp_path / "state.npz"
    mps.save_npz(path)
    import json

    data = dict(np.load(path, allow_pickle=False))
    meta = json.loads(bytes(data["meta"]).decode())
    meta["format_version"] = CHECKPOINT_VERSION + 1
    data["meta"] = np.bytes_(json.dumps(meta).encode())
    np.savez(path, **data)
    with pytest.raises(ValueError):
        MatrixProductState.load_npz(path)


def test_tensor_validation():
    good = [np.zeros((1, 2, 2)), np.zeros((2, 2, 1))]
    MatrixProductState([t.copy() for t in good], max_bond=2)
    with pytest.raises(DimensionError):
        MatrixProductState([np.zeros((2, 2, 1))], max_bond=2)  # left boundary != 1
    with pytest.raises(DimensionError):
        MatrixProductState([np.zeros((1, 2, 3)), np.zeros((2, 2, 1))], max_bond=3)
    with pytest.raises(DimensionError):
        MatrixProductState([np.zeros((1, 3, 1))], max_bond=2)  # physical dim != 2
