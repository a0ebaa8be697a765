"""Ground-space solver against closed-form anchors and dense cross-checks."""

import numpy as np
import pytest

from clusterhull.ed import (
    GroundSpace,
    expectation,
    ground_space,
    subspace_extent,
)
from clusterhull.errors import CapacityError, DimensionError, ParameterError
from clusterhull.models import (
    ModelParams,
    assemble_bundle,
    boundary_x_sum,
    build_cluster,
    x_field_sum,
    z_field_sum,
)
from clusterhull.pauli import OperatorSum, PauliString, realize


def test_pure_x_field_ground_state():
    # -sum X has ground energy -N with the unique all-plus ground state
    n = 4
    h = x_field_sum(n).scaled(-1.0)
    gs = ground_space(h, k=3)
    assert gs.e0 == pytest.approx(-n, abs=1e-10)
    assert gs.degeneracy == 1
    assert gs.gap_above == pytest.approx(2.0, abs=1e-10)
    plus = np.full(2**n, 2.0 ** (-n / 2))
    overlap = abs(np.vdot(plus, gs.vectors[:, 0]))
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_edge_field_only_fourfold_degeneracy():
    # -(X0 + X_{N-1}) ignores the bulk: E0 = -2 with 2^(N-2) degeneracy
    n = 4
    h = boundary_x_sum(n).scaled(-1.0)
    gs = ground_space(h, k=6, deg_tol=1e-8)
    assert gs.e0 == pytest.approx(-2.0, abs=1e-10)
    assert gs.degeneracy == 4
    assert gs.gap_above == pytest.approx(2.0, abs=1e-10)


def test_stabilizer_ground_energy_counts_terms():
    # each XZX term contributes -1 in its ground sector
    for n, boundary, want in ((6, "obc", -4.0), (6, "pbc", -6.0)):
        h = assemble_bundle(n, boundary, 1.0, 0.0, 0.0).hamiltonian
        gs = ground_space(h)
        assert gs.e0 == pytest.approx(want, abs=1e-10)


def test_expectation_values():
    n = 4
    h = x_field_sum(n).scaled(-1.0)
    gs = ground_space(h, k=1)
    v = gs.vectors[:, 0]
    assert expectation(v, x_field_sum(n)) == pytest.approx(n, abs=1e-10)
    assert expectation(v, z_field_sum(n)) == pytest.approx(0.0, abs=1e-10)


def test_expectation_validates_state():
    op = PauliString(2, {0: "Z"})
    with pytest.raises(ValueError):
        expectation(np.array([1.0, 1.0, 0.0, 0.0]), op)  # unnormalized
    with pytest.raises(DimensionError):
        expectation(np.array([1.0, 0.0]), op)


def test_ground_space_variational_consistency():
    # eigenvector residual ||Hv - E v|| small, energies sorted
    p = ModelParams(8, alpha=0.3, bx=0.4, j1=-1, j2=1)
    h = build_cluster(p).hamiltonian
    gs = ground_space(h, k=4)
    mat = realize(h)
    assert np.all(np.diff(gs.energies) >= -1e-12)
    for i in range(len(gs.energies)):
        v = gs.vectors[:, i]
        res = np.linalg.norm(mat @ v - gs.energies[i] * v)
        assert res < 1e-9


def test_dense_and_lanczos_agree():
    p = ModelParams(8, alpha=-0.4, bx=0.7)
    h = build_cluster(p).hamiltonian
    dense = ground_space(h, k=4, method="dense")
    lanc = ground_space(h, k=4, method="lanczos", seed=1)
    np.testing.assert_allclose(lanc.energies, dense.energies, atol=1e-9)


def test_lanczos_seed_is_deterministic():
    p = ModelParams(8, alpha=0.1, bx=0.3)
    h = build_cluster(p).hamiltonian
    a = ground_space(h, k=2, method="lanczos", seed=5)
    b = ground_space(h, k=2, method="lanczos", seed=5)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_degeneracy_window_tolerance():
    # split a twofold level by 1e-6 and move deg_tol across the split
    h = OperatorSum(2, [PauliString(2, {0: "Z"}, -1.0), PauliString(2, {1: "Z"}, 5e-7)])
    tight = ground_space(h, k=3, deg_tol=1e-8)
    loose = ground_space(h, k=3, deg_tol=1e-4)
    assert tight.degeneracy == 1
    assert loose.degeneracy == 2
    assert loose.degenerate_vectors.shape[1] == 2


def test_gap_above_is_nan_when_window_exhausts_k():
    h = boundary_x_sum(4).scaled(-1.0)
    gs = ground_space(h, k=2, deg_tol=1e-8)  # 4-fold level, only 2 computed
    assert gs.degeneracy == 2
    assert np.isnan(gs.gap_above)


def test_subspace_extent_anchor_and_rotation_invariance():
    n = 4
    h = boundary_x_sum(n).scaled(-1.0)
    gs = ground_space(h, k=6)
    op = z_field_sum(n).scaled(1.0 / n)
    ext = subspace_extent(gs, op, label="z")
    assert ext.operator_label == "z"
    # rotate the degenerate basis by a random unitary; extent is basis-free
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    rotated = GroundSpace(
        gs.energies.copy(),
        np.concatenate([gs.degenerate_vectors @ q, gs.vectors[:, 4:]], axis=1),
        gs.gap_above,
        gs.degeneracy_tol,
    )
    ext2 = subspace_extent(rotated, op)
    assert ext2.min_val == pytest.approx(ext.min_val, abs=1e-10)
    assert ext2.max_val == pytest.approx(ext.max_val, abs=1e-10)
    assert ext.width >= 0.0


def test_subspace_extent_unique_state_has_zero_width():
    h = x_field_sum(4).scaled(-1.0)
    gs = ground_space(h, k=2)
    ext = subspace_extent(gs, z_field_sum(4))
    assert ext.width == pytest.approx(0.0, abs=1e-12)


def test_parameter_validation():
    h = x_field_sum(4)
    with pytest.raises(ParameterError):
        ground_space(h, k=0)
    with pytest.raises(ParameterError):
        ground_space(h, k=99)
    with pytest.raises(ParameterError):
        ground_space(h, method="magic")
    with pytest.raises(CapacityError):
        ground_space(x_field_sum(15), method="dense")
