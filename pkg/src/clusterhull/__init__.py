"""clusterhull: ground-state convex sets of the 1D cluster model in fields.

Exact diagonalization and imaginary-time TEBD engines drive sweeps over
coupling directions; the scan layer assembles expectation-value point clouds,
detects ruled boundary segments, and checks convexity.
"""

__version__ = "0.1.0"

from .pauli import (
    OperatorSum,
    PauliString,
    commutator_norm,
    commutes,
    multiply,
    realize,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .models import (
    ModelBundle,
    ModelParams,
    build_cluster,
    build_xy,
    cluster_field,
    cz_chain_transform,
    symmetry_generators,
)
from .ed import GroundSpace, SegmentExtent, expectation, ground_space, subspace_extent
from .mps import MatrixProductState, mps_expectation
from .tebd import TebdSchedule, apply_three_site_gate, pbc_wrap_apply, tebd_ground
from .scan import (
    BoundarySample,
    RuledSegment,
    SweepConfig,
    bulk_normalization_decay,
    convexity_check,
    detect_ruled,
    upper_hull,
    finite_d_scaling,
    sweep_boundary,
)

__all__ = [
    "__version__",
    "KERNEL_BACKEND",
    "PauliString",
    "OperatorSum",
    "multiply",
    "commutes",
    "commutator_norm",
    "realize",
    "ModelParams",
    "ModelBundle",
    "build_cluster",
    "build_xy",
    "cluster_field",
    "cz_chain_transform",
    "symmetry_generators",
    "GroundSpace",
    "SegmentExtent",
    "ground_space",
    "expectation",
    "subspace_extent",
    "MatrixProductState",
    "mps_expectation",
    "TebdSchedule",
    "tebd_ground",
    "apply_three_site_gate",
    "pbc_wrap_apply",
    "SweepConfig",
    "BoundarySample",
    "RuledSegment",
    "sweep_boundary",
    "detect_ruled",
    "upper_hull",
    "convexity_check",
    "bulk_normalization_decay",
    "finite_d_scaling",
]
