"""Parameter sweeps over the expectation-value cloud.

A sweep walks a grid of couplings, solves each point with exact
diagonalization or TEBD, and reports one sample per point: the coordinate
triple ``(x1, x2, x3)`` built from the three normalized model blocks, plus
energy, gap, degeneracy, and (when the ground space is degenerate) the exact
extent of the third coordinate over that space.  Per-point failures are
attached to the sample list instead of aborting the sweep.

Coordinate modes
----------------
``boundary``        field on the edge sites; x3 = edge-X average (half the sum)
``bulk-norm``       field on every site; x3 = total X over n_sites
``boundary-unnorm`` field on every site; x3 = edge-X sum, not normalized

The first two put every ground-state sample on the boundary of a convex
body; the third deliberately mismatches field and observable, which is what
makes its cloud develop an interior (see ``convexity_check``).

On a degenerate grid point the solver's basis choice within the ground
space is arbitrary, so the sample is gauged: the reported state is the
subspace eigenvector with the largest x3.  That convention is the limit of
switching the field on infinitesimally and keeps degenerate samples extreme
rather than scattered inside the segment they span.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .ed import AUTO_DENSE_MAX_SITES, expectation, ground_space, subspace_extent
from .errors import DimensionError, ParameterError
from .kernels import BACKEND, apply_terms, compile_terms
from .models import (
    ModelParams,
    assemble_bundle,
    boundary_x_sum,
    build_cluster,
    stabilizer_sum,
    x_field_sum,
    z_field_sum,
)
from .mps import mps_expectation
from .tebd import TebdSchedule, tebd_ground

__all__ = [
    "COORDINATE_MODES",
    "CSV_COLUMNS",
    "SweepConfig",
    "BoundarySample",
    "RuledSegment",
    "ConvexityReport",
    "sweep_boundary",
    "detect_ruled",
    "upper_hull",
    "convexity_check",
    "bulk_normalization_decay",
    "finite_d_scaling",
    "write_samples_csv",
    "read_samples_csv",
    "write_manifest",
]

COORDINATE_MODES = ("boundary", "bulk-norm", "boundary-unnorm")
ENGINES = ("ed", "tebd")


def _default_alpha():
    return tuple(np.linspace(-1.0, 1.0, 81))


def _default_bx():
    return (0.0,) + tuple(np.logspace(-4.0, 0.0, 9))


@dataclass(frozen=True)
class SweepConfig:
    """Grid and solver settings for one boundary sweep."""

    n_sites: int = 12
    boundary: str = "obc"
    coordinate_mode: str = "boundary"
    engine: str = "ed"
    j1_values: tuple = (1, -1)
    j2_values: tuple = (1, -1)
    alpha_values: tuple = field(default_factory=_default_alpha)
    bx_values: tuple = field(default_factory=_default_bx)
    deg_tol: float = 1e-8
    k: int = 6
    seed: int = 0
    bond_dim: int = 40
    tebd_schedule: TebdSchedule | None = None
    tebd_noise: float = 1e-3
    coupling_scale: float = 1.0

    def __post_init__(self):
        if self.coordinate_mode not in COORDINATE_MODES:
            raise ParameterError(
                f"coordinate_mode must be one of {COORDINATE_MODES}, got {self.coordinate_mode!r}"
            )
        if self.engine not in ENGINES:
            raise ParameterError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        for name in ("j1_values", "j2_values"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        for name in ("alpha_values", "bx_values"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.coupling_scale <= 0:
            raise ParameterError(f"coupling_scale must be positive, got {self.coupling_scale}")
        if self.tebd_noise < 0:
            raise ParameterError(f"tebd_noise must be nonnegative, got {self.tebd_noise}")

    @property
    def x_field_mode(self):
        """Where the Hamiltonian's X field acts for this coordinate mode."""
        return "boundary" if self.coordinate_mode == "boundary" else "bulk"

    def grid(self):
        """Deterministic parameter list: j1 outer, bx innermost."""
        pts = []
        for j1 in self.j1_values:
            for j2 in self.j2_values:
                for alpha in self.alpha_values:
                    for bx in self.bx_values:
                        pts.append(
                            ModelParams(
                                n_sites=self.n_sites,
                                boundary=self.boundary,
                                j1=j1,
                                j2=j2,
                                alpha=alpha,
                                bx=bx,
                                x_field_mode=self.x_field_mode,
                            )
                        )
        return pts


@dataclass
class BoundarySample:
    """One solved grid point (or its failure record)."""

    params: ModelParams
    mode: str
    engine: str
    point: tuple | None = None
    e0: float | None = None
    gap: float | None = None
    degeneracy: int | None = None
    extent: object | None = None
    bond_dim: int | None = None
    trunc_weight: float | None = None
    meta: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


@dataclass(frozen=True)
class RuledSegment:
    """A straight piece of the cloud boundary, reported along one axis."""

    params: ModelParams
    axis: str
    lo: float
    hi: float
    width: float
    n_points: int = 1


@dataclass
class ConvexityReport:
    """Hull-depth audit of a point cloud.

    ``depths[i]`` is the distance of point i inside the hull (0 on the hull
    itself); indices with depth above the tolerance are listed in
    ``interior``.  ``degenerate`` flags clouds that collapsed to a lower
    dimension and were audited in the projected space.
    """

    n_points: int
    interior: tuple
    depths: np.ndarray
    max_depth: float
    tol: float
    degenerate: bool = False

    @property
    def empty_interior(self):
        return len(self.interior) == 0

    def as_dict(self):
        return {
            "n_points": self.n_points,
            "n_interior": len(self.interior),
            "interior": [int(i) for i in self.interior],
            "max_depth": self.max_depth,
            "tol": self.tol,
            "degenerate": self.degenerate,
        }


def coordinate_ops(n_sites, boundary, mode):
    """The three normalized observables spanning the cloud coordinates."""
    if mode not in COORDINATE_MODES:
        raise ParameterError(f"unknown coordinate mode {mode!r}")
    n1 = n_sites - 2 if boundary == "obc" else n_sites
    op1 = stabilizer_sum(n_sites, boundary).scaled(1.0 / n1)
    op2 = z_field_sum(n_sites).scaled(1.0 / n_sites)
    if mode == "boundary":
        op3 = boundary_x_sum(n_sites).scaled(0.5)
    elif mode == "bulk-norm":
        op3 = x_field_sum(n_sites).scaled(1.0 / n_sites)
    else:
        op3 = boundary_x_sum(n_sites)
    return op1, op2, op3


def _bundle_for(cfg, params):
    return assemble_bundle(
        params.n_sites,
        params.boundary,
        params.j1 * (1.0 + params.alpha) * cfg.coupling_scale,
        params.j2 * (1.0 - params.alpha) * cfg.coupling_scale,
        params.bx,
        x_field_mode=params.x_field_mode,
        params=params,
    )


def _max_coordinate_state(gs, op):
    """Ground-space vector maximizing ``op`` (the bx -> 0+ selection gauge)."""
    v = gs.degenerate_vectors
    table = compile_terms(op)
    applied = np.column_stack([apply_terms(table, v[:, a]) for a in range(v.shape[1])])
    m = v.conj().T @ applied
    m = 0.5 * (m + m.conj().T)
    _, u = np.linalg.eigh(m)
    vec = v @ u[:, -1]
    return vec / np.linalg.norm(vec)


def _run_point_ed(cfg, params):
    bundle = _bundle_for(cfg, params)
    gs = ground_space(bundle.hamiltonian, k=cfg.k, deg_tol=cfg.deg_tol, seed=cfg.seed)
    ops = coordinate_ops(params.n_sites, params.boundary, cfg.coordinate_mode)
    extent = None
    if gs.degeneracy > 1:
        extent = subspace_extent(gs, ops[2], label="x3")
        vec = _max_coordinate_state(gs, ops[2])
    else:
        vec = gs.vectors[:, 0]
    point = tuple(expectation(vec, op) for op in ops)
    method = "dense" if params.n_sites <= AUTO_DENSE_MAX_SITES else "lanczos"
    return BoundarySample(
        params=params,
        mode=cfg.coordinate_mode,
        engine="ed",
        point=point,
        e0=gs.e0,
        gap=gs.gap_above,
        degeneracy=gs.degeneracy,
        extent=extent,
        meta={"method": method, "k": cfg.k},
    )


def _run_point_tebd(cfg, params, point_seed):
    bundle = _bundle_for(cfg, params)
    schedule = cfg.tebd_schedule if cfg.tebd_schedule is not None else TebdSchedule()
    mps = tebd_ground(bundle, cfg.bond_dim, schedule, seed=point_seed, noise=cfg.tebd_noise)
    ops = coordinate_ops(params.n_sites, params.boundary, cfg.coordinate_mode)
    point = tuple(mps_expectation(mps, op) for op in ops)
    return BoundarySample(
        params=params,
        mode=cfg.coordinate_mode,
        engine="tebd",
        point=point,
        e0=float(mps.info["energy"]),
        bond_dim=cfg.bond_dim,
        trunc_weight=float(mps.info["trunc_weight"]),
        meta={
            "sweeps": list(mps.info["sweeps"]),
            "seed": point_seed,
            "max_bond_used": max(mps.bond_dims) if mps.bond_dims else 1,
        },
    )


def _sweep_task(task):
    cfg, params, point_seed = task
    try:
        if cfg.engine == "ed":
            return _run_point_ed(cfg, params)
        return _run_point_tebd(cfg, params, point_seed)
    except Exception as exc:  # per-point failures must not kill the sweep
        return BoundarySample(
            params=params,
            mode=cfg.coordinate_mode,
            engine=cfg.engine,
            error=f"{type(exc).__name__}: {exc}",
        )


def sweep_boundary(cfg, workers=1):
    """Solve every grid point of ``cfg``; failures come back as error samples.

    ``workers > 1`` fans points out to a process pool; results keep grid
    order either way, and per-point seeds depend only on the grid index, so
    worker count never changes the numbers.
    """
    tasks = [(cfg, p, cfg.seed + i) for i, p in enumerate(cfg.grid())]
    if workers <= 1:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (8 * workers))
        return list(pool.map(_sweep_task, tasks, chunksize=chunk))


def upper_hull(points):
    """Upper boundary of the 2D convex hull, as vertices sorted by x.

    Input is an (m, 2) array of (x, y) pairs; ties in x keep the largest y.
    The result is the concave piecewise-linear majorant touching the cloud,
    the curve a taut string laid over the points would take.  Reads a clean
    envelope off scattered near-degenerate optimizer output: downward
    excursions of individual runs never enter the hull.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DimensionError(f"upper_hull expects (m, 2) points, got {pts.shape}")
    if pts.shape[0] == 0:
        raise DimensionError("upper_hull needs at least one point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("upper_hull points must be finite")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    hull = []
    for x, y in pts:
        if hull and x == hull[-1][0]:
            if y <= hull[-1][1]:
                continue
            hull.pop()
        while len(hull) >= 2:
            ox, oy = hull[-2]
            ax, ay = hull[-1]
            # pop counterclockwise (and collinear) turns; keep only vertices
            if (ax - ox) * (y - oy) - (ay - oy) * (x - ox) >= 0.0:
                hull.pop()
            else:
                break
        hull.append((float(x), float(y)))
    return np.array(hull)


def detect_ruled(samples, width_threshold=1e-3, bx_tol=1e-12):
    """Find straight segments on the cloud boundary.

    ED samples report a segment wherever the ground space is degenerate and
    the exact x3 extent over it exceeds the threshold (widths are in
    coordinate units).  TEBD samples carry no degeneracy information, so the
    zero-field fiber of each coupling-sign pair is summarized instead: the
    converged states scatter along the degenerate direction, so the fiber's
    (alpha, x3) cloud is reduced to its upper hull and the segment spans the
    envelope's vertical extent.
    """
    segments = []
    for s in samples:
        if not s.ok or s.extent is None or (s.degeneracy or 0) < 2:
            continue
        if s.extent.width > width_threshold:
            segments.append(
                RuledSegment(
                    params=s.params,
                    axis="x3",
                    lo=float(s.extent.min_val),
                    hi=float(s.extent.max_val),
                    width=float(s.extent.width),
                )
            )
    fibers = {}
    for s in samples:
        if not s.ok or s.engine != "tebd" or s.point is None:
            continue
        if abs(s.params.bx) > bx_tol:
            continue
        key = (s.params.j1, s.params.j2, s.params.boundary)
        fibers.setdefault(key, []).append(s)
    for key in sorted(fibers):
        grp = fibers[key]
        cloud = np.array([(g.params.alpha, g.point[2]) for g in grp])
        envelope = upper_hull(cloud)
        lo, hi = float(envelope[:, 1].min()), float(envelope[:, 1].max())
        if hi - lo > width_threshold:
            rep = grp[int(np.argmax(cloud[:, 1]))]
            segments.append(
                RuledSegment(
                    params=rep.params,
                    axis="x3",
                    lo=lo,
                    hi=hi,
                    width=hi - lo,
                    n_points=len(grp),
                )
            )
    return segments


def convexity_check(points, tol=1e-6):
    """Audit whether any point sits strictly inside the cloud's convex hull.

    Depth is Euclidean distance past the nearest hull facet.  Clouds that
    are rank-deficient (a plane or a segment in 3D) are audited inside
    their affine span and flagged ``degenerate``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ParameterError(f"points must be 2-D (m, dim), got shape {pts.shape}")
    m, dim = pts.shape
    if m == 0:
        return ConvexityReport(0, (), np.zeros(0), 0.0, tol, degenerate=True)

    degenerate = False
    work = pts
    try:
        hull = ConvexHull(work)
    except QhullError:
        degenerate = True
        center = pts.mean(axis=0)
        shifted = pts - center
        _, svals, vt = np.linalg.svd(shifted, full_matrices=False)
        scale = svals[0] if svals.size and svals[0] > 0 else 1.0
        rank = int(np.sum(svals > scale * 1e-9))
        if rank <= 1:
            # collinear: depth along the single axis
            axis = vt[0] if svals.size else np.zeros(dim)
            coords = shifted @ axis
            lo, hi = coords.min(), coords.max()
            depths = np.minimum(coords - lo, hi - coords)
            depths = np.maximum(depths, 0.0)
            interior = tuple(np.nonzero(depths > tol)[0].tolist())
            return ConvexityReport(m, interior, depths, float(depths.max()), tol, True)
        work = shifted @ vt[:rank].T
        hull = ConvexHull(work)

    eqs = hull.equations
    depths = -(work @ eqs[:, :-1].T + eqs[:, -1]).max(axis=1)
    depths = np.maximum(depths, 0.0)
    interior = tuple(np.nonzero(depths > tol)[0].tolist())
    return ConvexityReport(m, interior, depths, float(depths.max()), tol, degenerate)


def bulk_normalization_decay(n_sites_list, alpha=1.0, j1=-1, j2=1, deg_tol=1e-8, boundary="obc"):
    """Width of the bulk-normalized x3 segment versus chain length.

    At zero field the open chain keeps a degenerate ground space whose total-X
    extent is set by the edges alone, so dividing by n_sites shrinks the
    segment as the chain grows.  Returns ``{n_sites: width}``.
    """
    widths = {}
    for n in n_sites_list:
        params = ModelParams(
            n_sites=n, boundary=boundary, j1=j1, j2=j2, alpha=alpha, bx=0.0, x_field_mode="bulk"
        )
        bundle = build_cluster(params)
        gs = ground_space(bundle.hamiltonian, k=6, deg_tol=deg_tol)
        if gs.degeneracy > 1:
            op3 = x_field_sum(n).scaled(1.0 / n)
            widths[n] = float(subspace_extent(gs, op3, label="x3").width)
        else:
            widths[n] = 0.0
    return widths


def finite_d_scaling(cfg, d_list, workers=1):
    """x3 spread over the alpha window per (bond cap, bx) for a TEBD config.

    Truncation widens the apparent segment; the spread must shrink as the
    bond cap grows.  Returns ``{(d, bx): spread}``.
    """
    out = {}
    for d in d_list:
        c = replace(cfg, engine="tebd", bond_dim=int(d))
        samples = sweep_boundary(c, workers=workers)
        for bx in c.bx_values:
            xs = [
                s.point[2]
                for s in samples
                if s.ok and s.point is not None and s.params.bx == bx
            ]
            out[(int(d), float(bx))] = float(max(xs) - min(xs)) if len(xs) > 1 else 0.0
    return out


CSV_COLUMNS = (
    "j1",
    "j2",
    "alpha",
    "bx",
    "boundary",
    "mode",
    "engine",
    "D",
    "e0",
    "gap",
    "degeneracy",
    "x1",
    "x2",
    "x3",
    "seg_lo",
    "seg_hi",
    "trunc_weight",
)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".17g")


def write_samples_csv(samples, path):
    """Write solved samples in the interchange schema (17 significant digits).

    Failed samples carry no numbers and are skipped here; they belong in the
    run manifest.  Returns the number of rows written.
    """
    rows = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for s in samples:
            if not s.ok or s.point is None:
                continue
            p = s.params
            x1, x2, x3 = s.point
            seg_lo = s.extent.min_val if s.extent is not None else None
            seg_hi = s.extent.max_val if s.extent is not None else None
            writer.writerow(
                [
                    _fmt(p.j1),
                    _fmt(p.j2),
                    _fmt(p.alpha),
                    _fmt(p.bx),
                    p.boundary,
                    s.mode,
                    s.engine,
                    _fmt(s.bond_dim),
                    _fmt(s.e0),
                    _fmt(s.gap),
                    _fmt(s.degeneracy),
                    _fmt(x1),
                    _fmt(x2),
                    _fmt(x3),
                    _fmt(seg_lo),
                    _fmt(seg_hi),
                    _fmt(s.trunc_weight),
                ]
            )
            rows += 1
    return rows


def read_samples_csv(path):
    """Parse an interchange CSV back into plain dicts (floats/ints/None)."""
    int_cols = {"j1", "j2", "D", "degeneracy"}
    str_cols = {"boundary", "mode", "engine"}
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"CSV is missing columns: {', '.join(missing)}")
        for raw in reader:
            row = {}
            for col in CSV_COLUMNS:
                cell = raw[col]
                if col in str_cols:
                    row[col] = cell
                elif cell == "":
                    row[col] = None
                elif col in int_cols:
                    row[col] = int(cell)
                else:
                    row[col] = float(cell)
            out.append(row)
    return out


def write_manifest(path, cfg, samples=None, wall_clock_s=None, extra=None):
    """Write a JSON run manifest: resolved config, versions, failures."""
    from . import __version__

    cfg_dict = asdict(cfg)
    if cfg.tebd_schedule is not None:
        cfg_dict["tebd_schedule"] = cfg.tebd_schedule.as_dict()
    manifest = {
        "config": cfg_dict,
        "versions": {
            "clusterhull": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "kernel_backend": BACKEND,
        },
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    if samples is not None:
        failures = [
            {"params": asdict(s.params), "error": s.error} for s in samples if not s.ok
        ]
        manifest["n_samples"] = len(samples)
        manifest["n_failed"] = len(failures)
        manifest["failures"] = failures
    if wall_clock_s is not None:
        manifest["wall_clock_s"] = float(wall_clock_s)
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
