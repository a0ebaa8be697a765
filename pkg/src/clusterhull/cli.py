"""Command-line experiments: single spectra, cloud sweeps, figure datasets.

Every subcommand resolves its settings in three layers: built-in defaults,
then a YAML config file (``--config``), then explicit flags.  Dataset
commands write an interchange CSV per cloud plus a JSON manifest recording
the resolved configuration, library versions, and any per-point failures;
detected straight segments and convexity reports go to JSON side files.
Errors in the input (bad parameters, unknown config keys, capacity limits)
print a one-line JSON object to stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import CapacityError, ConvergenceError, DimensionError, ParameterError
from .models import BOUNDARIES, ModelParams, build_cluster
from .ed import ground_space
from .scan import (
    COORDINATE_MODES,
    SweepConfig,
    bulk_normalization_decay,
    convexity_check,
    detect_ruled,
    sweep_boundary,
    write_manifest,
    write_samples_csv,
)
from .tebd import TebdSchedule

_CONFIG_KEYS = {
    "n",
    "n_list",
    "boundary",
    "mode",
    "engine",
    "seed",
    "workers",
    "out_dir",
    "bond_dim",
    "bond_dims",
    "deg_tol",
    "k",
    "coupling_scale",
    "j1",
    "j2",
    "j1_values",
    "j2_values",
    "alpha",
    "alpha_values",
    "bx",
    "bx_values",
    "stages",
    "trotter_order",
    "require_converged",
    "tebd_noise",
    "width_threshold",
}


def _load_config(path):
    if path is None:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ParameterError(f"config must be a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    return data


# Fixed imaginary-time budgets for the TEBD figure commands.  Spending the
# same total time at every bond cap keeps the cap as the only variable in
# the rounding study, and a short budget leaves degenerate fibers at their
# gauge scatter instead of polishing every point onto one representative.
_FIBER_SCHEDULE = TebdSchedule(
    stages=((0.1, 20, 1e-12), (0.03, 10, 1e-12)), require_converged=False
)
_ROUNDING_SCHEDULE = TebdSchedule(stages=((0.25, 80, 1e-12),), require_converged=False)


class _Resolver:
    """defaults < config file < command-line flags."""

    def __init__(self, args, config):
        self.args = args
        self.config = config

    def get(self, key, default=None):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.config:
            return self.config[key]
        return default

    def schedule(self):
        keys = ("stages", "trotter_order", "require_converged")
        if not any(k in self.config for k in keys):
            return None
        kwargs = {}
        if "stages" in self.config:
            kwargs["stages"] = tuple(tuple(s) for s in self.config["stages"])
        if "trotter_order" in self.config:
            kwargs["trotter_order"] = int(self.config["trotter_order"])
        if "require_converged" in self.config:
            kwargs["require_converged"] = bool(self.config["require_converged"])
        return TebdSchedule(**kwargs)


def _int_list(text):
    return tuple(int(v) for v in str(text).split(","))


def _out_dir(res):
    out = Path(res.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sweep_config(res, **overrides):
    """Build a SweepConfig from resolved settings plus per-figure overrides."""
    kwargs = {
        "n_sites": int(res.get("n", 12)),
        "boundary": res.get("boundary", "obc"),
        "coordinate_mode": res.get("mode", "boundary"),
        "engine": res.get("engine", "ed"),
        "deg_tol": float(res.get("deg_tol", 1e-8)),
        "k": int(res.get("k", 6)),
        "seed": int(res.get("seed", 0)),
        "bond_dim": int(res.get("bond_dim", 40)),
        "coupling_scale": float(res.get("coupling_scale", 1.0)),
        "tebd_schedule": res.schedule(),
        "tebd_noise": float(res.get("tebd_noise", 1e-3)),
    }
    for key in ("j1_values", "j2_values", "alpha_values", "bx_values"):
        if key in res.config:
            kwargs[key] = tuple(res.config[key])
    kwargs.update(overrides)
    return SweepConfig(**kwargs)


def _segment_rows(segments):
    rows = []
    for seg in segments:
        p = seg.params
        rows.append(
            {
                "j1": p.j1,
                "j2": p.j2,
                "alpha": p.alpha,
                "bx": p.bx,
                "boundary": p.boundary,
                "axis": seg.axis,
                "lo": seg.lo,
                "hi": seg.hi,
                "width": seg.width,
                "n_points": seg.n_points,
            }
        )
    return rows


def _write_outputs(out, stem, cfg, samples, t0, workers, width_threshold=1e-3):
    n_rows = write_samples_csv(samples, out / f"{stem}.csv")
    segments = detect_ruled(samples, width_threshold=width_threshold)
    with open(out / f"{stem}_segments.json", "w") as fh:
        json.dump(_segment_rows(segments), fh, indent=2)
        fh.write("\n")
    write_manifest(
        out / f"{stem}_manifest.json",
        cfg,
        samples,
        wall_clock_s=time.monotonic() - t0,
        extra={"workers": workers, "csv_rows": n_rows},
    )
    n_failed = sum(1 for s in samples if not s.ok)
    print(
        f"{stem}: {n_rows} rows, {len(segments)} segments, "
        f"{n_failed} failures -> {out / (stem + '.csv')}"
    )
    return segments


def _boundaries(res):
    b = res.get("boundary")
    return (b,) if b else BOUNDARIES


def cmd_spectrum(args):
    res = _Resolver(args, _load_config(args.config))
    params = ModelParams(
        n_sites=int(res.get("n", 12)),
        boundary=res.get("boundary", "obc"),
        j1=int(res.get("j1", 1)),
        j2=int(res.get("j2", 1)),
        alpha=float(res.get("alpha", 0.0)),
        bx=float(res.get("bx", 0.0)),
        x_field_mode="boundary" if res.get("mode", "boundary") == "boundary" else "bulk",
    )
    bundle = build_cluster(params)
    gs = ground_space(
        bundle.hamiltonian,
        k=int(res.get("k", 6)),
        deg_tol=float(res.get("deg_tol", 1e-8)),
        seed=int(res.get("seed", 0)),
    )
    report = {
        "params": {
            "n_sites": params.n_sites,
            "boundary": params.boundary,
            "j1": params.j1,
            "j2": params.j2,
            "alpha": params.alpha,
            "bx": params.bx,
            "x_field_mode": params.x_field_mode,
        },
        "energies": [float(e) for e in gs.energies],
        "e0": gs.e0,
        "gap_above": None if np.isnan(gs.gap_above) else gs.gap_above,
        "degeneracy": gs.degeneracy,
        "degeneracy_tol": gs.degeneracy_tol,
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_sweep(args):
    res = _Resolver(args, _load_config(args.config))
    out = _out_dir(res)
    workers = int(res.get("workers", 1))
    cfg = _sweep_config(res)
    t0 = time.monotonic()
    samples = sweep_boundary(cfg, workers=workers)
    _write_outputs(
        out, "sweep", cfg, samples, t0, workers,
        width_threshold=float(res.get("width_threshold", 1e-3)),
    )
    return 0


def cmd_fig3(args):
    """Quasi-degenerate segment maps: open versus periodic chains."""
    res = _Resolver(args, _load_config(args.config))
    out = _out_dir(res)
    workers = int(res.get("workers", 1))
    for boundary in _boundaries(res):
        cfg = _sweep_config(
            res,
            boundary=boundary,
            engine="ed",
            coordinate_mode="boundary",
            deg_tol=float(res.get("deg_tol", 0.4)),
        )
        t0 = time.monotonic()
        samples = sweep_boundary(cfg, workers=workers)
        _write_outputs(
            out, f"fig3_{boundary}", cfg, samples, t0, workers,
            width_threshold=float(res.get("width_threshold", 1e-3)),
        )
    return 0


def cmd_fig4(args):
    """Zero-field fibers at matrix-product resolution (segment scatter)."""
    res = _Resolver(args, _load_config(args.config))
    out = _out_dir(res)
    workers = int(res.get("workers", 1))
    for boundary in _boundaries(res):
        cfg = _sweep_config(
            res,
            n_sites=int(res.get("n", 60)),
            boundary=boundary,
            engine="tebd",
            coordinate_mode="boundary",
            j1_values=(1,),
            j2_values=(1,),
            alpha_values=tuple(res.config.get("alpha_values", np.linspace(0.0, 1.0, 41))),
            bx_values=tuple(res.config.get("bx_values", (0.0,))),
            # unbiased start: each zero-field point lands at a random gauge
            # in the degenerate manifold, so the fiber actually scatters
            tebd_noise=float(res.get("tebd_noise", 1.0)),
            tebd_schedule=res.schedule() or _FIBER_SCHEDULE,
        )
        t0 = time.monotonic()
        samples = sweep_boundary(cfg, workers=workers)
        _write_outputs(
            out, f"fig4_{boundary}", cfg, samples, t0, workers,
            width_threshold=float(res.get("width_threshold", 1e-3)),
        )
    return 0


def cmd_fig5(args):
    """Finite bond dimension rounding of the periodic cloud near alpha = 0."""
    res = _Resolver(args, _load_config(args.config))
    out = _out_dir(res)
    workers = int(res.get("workers", 1))
    if args.bond_dims is not None:
        d_list = args.bond_dims
    else:
        d_list = tuple(int(d) for d in res.config.get("bond_dims", (40, 60, 80)))
    widths = {}
    for d in d_list:
        cfg = _sweep_config(
            res,
            n_sites=int(res.get("n", 60)),
            boundary="pbc",
            engine="tebd",
            coordinate_mode="boundary",
            bond_dim=int(d),
            j1_values=(1,),
            j2_values=(1,),
            alpha_values=tuple(res.config.get("alpha_values", np.linspace(-0.05, 0.05, 5))),
            bx_values=tuple(res.config.get("bx_values", (0.0, 1e-2))),
            tebd_schedule=res.schedule() or _ROUNDING_SCHEDULE,
        )
        t0 = time.monotonic()
        samples = sweep_boundary(cfg, workers=workers)
        _write_outputs(out, f"fig5_d{d}", cfg, samples, t0, workers)
        for bx in cfg.bx_values:
            xs = [s.point[2] for s in samples if s.ok and s.point and s.params.bx == bx]
            widths[f"d={d},bx={bx:.17g}"] = (max(xs) - min(xs)) if len(xs) > 1 else 0.0
    with open(out / "fig5_widths.json", "w") as fh:
        json.dump(widths, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"fig5 widths -> {out / 'fig5_widths.json'}")
    for key in sorted(widths):
        print(f"  {key}: spread {widths[key]:.3e}")
    return 0


def cmd_fig6(args):
    """Bulk-normalized clouds and the 1/n decay of the leftover segment."""
    res = _Resolver(args, _load_config(args.config))
    out = _out_dir(res)
    workers = int(res.get("workers", 1))
    if args.n_list is not None:
        n_list = args.n_list
    else:
        n_list = tuple(int(n) for n in res.config.get("n_list", (8, 10, 12)))
    for n in n_list:
        cfg = _sweep_config(
            res, n_sites=n, boundary="obc", engine="ed", coordinate_mode="bulk-norm"
        )
        t0 = time.monotonic()
        samples = sweep_boundary(cfg, workers=workers)
        _write_outputs(out, f"fig6_n{n}", cfg, samples, t0, workers)
    decay = bulk_normalization_decay(n_list, deg_tol=float(res.get("deg_tol", 1e-8)))
    payload = {
        str(n): {"width": w, "edge_pair_limit": 4.0 / n} for n, w in decay.items()
    }
    with open(out / "fig6_decay.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for n in sorted(decay):
        print(f"fig6 decay n={n}: width {decay[n]:.6f} (edge pair limit {4.0 / n:.6f})")
    return 0


def cmd_fig7(args):
    """Mismatched third coordinate: the cloud stops being a convex shell."""
    res = _Resolver(args, _load_config(args.config))
    out = _out_dir(res)
    workers = int(res.get("workers", 1))
    reports = {}
    for stem, mode in (("fig7_unnorm", "boundary-unnorm"), ("fig7_control", "boundary")):
        cfg = _sweep_config(res, engine="ed", coordinate_mode=mode)
        t0 = time.monotonic()
        samples = sweep_boundary(cfg, workers=workers)
        _write_outputs(out, stem, cfg, samples, t0, workers)
        points = np.array([s.point for s in samples if s.ok and s.point is not None])
        report = convexity_check(points)
        reports[stem] = report.as_dict()
        print(
            f"{stem}: {len(report.interior)} interior points, "
            f"max depth {report.max_depth:.3e}"
        )
    with open(out / "fig7_convexity.json", "w") as fh:
        json.dump(reports, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _verify_checks():
    """Fast invariant battery; every check raises on failure."""
    from .ed import expectation, subspace_extent
    from .kernels import apply_terms, compile_terms
    from .models import cz_chain_transform, symmetry_generators
    from .pauli import OperatorSum, PauliString, commutator_norm, realize
    from .mps import MatrixProductState, mps_expectation
    from .tebd import tebd_ground
    from .models import build_xy

    def check_kernels():
        rng = np.random.default_rng(7)
        terms = [
            PauliString(4, {0: "X", 2: "Z"}, 0.7),
            PauliString(4, {1: "Y", 3: "Y"}, -0.3),
            PauliString(4, {0: "Z", 1: "Z", 2: "X"}, 1.1),
        ]
        op = OperatorSum(4, terms)
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        got = apply_terms(compile_terms(op), v)
        want = realize(op, format="dense") @ v
        assert np.max(np.abs(got - want)) < 1e-12, "kernel disagrees with dense matrix"

    def check_transform():
        params = ModelParams(n_sites=6, j1=1, j2=-1, alpha=0.3)
        clu = build_cluster(params)
        xy = build_xy(params)
        a = np.linalg.eigvalsh(realize(clu.hamiltonian, format="dense"))
        b = np.linalg.eigvalsh(realize(xy, format="dense"))
        assert np.max(np.abs(a - b)) < 1e-10, "coupled-chain spectra differ"
        image = cz_chain_transform(cz_chain_transform(clu.hamiltonian), inverse=True)
        diff = (clu.hamiltonian + image.scaled(-1.0)).collect()
        assert len(diff.terms) == 0, "transform does not invert"

    def check_symmetries():
        params = ModelParams(n_sites=6, alpha=0.4, bx=0.0)
        h = build_cluster(params).hamiltonian
        o1, o2, _ = symmetry_generators(6)
        assert commutator_norm(h, o1) < 1e-12, "even-site parity broken"
        assert commutator_norm(h, o2) < 1e-12, "odd-site parity broken"

    def check_degeneracy():
        params = ModelParams(n_sites=6, j1=-1, j2=1, alpha=1.0, bx=0.0, x_field_mode="bulk")
        gs = ground_space(build_cluster(params).hamiltonian, k=6)
        assert gs.degeneracy == 4, f"expected 4-fold space, got {gs.degeneracy}"
        from .models import boundary_x_sum

        ext = subspace_extent(gs, boundary_x_sum(6).scaled(0.5))
        assert abs(ext.min_val + 1) < 1e-8 and abs(ext.max_val - 1) < 1e-8, (
            f"edge-X extent [{ext.min_val}, {ext.max_val}] != [-1, 1]"
        )

    def check_mps():
        rng = np.random.default_rng(3)
        vec = rng.standard_normal(16)
        vec /= np.linalg.norm(vec)
        mps = MatrixProductState.from_dense(vec)
        assert np.max(np.abs(mps.to_dense() - vec)) < 1e-12, "dense round trip failed"
        op = OperatorSum(4, [PauliString(4, {0: "X", 1: "Z", 2: "X"}, -1.0)])
        assert abs(mps_expectation(mps, op) - expectation(vec, op)) < 1e-10, (
            "contraction disagrees with dense expectation"
        )

    def check_tebd():
        params = ModelParams(n_sites=4, alpha=0.3, bx=0.2)
        bundle = build_cluster(params)
        mps = tebd_ground(bundle, 16, seed=1)
        gs = ground_space(bundle.hamiltonian, k=1)
        rel = abs(mps.info["energy"] - gs.e0) / abs(gs.e0)
        assert rel < 1e-6, f"ground energy off by {rel:.2e} relative"

    return [
        ("kernel backends agree with dense matrices", check_kernels),
        ("coupled-chain transform preserves spectra and inverts", check_transform),
        ("sublattice parities commute with the chain", check_symmetries),
        ("zero-field open chain keeps a 4-fold space with full edge extent", check_degeneracy),
        ("matrix-product round trip and contraction", check_mps),
        ("imaginary-time evolution reaches the dense ground energy", check_tebd),
    ]


def cmd_verify(args):
    failures = 0
    for name, check in _verify_checks():
        try:
            check()
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="clusterhull",
        description="Expectation-value clouds of coupled cluster chains.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML settings file (defaults < config < flags)")
    common.add_argument("--out-dir", dest="out_dir", help="output directory (default .)")
    common.add_argument("--workers", type=int, help="process count for sweeps (default 1)")
    common.add_argument("--seed", type=int, help="base RNG seed (default 0)")
    common.add_argument("--n", type=int, help="chain length (even)")
    common.add_argument("--bond-dim", dest="bond_dim", type=int, help="MPS bond cap")
    common.add_argument("--boundary", choices=BOUNDARIES, help="chain boundary")
    common.add_argument("--mode", choices=COORDINATE_MODES, help="coordinate mode")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="low spectrum of one point")
    p.add_argument("--j1", type=int, help="first coupling sign (+1/-1)")
    p.add_argument("--j2", type=int, help="second coupling sign (+1/-1)")
    p.add_argument("--alpha", type=float, help="coupling imbalance in [-1, 1]")
    p.add_argument("--bx", type=float, help="transverse field strength")
    p.add_argument("--k", type=int, help="number of eigenpairs (<= 8)")
    p.add_argument("--deg-tol", dest="deg_tol", type=float, help="degeneracy window")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", parents=[common], help="config-driven cloud sweep")
    p.add_argument("--engine", choices=("ed", "tebd"), help="solver")
    p.add_argument("--deg-tol", dest="deg_tol", type=float, help="degeneracy window")
    p.add_argument("--k", type=int, help="eigenpairs per point (ed)")
    p.add_argument(
        "--coupling-scale", dest="coupling_scale", type=float,
        help="overall scale on both chain couplings",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig3", parents=[common], help="quasi-degenerate segment maps")
    p.add_argument("--deg-tol", dest="deg_tol", type=float, help="window (default 0.4)")
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig4", parents=[common], help="zero-field fibers via TEBD")
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("fig5", parents=[common], help="bond-dimension rounding study")
    p.add_argument(
        "--bond-dims", dest="bond_dims", type=_int_list,
        help="comma-separated bond caps (default 40,60,80)",
    )
    p.set_defaults(func=cmd_fig5)

    p = sub.add_parser("fig6", parents=[common], help="bulk-normalized decay study")
    p.add_argument(
        "--n-list", dest="n_list", type=_int_list,
        help="comma-separated chain lengths (default 8,10,12)",
    )
    p.add_argument("--deg-tol", dest="deg_tol", type=float, help="degeneracy window")
    p.set_defaults(func=cmd_fig6)

    p = sub.add_parser("fig7", parents=[common], help="mismatched-coordinate convexity audit")
    p.set_defaults(func=cmd_fig7)

    p = sub.add_parser("verify", parents=[common], help="fast invariant battery")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        ParameterError,
        CapacityError,
        DimensionError,
        ConvergenceError,
        yaml.YAMLError,
        ValueError,
        OSError,
    ) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
