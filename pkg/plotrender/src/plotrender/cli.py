"""Command line entry point: flags (or a JSON spec file) in, one image out."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from .figure import PlotSpec, render
from .schema import SchemaError

__all__ = ["build_parser", "main"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plotrender",
        description="Render sweep CSVs as 3D convex-set figures (PNG or SVG).",
    )
    parser.add_argument("csv", nargs="*", help="input sweep CSV file(s)")
    parser.add_argument(
        "--spec", help="JSON file with PlotSpec fields; explicit flags override it"
    )
    parser.add_argument("--out", help="output image path (.png or .svg)")
    parser.add_argument("--format", choices=("png", "svg"))
    parser.add_argument("--segments", help="detected-segments JSON to overlay")
    parser.add_argument("--color-by", choices=("bx", "degeneracy", "D"))
    parser.add_argument("--hull", action="store_true", default=None,
                        help="shade the 3D convex hull of the cloud")
    parser.add_argument("--no-segment-highlight", action="store_true",
                        help="load segments but do not draw them")
    parser.add_argument("--half-space", metavar="EXPR",
                        help="keep one side of a plane, e.g. 'x3>=0'")
    parser.add_argument("--elev", type=float)
    parser.add_argument("--azim", type=float)
    parser.add_argument("--title")
    parser.add_argument("--marker-size", type=float)
    return parser


def _spec_from_args(args):
    values = {}
    if args.spec:
        with open(args.spec) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.spec} must hold one JSON object")
        allowed = {f.name for f in fields(PlotSpec)}
        unknown = sorted(set(loaded) - allowed)
        if unknown:
            raise ValueError(f"unknown spec key(s): {', '.join(unknown)}")
        values.update(loaded)

    overrides = {
        "csv_paths": tuple(args.csv) if args.csv else None,
        "out_path": args.out,
        "format": args.format,
        "segments_path": args.segments,
        "color_by": args.color_by,
        "hull": args.hull,
        "half_space": args.half_space,
        "elev": args.elev,
        "azim": args.azim,
        "title": args.title,
        "marker_size": args.marker_size,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_segment_highlight:
        values["highlight_segments"] = False
    if "csv_paths" in values:
        values["csv_paths"] = tuple(values["csv_paths"])
    if not values.get("csv_paths"):
        raise ValueError("no input CSVs given (positional arguments or spec file)")
    if not values.get("out_path"):
        raise ValueError("no output path given (--out or spec file)")
    return PlotSpec(**values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
        out = render(spec)
    except (SchemaError, ValueError, TypeError, OSError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload), file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
