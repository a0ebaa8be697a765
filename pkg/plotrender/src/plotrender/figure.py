"""3D figure assembly: point clouds, hulls, and ruled-segment overlays."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from mpl_toolkits.mplot3d import Axes3D  # noqa: F401  registers the projection
from mpl_toolkits.mplot3d.art3d import Poly3DCollection
from scipy.spatial import ConvexHull, QhullError

from .schema import load_samples, load_segments

__all__ = ["PlotSpec", "render"]

_FORMATS = ("png", "svg")
_COLOR_CHANNELS = ("bx", "degeneracy", "D")

# Overlay palette; the first three follow the yellow/blue/green convention
# for increasing bond dimension.
_SERIES_PALETTE = ("#e6b800", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf")
_FIBER_COLOR = "#00b050"
_SEGMENT_COLOR = "#d62728"
_FALLBACK_COLOR = "#9e9e9e"
_AXIS_LABELS = (r"$\langle XZX\rangle$", r"$\langle Z\rangle$", r"$\langle X\rangle$")

_HALF_SPACE_RE = re.compile(r"^\s*(x[123])\s*(>=|<=|>|<)\s*([-+0-9.eE]+)\s*$")
_OPS = {
    ">=": lambda v, t: v >= t,
    "<=": lambda v, t: v <= t,
    ">": lambda v, t: v > t,
    "<": lambda v, t: v < t,
}


def parse_half_space(expr):
    """Parse a filter such as ``"x3>=0"`` into (axis, op, threshold)."""
    m = _HALF_SPACE_RE.match(expr)
    if m is None:
        raise ValueError(
            f"half_space must look like 'x3>=0' (axis x1|x2|x3, one of >= <= > <); got {expr!r}"
        )
    axis, op, raw = m.groups()
    try:
        threshold = float(raw)
    except ValueError:
        raise ValueError(f"half_space threshold {raw!r} is not a number") from None
    if not np.isfinite(threshold):
        raise ValueError("half_space threshold must be finite")
    return axis, op, threshold


def apply_half_space(rows, expr):
    """Keep the rows on the requested side of an axis-aligned plane."""
    axis, op, threshold = parse_half_space(expr)
    keep = _OPS[op]
    return [r for r in rows if r[axis] is not None and keep(r[axis], threshold)]


@dataclass(frozen=True)
class PlotSpec:
    """Everything needed to turn sweep CSVs into one figure.

    ``format`` is inferred from ``out_path`` when omitted; ``half_space``
    accepts expressions like ``"x3>=0"`` to replicate upper-half views.
    """

    csv_paths: tuple = ()
    out_path: str = "figure.svg"
    format: str = ""
    segments_path: str = ""
    color_by: str = "bx"
    hull: bool = False
    highlight_segments: bool = True
    half_space: str = ""
    elev: float = 18.0
    azim: float = -60.0
    title: str = ""
    marker_size: float = 14.0

    def __post_init__(self):
        if isinstance(self.csv_paths, (str, bytes)):
            raise ValueError("csv_paths must be a sequence of paths, not one string")
        object.__setattr__(self, "csv_paths", tuple(str(p) for p in self.csv_paths))
        if not self.csv_paths:
            raise ValueError("csv_paths must name at least one CSV")
        fmt = self.format or self.out_path.rpartition(".")[2].lower()
        if fmt not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}; got {fmt!r}")
        object.__setattr__(self, "format", fmt)
        if self.color_by not in _COLOR_CHANNELS:
            raise ValueError(
                f"color_by must be one of {_COLOR_CHANNELS}; got {self.color_by!r}"
            )
        if self.half_space:
            parse_half_space(self.half_space)
        for name in ("elev", "azim", "marker_size"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def _coords(rows):
    return np.array([(r["x1"], r["x2"], r["x3"]) for r in rows], dtype=float)


def _scatter_continuous(ax, rows, size):
    pts = _coords(rows)
    values = np.array([r["bx"] for r in rows], dtype=float)
    sc = ax.scatter(
        pts[:, 0], pts[:, 1], pts[:, 2],
        c=values, cmap="viridis", s=size, depthshade=False,
    )
    return sc


def _scatter_grouped(ax, rows, key, size):
    """One series per distinct value of ``key``; None collects into a grey series."""
    known = sorted({r[key] for r in rows if r[key] is not None})
    groups = [
        (f"{key} = {v}", _SERIES_PALETTE[i % len(_SERIES_PALETTE)],
         [r for r in rows if r[key] == v])
        for i, v in enumerate(known)
    ]
    rest = [r for r in rows if r[key] is None]
    if rest:
        tag = "exact (ED)" if key == "D" else f"{key} n/a"
        groups.append((tag, _FALLBACK_COLOR, rest))
    for label, color, grp in groups:
        pts = _coords(grp)
        ax.scatter(
            pts[:, 0], pts[:, 1], pts[:, 2],
            color=color, s=size, depthshade=False, label=label,
        )


def _draw_hull(ax, rows):
    pts = np.unique(_coords(rows), axis=0)
    if len(pts) < 4:
        return "hull skipped: fewer than 4 distinct points"
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return "hull skipped: degenerate point cloud"
    faces = [pts[simplex] for simplex in hull.simplices]
    ax.add_collection3d(
        Poly3DCollection(faces, facecolor="#b0bec5", edgecolor="none", alpha=0.18)
    )
    return ""


def _draw_segments(ax, rows, segments):
    """Overlay each detected segment as a vertical line through its fiber."""
    drawn = skipped = 0
    for seg in segments:
        anchor = None
        for r in rows:
            if (
                r["j1"] == seg["j1"]
                and r["j2"] == seg["j2"]
                and r["alpha"] == seg["alpha"]
                and r["bx"] == seg["bx"]
                and r["boundary"] == seg["boundary"]
            ):
                anchor = r
                break
        if anchor is None:
            skipped += 1
            continue
        ax.plot(
            [anchor["x1"], anchor["x1"]],
            [anchor["x2"], anchor["x2"]],
            [seg["lo"], seg["hi"]],
            color=_SEGMENT_COLOR, lw=2.2, solid_capstyle="round",
            label="ruled segment" if drawn == 0 else None,
        )
        drawn += 1
    return drawn, skipped


def render(spec):
    """Write the figure described by ``spec``; returns the output path.

    Reads only the referenced CSV/JSON files and writes only ``out_path``.
    With the pinned hash salt the same spec and inputs reproduce the SVG
    byte for byte.
    """
    rows = []
    for path in spec.csv_paths:
        rows.extend(load_samples(path))
    if spec.half_space:
        rows = apply_half_space(rows, spec.half_space)
    segments = load_segments(spec.segments_path) if spec.segments_path else []

    notes = []
    with mpl.rc_context({"svg.hashsalt": "plotrender", "svg.fonttype": "none"}):
        fig = Figure(figsize=(7.2, 5.8), dpi=100)
        FigureCanvasAgg(fig)
        ax = fig.add_subplot(projection="3d")
        ax.view_init(elev=spec.elev, azim=spec.azim)
        ax.set_xlabel(_AXIS_LABELS[0])
        ax.set_ylabel(_AXIS_LABELS[1])
        ax.set_zlabel(_AXIS_LABELS[2])
        if spec.title:
            ax.set_title(spec.title)

        if not rows:
            ax.text2D(
                0.5, 0.55, "no samples to draw",
                transform=ax.transAxes, ha="center", fontsize=13, color="#b00020",
            )
            ax.text2D(
                0.5, 0.45, "check the CSV inputs and half-space filter",
                transform=ax.transAxes, ha="center", fontsize=9, color="#b00020",
            )
        else:
            if spec.color_by == "bx":
                sc = _scatter_continuous(ax, rows, spec.marker_size)
                fig.colorbar(sc, ax=ax, shrink=0.62, pad=0.1, label="bx")
            else:
                _scatter_grouped(ax, rows, spec.color_by, spec.marker_size)
            fiber = [r for r in rows if r["bx"] == 0.0]
            if fiber and spec.color_by == "bx":
                pts = _coords(fiber)
                ax.scatter(
                    pts[:, 0], pts[:, 1], pts[:, 2],
                    color=_FIBER_COLOR, s=spec.marker_size * 2.2,
                    depthshade=False, label="bx = 0 fiber", marker="D",
                )
            if spec.hull:
                note = _draw_hull(ax, rows)
                if note:
                    notes.append(note)
            if spec.highlight_segments and segments:
                drawn, skipped = _draw_segments(ax, rows, segments)
                if skipped:
                    notes.append(f"{skipped} segment(s) had no matching sample row")

        handles, _ = ax.get_legend_handles_labels()
        if handles:
            ax.legend(loc="upper left", fontsize=8)
        for i, note in enumerate(notes):
            ax.text2D(
                0.99, 0.02 + 0.05 * i, note,
                transform=ax.transAxes, ha="right", fontsize=8, color="#7a5c00",
            )

        metadata = {"Date": None} if spec.format == "svg" else None
        fig.savefig(spec.out_path, format=spec.format, metadata=metadata)
    return spec.out_path
