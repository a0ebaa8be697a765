"""Batch renderer for sweep CSVs: 3D scatter, hulls, ruled-segment overlays."""

from .figure import PlotSpec, apply_half_space, parse_half_space, render
from .schema import (
    SAMPLE_COLUMNS,
    SEGMENT_KEYS,
    SchemaError,
    load_samples,
    load_segments,
)

__version__ = "0.1.0"

__all__ = [
    "PlotSpec",
    "render",
    "apply_half_space",
    "parse_half_space",
    "SAMPLE_COLUMNS",
    "SEGMENT_KEYS",
    "SchemaError",
    "load_samples",
    "load_segments",
    "__version__",
]
