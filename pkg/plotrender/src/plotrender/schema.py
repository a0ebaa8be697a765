"""Interchange schema shared with the sweep tool.

The renderer consumes CSVs and segment JSON files emitted by the solver
package but never imports it; the column contract is re-declared here so
the two sides can only drift apart loudly (missing columns raise).
"""

from __future__ import annotations

import csv
import json

__all__ = [
    "SAMPLE_COLUMNS",
    "SEGMENT_KEYS",
    "SchemaError",
    "load_samples",
    "load_segments",
]

SAMPLE_COLUMNS = (
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

SEGMENT_KEYS = ("j1", "j2", "alpha", "bx", "boundary", "axis", "lo", "hi", "width")

_INT_COLUMNS = frozenset({"j1", "j2", "D", "degeneracy"})
_TEXT_COLUMNS = frozenset({"boundary", "mode", "engine"})


class SchemaError(ValueError):
    """An input file does not follow the interchange contract.

    ``missing`` lists the absent column or key names.
    """

    def __init__(self, path, missing):
        self.path = str(path)
        self.missing = tuple(missing)
        super().__init__(
            f"{self.path} is missing columns: {', '.join(self.missing)}"
        )


def load_samples(path):
    """Read one sweep CSV into a list of plain dicts.

    Empty cells become None; integer-valued columns are parsed as int, text
    columns stay strings, everything else becomes float.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in SAMPLE_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(path, missing)
        for raw in reader:
            row = {}
            for col in SAMPLE_COLUMNS:
                cell = raw[col]
                if col in _TEXT_COLUMNS:
                    row[col] = cell
                elif cell == "":
                    row[col] = None
                elif col in _INT_COLUMNS:
                    row[col] = int(cell)
                else:
                    row[col] = float(cell)
            rows.append(row)
    return rows


def load_segments(path):
    """Read a detected-segments JSON file (a list of flat dicts)."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise SchemaError(path, ["<list of segment objects>"])
    for row in data:
        missing = [k for k in SEGMENT_KEYS if k not in row]
        if missing:
            raise SchemaError(path, missing)
    return data
