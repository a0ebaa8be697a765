import csv
import json

import pytest

# Frozen copy of the interchange header; catches accidental schema edits.
COLUMNS = (
    "j1,j2,alpha,bx,boundary,mode,engine,D,e0,gap,degeneracy,"
    "x1,x2,x3,seg_lo,seg_hi,trunc_weight"
).split(",")


def make_row(j1=1, j2=1, alpha=0.5, bx=0.1, boundary="obc", mode="boundary",
             engine="ed", D="", e0=-7.25, gap=0.5, degeneracy=1,
             x1=0.0, x2=0.0, x3=0.0, seg_lo="", seg_hi="", trunc_weight=""):
    vals = [j1, j2, repr(float(alpha)), repr(float(bx)), boundary, mode, engine,
            D, repr(float(e0)), repr(float(gap)), degeneracy,
            repr(float(x1)), repr(float(x2)), repr(float(x3)),
            seg_lo if seg_lo == "" else repr(float(seg_lo)),
            seg_hi if seg_hi == "" else repr(float(seg_hi)),
            trunc_weight if trunc_weight == "" else repr(float(trunc_weight))]
    return [str(v) for v in vals]


def write_csv(path, rows, columns=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS if columns is None else columns)
        writer.writerows(rows)
    return str(path)


@pytest.fixture
def cloud_csv(tmp_path):
    """A small mixed cloud: ED rows plus a zero-field degenerate fiber."""
    rows = [
        make_row(alpha=0.0, bx=0.0, x1=0.2, x2=-0.9, x3=0.0, degeneracy=4,
                 seg_lo=-1.0, seg_hi=1.0),
        make_row(alpha=0.5, bx=0.0, x1=0.6, x2=-0.5, x3=1.0, degeneracy=4,
                 seg_lo=-1.0, seg_hi=1.0),
        make_row(alpha=0.5, bx=0.1, x1=0.61, x2=-0.52, x3=0.8),
        make_row(alpha=0.5, bx=1.0, x1=0.3, x2=-0.2, x3=0.97),
        make_row(j1=-1, alpha=0.5, bx=0.1, x1=-0.61, x2=-0.52, x3=-0.8),
        make_row(j2=-1, alpha=0.5, bx=1.0, x1=0.3, x2=0.2, x3=0.5),
        make_row(j1=-1, j2=-1, alpha=0.25, bx=0.5, x1=-0.4, x2=0.3, x3=0.33),
    ]
    return write_csv(tmp_path / "cloud.csv", rows)


@pytest.fixture
def segments_json(tmp_path):
    segs = [{
        "j1": 1, "j2": 1, "alpha": 0.5, "bx": 0.0, "boundary": "obc",
        "axis": "x3", "lo": -1.0, "hi": 1.0, "width": 2.0, "n_points": 5,
    }]
    path = tmp_path / "segments.json"
    path.write_text(json.dumps(segs))
    return str(path)
