import json

import pytest

from plotrender import PlotSpec, apply_half_space, parse_half_space, render

from conftest import make_row, write_csv


def svg_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestPlotSpec:
    def test_format_inferred_from_suffix(self):
        spec = PlotSpec(csv_paths=("a.csv",), out_path="fig.svg")
        assert spec.format == "svg"
        spec = PlotSpec(csv_paths=("a.csv",), out_path="fig.png")
        assert spec.format == "png"

    def test_explicit_format_wins(self):
        spec = PlotSpec(csv_paths=("a.csv",), out_path="fig.img", format="png")
        assert spec.format == "png"

    def test_rejects_unknown_format(self):
        with pytest.raises(ValueError, match="format"):
            PlotSpec(csv_paths=("a.csv",), out_path="fig.pdf")

    def test_rejects_empty_inputs(self):
        with pytest.raises(ValueError, match="at least one CSV"):
            PlotSpec(csv_paths=(), out_path="fig.svg")

    def test_rejects_bare_string_paths(self):
        with pytest.raises(ValueError, match="sequence"):
            PlotSpec(csv_paths="a.csv", out_path="fig.svg")

    def test_rejects_unknown_color_channel(self):
        with pytest.raises(ValueError, match="color_by"):
            PlotSpec(csv_paths=("a.csv",), out_path="f.svg", color_by="energy")

    def test_rejects_bad_half_space_early(self):
        with pytest.raises(ValueError, match="half_space"):
            PlotSpec(csv_paths=("a.csv",), out_path="f.svg", half_space="x4 >= 0")


class TestHalfSpace:
    def test_parse_forms(self):
        assert parse_half_space("x3>=0") == ("x3", ">=", 0.0)
        assert parse_half_space(" x1 < -0.25 ") == ("x1", "<", -0.25)
        assert parse_half_space("x2<=1e-3") == ("x2", "<=", 1e-3)

    @pytest.mark.parametrize("expr", ["x4>=0", "x3 == 0", "x3 >=", ">= 0", "x3>=inf"])
    def test_parse_rejects(self, expr):
        with pytest.raises(ValueError):
            parse_half_space(expr)

    def test_filter_keeps_requested_side(self):
        rows = [{"x3": v} for v in (-1.0, -0.2, 0.0, 0.4, 1.0)]
        kept = apply_half_space(rows, "x3>=0")
        assert [r["x3"] for r in kept] == [0.0, 0.4, 1.0]
        kept = apply_half_space(rows, "x3>0")
        assert [r["x3"] for r in kept] == [0.4, 1.0]

    def test_filter_drops_missing_values(self):
        rows = [{"x1": None}, {"x1": 2.0}]
        assert apply_half_space(rows, "x1>=0") == [{"x1": 2.0}]


class TestRender:
    def test_svg_output_is_reproducible(self, tmp_path, cloud_csv, segments_json):
        spec = PlotSpec(
            csv_paths=(cloud_csv,), out_path=str(tmp_path / "fig.svg"),
            segments_path=segments_json, hull=True, title="cloud",
        )
        render(spec)
        first = svg_bytes(spec.out_path)
        render(spec)
        assert svg_bytes(spec.out_path) == first
        assert first.startswith(b"<?xml")

    def test_png_output(self, tmp_path, cloud_csv):
        spec = PlotSpec(csv_paths=(cloud_csv,), out_path=str(tmp_path / "fig.png"))
        render(spec)
        assert svg_bytes(spec.out_path)[:4] == b"\x89PNG"

    def test_axis_labels_present(self, tmp_path, cloud_csv):
        spec = PlotSpec(csv_paths=(cloud_csv,), out_path=str(tmp_path / "f.svg"))
        render(spec)
        data = svg_bytes(spec.out_path)
        assert b"XZX" in data

    def test_zero_field_fiber_is_visually_distinct(self, tmp_path, cloud_csv):
        spec = PlotSpec(csv_paths=(cloud_csv,), out_path=str(tmp_path / "f.svg"))
        render(spec)
        assert b"#00b050" in svg_bytes(spec.out_path)
        assert b"bx = 0 fiber" in svg_bytes(spec.out_path)

    def test_no_fiber_marker_without_zero_field_rows(self, tmp_path):
        rows = [make_row(bx=0.3, x1=0.1), make_row(bx=0.7, x1=0.5)]
        path = write_csv(tmp_path / "c.csv", rows)
        spec = PlotSpec(csv_paths=(path,), out_path=str(tmp_path / "f.svg"))
        render(spec)
        assert b"#00b050" not in svg_bytes(spec.out_path)

    def test_segments_drawn_as_overlay(self, tmp_path, cloud_csv, segments_json):
        with_segs = PlotSpec(
            csv_paths=(cloud_csv,), out_path=str(tmp_path / "a.svg"),
            segments_path=segments_json,
        )
        render(with_segs)
        assert b"#d62728" in svg_bytes(with_segs.out_path)
        assert b"ruled segment" in svg_bytes(with_segs.out_path)

        muted = PlotSpec(
            csv_paths=(cloud_csv,), out_path=str(tmp_path / "b.svg"),
            segments_path=segments_json, highlight_segments=False,
        )
        render(muted)
        assert b"#d62728" not in svg_bytes(muted.out_path)

    def test_unmatched_segment_is_reported(self, tmp_path, cloud_csv):
        segs = [{"j1": 1, "j2": 1, "alpha": 0.123, "bx": 0.0, "boundary": "obc",
                 "axis": "x3", "lo": -1.0, "hi": 1.0, "width": 2.0}]
        seg_path = tmp_path / "segs.json"
        seg_path.write_text(json.dumps(segs))
        spec = PlotSpec(
            csv_paths=(cloud_csv,), out_path=str(tmp_path / "f.svg"),
            segments_path=str(seg_path),
        )
        render(spec)
        assert b"no matching sample row" in svg_bytes(spec.out_path)

    def test_empty_csv_yields_warning_annotation(self, tmp_path):
        path = write_csv(tmp_path / "empty.csv", [])
        spec = PlotSpec(csv_paths=(path,), out_path=str(tmp_path / "f.svg"))
        render(spec)
        assert b"no samples to draw" in svg_bytes(spec.out_path)

    def test_half_space_can_empty_the_cloud(self, tmp_path, cloud_csv):
        spec = PlotSpec(
            csv_paths=(cloud_csv,), out_path=str(tmp_path / "f.svg"),
            half_space="x3>=5",
        )
        render(spec)
        assert b"no samples to draw" in svg_bytes(spec.out_path)

    def test_half_space_changes_the_figure(self, tmp_path, cloud_csv):
        full = PlotSpec(csv_paths=(cloud_csv,), out_path=str(tmp_path / "a.svg"))
        upper = PlotSpec(
            csv_paths=(cloud_csv,), out_path=str(tmp_path / "b.svg"),
            half_space="x3>=0",
        )
        render(full)
        render(upper)
        assert svg_bytes(full.out_path) != svg_bytes(upper.out_path)

    def test_hull_shading_appears(self, tmp_path):
        corners = [
            make_row(alpha=0.1 * i, bx=0.2, x1=x1, x2=x2, x3=x3)
            for i, (x1, x2, x3) in enumerate(
                (a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)
            )
        ]
        path = write_csv(tmp_path / "cube.csv", corners)
        flat = PlotSpec(csv_paths=(path,), out_path=str(tmp_path / "a.svg"))
        shaded = PlotSpec(csv_paths=(path,), out_path=str(tmp_path / "b.svg"), hull=True)
        render(flat)
        render(shaded)
        assert len(svg_bytes(shaded.out_path)) > len(svg_bytes(flat.out_path))
        assert b"hull skipped" not in svg_bytes(shaded.out_path)

    def test_degenerate_hull_is_skipped_with_note(self, tmp_path):
        rows = [make_row(alpha=0.1 * i, x1=0.1 * i, x2=0.0, x3=0.0) for i in range(5)]
        path = write_csv(tmp_path / "line.csv", rows)
        spec = PlotSpec(csv_paths=(path,), out_path=str(tmp_path / "f.svg"), hull=True)
        render(spec)
        assert b"hull skipped" in svg_bytes(spec.out_path)

    def test_bond_dimension_overlay_across_files(self, tmp_path):
        a = write_csv(tmp_path / "d40.csv",
                      [make_row(engine="tebd", D=40, alpha=0.1 * i, x1=0.1 * i)
                       for i in range(4)])
        b = write_csv(tmp_path / "d60.csv",
                      [make_row(engine="tebd", D=60, alpha=0.1 * i, x2=0.1 * i)
                       for i in range(4)])
        c = write_csv(tmp_path / "ed.csv", [make_row(alpha=0.9, x3=0.4)])
        spec = PlotSpec(
            csv_paths=(a, b, c), out_path=str(tmp_path / "f.svg"), color_by="D",
        )
        render(spec)
        data = svg_bytes(spec.out_path)
        assert b"D = 40" in data and b"D = 60" in data
        assert b"exact (ED)" in data

    def test_degeneracy_coloring(self, tmp_path):
        rows = [make_row(degeneracy=1, x1=0.1),
                make_row(degeneracy=4, x1=0.5, alpha=0.9)]
        path = write_csv(tmp_path / "deg.csv", rows)
        spec = PlotSpec(
            csv_paths=(path,), out_path=str(tmp_path / "f.svg"), color_by="degeneracy",
        )
        render(spec)
        data = svg_bytes(spec.out_path)
        assert b"degeneracy = 1" in data and b"degeneracy = 4" in data

    def test_render_only_touches_the_output_file(self, tmp_path, cloud_csv):
        before = svg_bytes(cloud_csv)
        out = tmp_path / "sub" / "f.svg"
        out.parent.mkdir()
        render(PlotSpec(csv_paths=(cloud_csv,), out_path=str(out)))
        assert svg_bytes(cloud_csv) == before
        assert sorted(p.name for p in out.parent.iterdir()) == ["f.svg"]
