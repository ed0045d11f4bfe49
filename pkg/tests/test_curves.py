"""Curve scans, linking structure, and file export."""

import numpy as np
import pytest

from maslov_count import catalog
from maslov_count.curves import (
    CurvePoint,
    CurveSet,
    check_monotone,
    export_curves,
    origin_shelves,
    render_curves,
    scan_box,
)
from maslov_count.errors import ResolutionTooCoarseError


@pytest.fixture(scope="module")
def sl_scans():
    sys, bc = catalog.scalar_sturm_liouville()
    renorm = scan_box(sys, bc, 0.0, 50.0, lam_samples=31, x_samples=601,
                      method="renormalized")
    standard = scan_box(sys, bc, 0.0, 50.0, lam_samples=31, x_samples=601,
                        method="standard")
    return renorm, standard


class TestScan:
    def test_empty_window_has_no_curves(self):
        sys, bc = catalog.scalar_sturm_liouville()
        cs = scan_box(sys, bc, 50.0, 80.0, lam_samples=11, x_samples=301)
        assert cs.points == []
        assert cs.curves == []
        assert cs.top_crossings == []

    def test_renormalized_curves_exit_top_at_eigenvalues(self, sl_scans):
        renorm, _ = sl_scans
        assert len(renorm.curves) == 2
        assert np.allclose(sorted(renorm.top_crossings),
                           [np.pi**2, 4 * np.pi**2], atol=1e-6)
        for curve in renorm.curves:
            assert curve[-1].x == 1.0

    def test_renormalized_curves_enter_left_and_climb(self, sl_scans):
        renorm, _ = sl_scans
        assert origin_shelves(renorm) == ["left", "left"]
        assert check_monotone(renorm)

    def test_methods_agree_on_top_crossings(self, sl_scans):
        renorm, standard = sl_scans
        assert len(renorm.top_crossings) == len(standard.top_crossings)
        for a, b in zip(sorted(renorm.top_crossings), sorted(standard.top_crossings)):
            assert abs(a - b) <= 1e-6

    def test_no_bottom_or_right_origins_for_renormalized(self, sl_scans):
        renorm, _ = sl_scans
        assert all(o not in ("bottom", "right") for o in origin_shelves(renorm))

    def test_too_few_columns_rejected(self):
        sys, bc = catalog.scalar_sturm_liouville()
        with pytest.raises(ResolutionTooCoarseError):
            scan_box(sys, bc, 0.0, 50.0, lam_samples=2, x_samples=101)


class TestExport:
    def _single_point_set(self):
        return CurveSet(method="renormalized",
                        points=[CurvePoint(x=0.5, lam=1.25, multiplicity=1)],
                        curves=[[CurvePoint(x=0.5, lam=1.25, multiplicity=1)]],
                        box=(0.0, 2.0, 0.0, 1.0))

    def test_empty_csv_has_header_only(self, tmp_path):
        cs = CurveSet(method="standard", points=[], curves=[], box=(0.0, 1.0, 0.0, 1.0))
        out = tmp_path / "empty.csv"
        export_curves(cs, "csv", out)
        assert out.read_bytes() == b"method,curve_id,x,lambda,multiplicity\n"

    def test_single_point_roundtrip(self, tmp_path):
        import csv

        out = tmp_path / "one.csv"
        export_curves(self._single_point_set(), "csv", out)
        with open(out, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert float(rows[0]["x"]) == 0.5
        assert float(rows[0]["lambda"]) == 1.25
        assert int(rows[0]["multiplicity"]) == 1
        assert rows[0]["method"] == "renormalized"

    def test_csv_full_precision_roundtrip(self, tmp_path):
        import csv

        x = 1.0 / 3.0
        lam = np.pi**2
        cs = CurveSet(method="standard",
                      points=[CurvePoint(x=x, lam=lam, multiplicity=2)],
                      curves=[[CurvePoint(x=x, lam=lam, multiplicity=2)]],
                      box=(0.0, 50.0, 0.0, 1.0))
        out = tmp_path / "prec.csv"
        export_curves(cs, "csv", out)
        with open(out, newline="", encoding="utf-8") as fh:
            row = next(csv.DictReader(fh))
        assert float(row["x"]) == x
        assert float(row["lambda"]) == lam

    def test_svg_polyline_per_curve(self, sl_scans, tmp_path):
        renorm, _ = sl_scans
        out = tmp_path / "curves.svg"
        export_curves(renorm, "svg", out)
        text = out.read_text(encoding="utf-8")
        assert text.count("<polyline") == len(renorm.curves) == 2

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            export_curves(self._single_point_set(), "pdf", tmp_path / "x.pdf")

    def test_render_figure(self, sl_scans, tmp_path):
        renorm, standard = sl_scans
        out = tmp_path / "curves.png"
        render_curves([renorm, standard], out)
        assert out.stat().st_size > 1000

    def test_csv_deterministic(self, sl_scans, tmp_path):
        renorm, _ = sl_scans
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_curves(renorm, "csv", a)
        export_curves(renorm, "csv", b)
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()
