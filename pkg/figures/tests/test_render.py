import csv

import pytest

from figure_scripts import FigureSpec, SchemaError, build_figure, load_rows, render
from figure_scripts.cli import main

HEADER = (
    "curve,q,a_q,resid1,resid2,sign,vanished_plus,vanished_minus,size_plus,"
    "size_minus,r_empirical,r_main,r_second,X,epsilon,P,build_id"
)


def write_suite(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(HEADER + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for curve, q, a_q, r1, r2 in rows:
            w.writerow(
                [curve, q, a_q, r1, r2, "minus", 5, 5, 100, 100, 1.0, 1.0, 1.0,
                 100000, 1e-09, 100000, "deadbeef0000"]
            )
    return path


@pytest.fixture
def sample_csv(tmp_path):
    rows = [
        ("11A", 2, -2, 0.011, 0.002),
        ("11A", 3, -1, -0.008, -0.001),
        ("11A", 13, 4, 0.004, 0.0005),
        ("307A", 2, 0, 0.001, 0.001),
        ("307A", 13, 6, -0.006, 0.0004),
        ("307A", 499, -10, 0.003, -0.0002),
    ]
    return write_suite(tmp_path / "suite.csv", rows)


@pytest.fixture
def empty_csv(tmp_path):
    return write_suite(tmp_path / "empty.csv", [])


class TestLoadRows:
    def test_parses(self, sample_csv):
        rows = load_rows(sample_csv)
        assert len(rows) == 6
        assert rows[0].curve == "11A" and rows[0].q == 2

    def test_missing_columns_listed(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("curve,q\n11A,2\n")
        with pytest.raises(SchemaError, match="resid1"):
            load_rows(bad)

    def test_null_residual_rows_skipped(self, tmp_path):
        path = tmp_path / "s.csv"
        with open(path, "w") as fh:
            fh.write(HEADER + "\n")
            fh.write("11A,2,-2,,,minus,3,0,100,100,,1.0,1.0,100000,1e-09,100000,x\n")
            fh.write("11A,3,-1,0.01,0.002,minus,5,5,100,100,1.0,1.0,1.0,100000,1e-09,100000,x\n")
        assert len(load_rows(path)) == 1


class TestSpecValidation:
    def test_unknown_kind(self, sample_csv, tmp_path):
        with pytest.raises(SchemaError, match="kind"):
            FigureSpec("pie", sample_csv, tmp_path / "x.png")

    def test_empty_grid(self, sample_csv, tmp_path):
        with pytest.raises(SchemaError, match="nonempty"):
            FigureSpec("grid_by_aq", sample_csv, tmp_path / "x.png", grid_values=())

    def test_bad_bin(self, sample_csv, tmp_path):
        with pytest.raises(SchemaError, match="bin width"):
            FigureSpec("hist_overlay", sample_csv, tmp_path / "x.png", bin_width=0.0)


class TestHistOverlay:
    def test_counts_both_columns(self, sample_csv, tmp_path):
        spec = FigureSpec("hist_overlay", sample_csv, tmp_path / "h.png")
        fig, info = build_figure(spec)
        assert info["counts"]["first order"] == 6
        assert info["counts"]["second order"] == 6

    def test_empty_input_renders(self, empty_csv, tmp_path):
        spec = FigureSpec("hist_overlay", empty_csv, tmp_path / "h.png")
        out = render(spec)
        assert out.exists() and out.stat().st_size > 0

    def test_clip_excludes_outliers(self, tmp_path):
        path = write_suite(tmp_path / "s.csv", [("11A", 3, -1, 0.5, 0.001)])
        spec = FigureSpec("hist_overlay", path, tmp_path / "h.png")
        _, info = build_figure(spec)
        assert info["counts"]["first order"] == 0
        assert info["counts"]["second order"] == 1


class TestScatterQ:
    def test_point_counts(self, sample_csv, tmp_path):
        spec = FigureSpec("scatter_q", sample_csv, tmp_path / "s.png")
        fig, info = build_figure(spec)
        assert info["points"] == 6
        for ax in fig.axes:
            assert len(ax.collections) == 1
            assert ax.collections[0].get_offsets().shape[0] == 6

    def test_two_row_csv(self, tmp_path):
        path = write_suite(
            tmp_path / "two.csv", [("11A", 2, -2, 0.01, 0.001), ("11A", 3, -1, 0.0, 0.0)]
        )
        spec = FigureSpec("scatter_q", path, tmp_path / "s.png")
        fig, info = build_figure(spec)
        assert info["points"] == 2
        assert fig.axes[0].collections[0].get_offsets().shape[0] == 2

    def test_q_range_filter(self, sample_csv, tmp_path):
        spec = FigureSpec("scatter_q", sample_csv, tmp_path / "s.png", q_range=(2, 100))
        _, info = build_figure(spec)
        assert info["points"] == 5  # q = 499 filtered out


class TestGridByAq:
    def test_one_facet_per_present_value(self, sample_csv, tmp_path):
        spec = FigureSpec("grid_by_aq", sample_csv, tmp_path / "g.png")
        fig, info = build_figure(spec)
        # distinct a_q in the sample intersected with the default grid list
        assert info["facets"] == [-10, -2, -1, 0, 4, 6]
        assert len(info["facets"]) == len(set(r.a_q for r in load_rows(sample_csv)))

    def test_every_point_in_exactly_one_facet(self, sample_csv, tmp_path):
        spec = FigureSpec("grid_by_aq", sample_csv, tmp_path / "g.png")
        _, info = build_figure(spec)
        assert sum(info["per_facet"].values()) == info["n_rows"]

    def test_column_option(self, sample_csv, tmp_path):
        spec = FigureSpec("grid_by_aq", sample_csv, tmp_path / "g.png", column="resid2")
        fig, info = build_figure(spec)
        assert info["n_rows"] == 6


class TestRenderFiles:
    def test_idempotent_bytes(self, sample_csv, tmp_path):
        a = render(FigureSpec("hist_overlay", sample_csv, tmp_path / "a.png"))
        b = render(FigureSpec("hist_overlay", sample_csv, tmp_path / "b.png"))
        assert a.read_bytes() == b.read_bytes()

    def test_input_not_mutated(self, sample_csv, tmp_path):
        before = sample_csv.read_bytes()
        render(FigureSpec("scatter_q", sample_csv, tmp_path / "s.png"))
        assert sample_csv.read_bytes() == before

    def test_all_kinds_render(self, sample_csv, tmp_path):
        for kind in ("hist_overlay", "scatter_q", "grid_by_aq"):
            out = render(FigureSpec(kind, sample_csv, tmp_path / f"{kind}.png"))
            assert out.stat().st_size > 0


class TestCli:
    def test_ok(self, sample_csv, tmp_path, capsys):
        code = main(
            ["--kind", "grid_by_aq", "--in", str(sample_csv), "--out", str(tmp_path / "g.png")]
        )
        assert code == 0
        assert (tmp_path / "g.png").exists()

    def test_schema_error_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = main(["--kind", "scatter_q", "--in", str(bad), "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "resid" in capsys.readouterr().err

    def test_missing_file_exit_4(self, tmp_path, capsys):
        code = main(
            ["--kind", "scatter_q", "--in", str(tmp_path / "no.csv"), "--out", str(tmp_path / "x.png")]
        )
        assert code == 4
