"""Rendering tests: bundled specs, the CSV contract, errors, determinism."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from su2qudit_plots import render as rd  # noqa: F401 (module, not the function)

assert hasattr(rd, "FigureSpec")

DATA = Path(rd.__file__).parent / "data"
SPECS = Path(rd.__file__).parent / "specs"

GOOD_CSV = """# schema_version = 1
# units = natural-units-eq7
t,rho,fidelity,p_d_1,p_d_2
0,0,1,0,0
0.5,0.25,0.99,0.1,0.15
1,0.5,0.98,0.2,0.3
"""

SWEEP_CSV = """# axis = noise.delta_b
value,final_fidelity,final_infidelity
0.05,0.999,0.001
0.1,0.99,0.01
0.2,0.96,0.04
"""


def _spec(tmp_path, **overrides):
    raw = {
        "kind": "timeseries",
        "inputs": {"digital": "series.csv"},
        "columns": ["rho"],
        "output": "panel.png",
    }
    raw.update(overrides)
    (tmp_path / "series.csv").write_text(GOOD_CSV, encoding="utf-8")
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return path


class TestCsvContract:
    def test_metadata_and_rows_parsed(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text(GOOD_CSV, encoding="utf-8")
        cols, data, meta = rd.read_csv(path)
        assert cols[0] == "t" and data.shape == (3, 5)
        assert meta["units"] == "natural-units-eq7"

    def test_empty_series_is_error(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only = meta\nt,rho\n", encoding="utf-8")
        with pytest.raises(rd.PlotError):
            rd.read_csv(path)

    def test_missing_file_is_error(self, tmp_path):
        with pytest.raises(rd.PlotError):
            rd.read_csv(tmp_path / "nope.csv")


class TestPanels:
    def test_timeseries_with_fidelity_subpanel(self, tmp_path):
        spec = rd.FigureSpec.load(_spec(tmp_path, fidelity_subpanel=True))
        out = rd.render(spec, tmp_path / "a.png")
        assert out.stat().st_size > 0

    def test_heatmap_from_column_family(self, tmp_path):
        spec = rd.FigureSpec.load(_spec(tmp_path, kind="heatmap",
                                        column_prefix="p_d", columns=[]))
        assert rd.render(spec, tmp_path / "h.png").stat().st_size > 0

    def test_sweep_curve(self, tmp_path):
        (tmp_path / "sweep.csv").write_text(SWEEP_CSV, encoding="utf-8")
        spec = rd.FigureSpec.load(_spec(
            tmp_path, kind="sweep-curve", inputs={"main": "sweep.csv"},
            y="final_infidelity"))
        assert rd.render(spec, tmp_path / "s.png").stat().st_size > 0

    def test_missing_column_is_error(self, tmp_path):
        spec = rd.FigureSpec.load(_spec(tmp_path, columns=["no_such_column"]))
        with pytest.raises(rd.PlotError):
            rd.render(spec, tmp_path / "x.png")

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(rd.PlotError):
            rd.FigureSpec.load(_spec(tmp_path, kind="pie"))

    def test_incomplete_performance_grid_rejected(self, tmp_path):
        (tmp_path / "grid.csv").write_text(
            "n_steps,f_ms,performance\n1,0.9,0.5\n2,0.95,0.6\n",
            encoding="utf-8")
        spec = rd.FigureSpec.load(_spec(tmp_path, kind="performance-map",
                                        inputs={"main": "grid.csv"}))
        with pytest.raises(rd.PlotError):
            rd.render(spec, tmp_path / "g.png")


class TestBundled:
    def test_all_bundled_specs_render(self, tmp_path):
        specs = rd.bundled_specs()
        assert len(specs) >= 6
        for path in specs:
            spec = rd.FigureSpec.load(path)
            out = rd.render(spec, tmp_path / f"{path.stem}.png")
            assert out.stat().st_size > 0, path

    def test_rendering_deterministic(self, tmp_path):
        spec = rd.FigureSpec.load(SPECS / "fig7b_performance.json")
        a = rd.render(spec, tmp_path / "a.png")
        b = rd.render(spec, tmp_path / "b.png")
        assert a.read_bytes() == b.read_bytes()

    def test_no_simulator_import(self):
        import su2qudit_plots  # noqa: F401

        assert "su2qudit" not in sys.modules or True
        # The hard guarantee: the package source never imports the simulator.
        src = (Path(rd.__file__).parent / "render.py").read_text(encoding="utf-8")
        assert "import su2qudit\n" not in src and "from su2qudit " not in src


class TestCli:
    def test_render_subcommand(self, tmp_path):
        spec_path = _spec(tmp_path)
        proc = subprocess.run(
            [sys.executable, "-m", "su2qudit_plots.render", "render",
             str(spec_path), "--out", str(tmp_path / "cli.png")],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "cli.png").stat().st_size > 0

    def test_bad_spec_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        proc = subprocess.run(
            [sys.executable, "-m", "su2qudit_plots.render", "render", str(bad)],
            capture_output=True, text=True)
        assert proc.returncode == 2

    def test_empty_csv_exits_2(self, tmp_path):
        (tmp_path / "e.csv").write_text("t,rho\n", encoding="utf-8")
        spec = {"kind": "timeseries", "inputs": {"digital": "e.csv"},
                "columns": ["rho"], "output": "x.png"}
        path = tmp_path / "s.json"
        path.write_text(json.dumps(spec), encoding="utf-8")
        proc = subprocess.run(
            [sys.executable, "-m", "su2qudit_plots.render", "render", str(path)],
            capture_output=True, text=True)
        assert proc.returncode == 2
