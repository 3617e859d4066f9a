"""CLI contract tests: scenario parsing, CSV/manifest round-trips,
determinism, exit codes, and the bundled scenario catalog."""

import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from su2qudit import cli

TINY_EXACT = """
[scenario]
name = tiny
engine = exact
seed = 0

[model]
n = 2
m = 1.0
g2 = 1.0

[initial]
kind = vacuum

[evolution]
t_final = 0.5
n_times = 6
"""

TINY_DIGITAL = """
[scenario]
name = tinydig
engine = digital

[model]
n = 2
m = 1.0
g2 = 1.0

[digital]
order = 1
dt = 0.05
n_steps = 4
scheme = IdealEffective
"""


def _write(tmp_path, text, name="scn.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "su2qudit.cli", *args],
                          capture_output=True, text=True)


class TestScenarioParsing:
    def test_missing_section_is_config_error(self, tmp_path):
        path = _write(tmp_path, "[scenario]\nname = x\nengine = exact\n")
        with pytest.raises(cli.ScenarioError):
            cli.load_scenario(path)

    def test_unknown_engine_rejected(self, tmp_path):
        path = _write(tmp_path, TINY_EXACT.replace("engine = exact",
                                                   "engine = magic"))
        with pytest.raises(cli.ScenarioError):
            cli.load_scenario(path)

    def test_flip_spec_parsing(self, tmp_path):
        text = TINY_EXACT.replace("kind = vacuum", "kind = flips\nflips = 2:1>5")
        sc = cli.load_scenario(_write(tmp_path, text))
        assert sc.initial == {"kind": "flips", "flips": [(2, 1, 5)]}

    def test_seed_override(self, tmp_path):
        sc = cli.load_scenario(_write(tmp_path, TINY_EXACT), seed_override=99)
        assert sc.seed == 99

    def test_all_bundled_scenarios_parse(self):
        for name in ("fig2a", "fig2b", "fig4a", "fig4b", "fig5a", "fig5b",
                     "fig5c", "fig7a", "fig7b", "fig8b"):
            sc = cli.load_scenario(cli.scenario_resource(name))
            assert sc.name == name


class TestOutputs:
    def test_exact_run_csv_and_manifest(self, tmp_path):
        sc = cli.load_scenario(_write(tmp_path, TINY_EXACT))
        manifest = cli.execute(sc, tmp_path)
        cols, data = cli.read_csv(tmp_path / "tiny.csv")
        assert cols[:6] == ["t", "rho", "rho_s", "rho_d", "rho_diff", "n_b"]
        assert data.shape[0] == 6
        assert data[0, 0] == 0.0 and data[-1, 0] == 0.5
        assert manifest["units"] == "natural-units-eq7"
        on_disk = json.loads((tmp_path / "tiny.json").read_text())
        assert list(on_disk) == sorted(on_disk)

    def test_reruns_byte_identical(self, tmp_path):
        sc = cli.load_scenario(_write(tmp_path, TINY_DIGITAL))
        cli.execute(sc, tmp_path / "a")
        cli.execute(sc, tmp_path / "b")
        assert (tmp_path / "a" / "tinydig.csv").read_bytes() == \
            (tmp_path / "b" / "tinydig.csv").read_bytes()

    def test_metadata_lines_prefixed(self, tmp_path):
        sc = cli.load_scenario(_write(tmp_path, TINY_EXACT))
        cli.execute(sc, tmp_path)
        lines = (tmp_path / "tiny.csv").read_text(encoding="utf-8").splitlines()
        meta = [ln for ln in lines if ln.startswith("#")]
        assert any("units = natural-units-eq7" in ln for ln in meta)
        assert lines[len(meta)].startswith("t,")

    def test_digital_run_reports_gate_count(self, tmp_path):
        sc = cli.load_scenario(_write(tmp_path, TINY_DIGITAL))
        manifest = cli.execute(sc, tmp_path)
        assert manifest["results"]["n_gates"] == 8

    @given(st.floats(allow_nan=False, allow_infinity=False))
    @settings(max_examples=100, deadline=None)
    def test_float_formatting_roundtrips(self, x):
        assert float(cli._fmt(x)) == x


class TestExitCodes:
    def test_parse_error_is_2(self, tmp_path):
        path = _write(tmp_path, "[scenario]\nname = broken\n")
        assert run_cli("run", str(path)).returncode == 2

    def test_missing_file_is_2(self):
        assert run_cli("run", "/nonexistent/file.cfg").returncode == 2

    def test_capacity_error_is_3(self, tmp_path):
        path = _write(tmp_path, TINY_EXACT.replace("n = 2", "n = 9"))
        proc = run_cli("run", str(path))
        assert proc.returncode == 3

    def test_success_is_0(self, tmp_path):
        path = _write(tmp_path, TINY_EXACT)
        proc = run_cli("run", str(path), "--out", str(tmp_path))
        assert proc.returncode == 0, proc.stderr


class TestSubcommands:
    def test_gates_prints_count(self):
        proc = run_cli("gates", "--n", "3", "--nst", "12", "--scheme", "FullMS")
        assert proc.returncode == 0
        assert proc.stdout.strip() == "48"

    def test_gates_order_two(self):
        proc = run_cli("gates", "--n", "3", "--nst", "3", "--scheme", "FullMS",
                       "--order", "2")
        assert proc.stdout.strip() == "18"

    def test_verify_passes(self):
        proc = run_cli("verify")
        assert proc.returncode == 0
        assert proc.stdout.count("PASS") == 4

    def test_sweep_writes_aggregate(self, tmp_path):
        path = _write(tmp_path, TINY_DIGITAL)
        proc = run_cli("sweep", str(path), "--axis", "digital.n_steps",
                       "--values", "2,4", "--out", str(tmp_path))
        assert proc.returncode == 0, proc.stderr
        cols, data = cli.read_csv(tmp_path / "sweep_digital_n_steps.csv")
        assert "value" in cols and data.shape[0] == 2
        assert "final_fidelity" in cols
        idx = cols.index("final_fidelity")
        # More steps at fixed dt means a later final time, not a comparison
        # point; just require sane fidelities.
        assert np.all(data[:, idx] <= 1.0 + 1e-12)


class TestNoisyEngine:
    def test_noisy_scenario_outputs_std_column(self, tmp_path):
        text = TINY_DIGITAL.replace("name = tinydig", "name = tinynoise") \
            .replace("engine = digital", "engine = noisy")
        text += "\n[noise]\ndelta_b = 0.05\nrealizations = 5\n"
        sc = cli.load_scenario(_write(tmp_path, text))
        cli.execute(sc, tmp_path)
        cols, data = cli.read_csv(tmp_path / "tinynoise.csv")
        assert "fidelity_std" in cols
        assert data[0, cols.index("fidelity")] == pytest.approx(1.0)
