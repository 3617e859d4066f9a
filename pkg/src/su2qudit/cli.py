"""Scenario runner: declarative INI configs in, CSV time series + JSON manifests out.

Subcommands:
  run <file> [--seed S] [--out DIR]   execute one scenario
  sweep <file> --axis SECTION.KEY --values v1,v2,...
  gates --n N --nst K --scheme S [--order O]
  verify                               run the independent matrix-derivation suite

Exit codes: 0 success, 2 config/parse error, 3 capacity exceeded, 4 numerical
failure.  CSV files are UTF-8 with '#'-prefixed metadata lines and floats at
17 significant digits; manifests are JSON with sorted keys.  All quantities
are in the natural (hopping-rate) units of the dimensionless model.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from importlib import metadata, resources
from pathlib import Path

import numpy as np
import scipy

from . import core_model as cm
from . import digital_engine as de
from . import exact_engine as ee
from . import noise as nz
from . import perturbation as pt
from .core_model import ModelParams
from .digital_engine import GateScheme, PhononConfig, TrotterPlan
from .exact_engine import CapacityError, KrylovError, ObservableSeries, QuditState

CSV_SCHEMA_VERSION = "1"
UNITS = "natural-units-eq7"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_NUMERICAL = 4


class ScenarioError(Exception):
    """Configuration could not be parsed or validated."""


# --- scenario parsing ------------------------------------------------------------


_SCHEMES = {s.value: s for s in GateScheme}


@dataclass
class Scenario:
    """Fully resolved run configuration."""

    name: str
    engine: str
    seed: int
    params: ModelParams | None
    initial: dict
    times: np.ndarray | None
    plan: TrotterPlan | None
    scheme: GateScheme | None
    cfg: PhononConfig | None
    ensemble: nz.NoiseEnsemble | None
    string_window: tuple[int, int] | None
    vacuum_subtract: bool
    perturbative: dict | None
    performance: dict | None
    csv_name: str
    manifest_name: str
    raw: dict


def _get(cp: configparser.ConfigParser, section: str, key: str, cast, default=None,
         required: bool = False):
    if not cp.has_option(section, key):
        if required:
            raise ScenarioError(f"missing required option [{section}] {key}")
        return default
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad value for [{section}] {key}: {raw!r}") from exc


def _float_list(raw: str) -> list[float]:
    return [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]


def _int_list(raw: str) -> list[int]:
    return [int(v) for v in raw.replace(";", ",").split(",") if v.strip()]


def load_scenario(path: str | Path, seed_override: int | None = None) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ScenarioError(f"cannot read scenario file {path}")
    if not cp.has_section("scenario"):
        raise ScenarioError("scenario file must have a [scenario] section")
    name = _get(cp, "scenario", "name", str, required=True)
    engine = _get(cp, "scenario", "engine", str, required=True)
    if engine not in ("exact", "digital", "noisy", "perturbative", "performance"):
        raise ScenarioError(f"unknown engine {engine!r}")
    seed = seed_override if seed_override is not None else _get(
        cp, "scenario", "seed", int, default=0)

    params = None
    if cp.has_section("model"):
        params = ModelParams(
            N=_get(cp, "model", "n", int, required=True),
            m=_get(cp, "model", "m", float, default=0.0),
            g2=_get(cp, "model", "g2", float, default=0.0),
            stagger_offset=_get(cp, "model", "stagger_offset", int, default=0),
        )
    elif engine != "perturbative":
        raise ScenarioError("non-perturbative scenarios need a [model] section")

    initial = {"kind": "vacuum"}
    if cp.has_section("initial"):
        kind = _get(cp, "initial", "kind", str, default="vacuum")
        if kind not in ("vacuum", "flips", "string"):
            raise ScenarioError(f"unknown initial-state kind {kind!r}")
        initial = {"kind": kind}
        if kind == "flips":
            raw = _get(cp, "initial", "flips", str, required=True)
            flips = []
            for item in raw.split(","):
                site, _, move = item.strip().partition(":")
                frm, _, to = move.partition(">")
                try:
                    flips.append((int(site), int(frm), int(to)))
                except ValueError as exc:
                    raise ScenarioError(f"bad flip spec {item!r}") from exc
            initial["flips"] = flips
        elif kind == "string":
            initial["start"] = _get(cp, "initial", "string_start", int, required=True)
            initial["length"] = _get(cp, "initial", "string_length", int, required=True)

    times = None
    if cp.has_section("evolution"):
        t_final = _get(cp, "evolution", "t_final", float, required=True)
        n_times = _get(cp, "evolution", "n_times", int, default=101)
        if t_final <= 0 or n_times < 2:
            raise ScenarioError("need t_final > 0 and n_times >= 2")
        times = np.linspace(0.0, t_final, n_times)

    plan = scheme = cfg = None
    if cp.has_section("digital"):
        plan = TrotterPlan(
            order=_get(cp, "digital", "order", int, default=1),
            dt=_get(cp, "digital", "dt", float, required=True),
            n_steps=_get(cp, "digital", "n_steps", int, required=True),
        )
        scheme_name = _get(cp, "digital", "scheme", str, default="IdealEffective")
        if scheme_name not in _SCHEMES:
            raise ScenarioError(f"unknown gate scheme {scheme_name!r}")
        scheme = _SCHEMES[scheme_name]
        cfg = PhononConfig(
            n_max=_get(cp, "digital", "n_max", int, default=8),
            ell=_get(cp, "digital", "ell", int, default=1),
            detuning_sign=_get(cp, "digital", "detuning_sign", int, default=-1),
            thermal_occupation=_get(cp, "digital", "thermal_occupation", float,
                                    default=0.0),
        )
    if engine == "digital" and plan is None:
        raise ScenarioError("digital scenarios need a [digital] section")
    if engine == "exact" and times is None:
        raise ScenarioError("exact scenarios need an [evolution] section")

    ensemble = None
    if cp.has_section("noise"):
        ensemble = nz.NoiseEnsemble(
            delta_b=_get(cp, "noise", "delta_b", float, required=True),
            w=_get(cp, "noise", "w", float, default=0.6),
            realizations=_get(cp, "noise", "realizations", int, default=100),
            seed=seed,
        )
    if engine == "noisy" and ensemble is None:
        raise ScenarioError("noisy scenarios need a [noise] section")
    if engine == "noisy" and plan is None and times is None:
        raise ScenarioError("noisy scenarios need [digital] or [evolution]")

    string_window = None
    vacuum_subtract = False
    if cp.has_section("observables"):
        raw = _get(cp, "observables", "string_window", str)
        if raw:
            start, length = (int(v) for v in raw.split(","))
            string_window = (start, length)
        vacuum_subtract = _get(cp, "observables", "vacuum_subtract",
                               cp.BOOLEAN_STATES.__getitem__, default=False)

    perturbative = None
    if cp.has_section("perturbative"):
        perturbative = {
            "g2_values": _float_list(_get(cp, "perturbative", "g2_values", str,
                                          required=True)),
            "m_values": _float_list(_get(cp, "perturbative", "m_values", str,
                                         required=True)),
        }
        if len(perturbative["g2_values"]) != len(perturbative["m_values"]):
            raise ScenarioError("g2_values and m_values must have equal length")
    if engine == "perturbative" and perturbative is None:
        raise ScenarioError("perturbative scenarios need a [perturbative] section")

    perf = None
    if cp.has_section("performance"):
        perf = {
            "t_final": _get(cp, "performance", "t_final", float, required=True),
            "n_steps_values": _int_list(_get(cp, "performance", "n_steps_values",
                                             str, required=True)),
            "f_ms_values": _float_list(_get(cp, "performance", "f_ms_values", str,
                                            required=True)),
            "order": _get(cp, "performance", "order", int, default=1),
        }
    if engine == "performance" and perf is None:
        raise ScenarioError("performance scenarios need a [performance] section")

    csv_name = _get(cp, "output", "csv", str, default=f"{name}.csv") \
        if cp.has_section("output") else f"{name}.csv"
    manifest_name = _get(cp, "output", "manifest", str, default=f"{name}.json") \
        if cp.has_section("output") else f"{name}.json"

    raw_cfg = {s: dict(cp.items(s)) for s in cp.sections()}
    raw_cfg.setdefault("scenario", {})["seed"] = str(seed)
    return Scenario(
        name=name, engine=engine, seed=seed, params=params, initial=initial,
        times=times, plan=plan, scheme=scheme, cfg=cfg, ensemble=ensemble,
        string_window=string_window, vacuum_subtract=vacuum_subtract,
        perturbative=perturbative, performance=perf,
        csv_name=csv_name, manifest_name=manifest_name, raw=raw_cfg,
    )


def initial_state(sc: Scenario) -> QuditState:
    params = sc.params
    kind = sc.initial["kind"]
    if kind == "vacuum":
        return ee.dirac_vacuum(params)
    if kind == "flips":
        state = ee.dirac_vacuum(params)
        for site, frm, to in sc.initial["flips"]:
            state = ee.apply_site_flip(state, site, frm, to)
        return state
    return ee.string_state(sc.initial["start"], sc.initial["length"], params)


# --- output writers ---------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def series_table(series: ObservableSeries, fidelity_std: np.ndarray | None = None
                 ) -> tuple[list[str], np.ndarray]:
    """Column names and data matrix for an observable time series."""
    n = series.n_sites
    cols = ["t", "rho", "rho_s", "rho_d", "rho_diff", "n_b"]
    data = [series.times, series.rho, series.rho_s, series.rho_d,
            series.rho_diff, series.n_b]
    if series.fidelity is not None:
        cols.append("fidelity")
        data.append(series.fidelity)
    if fidelity_std is not None:
        cols.append("fidelity_std")
        data.append(fidelity_std)
    for i in range(n):
        cols.append(f"p_s_{i + 1}")
        data.append(series.p_s[:, i])
    for i in range(n):
        cols.append(f"p_d_{i + 1}")
        data.append(series.p_d[:, i])
    if series.rho_s_str is not None:
        cols += ["rho_s_str", "rho_d_str", "rho_e_str"]
        data += [series.rho_s_str, series.rho_d_str, series.rho_e_str]
    return cols, np.column_stack(data)


def write_csv(path: Path, cols: list[str], rows: np.ndarray, meta: dict):
    lines = [f"# {k} = {v}" for k, v in sorted(meta.items())]
    lines.append(",".join(cols))
    for row in np.atleast_2d(rows):
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path: Path, payload: dict):
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _versions() -> dict:
    try:
        own = metadata.version("su2qudit")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"su2qudit": own, "numpy": np.__version__, "scipy": scipy.__version__}


# --- engines ---------------------------------------------------------------------


def _run_exact(sc: Scenario):
    init = initial_state(sc)
    h = cm.build_hamiltonian(sc.params)
    times = sc.times
    traj = [init.copy()] + ee.evolve(init, h, times[1:])
    series = ee.measure(traj, sc.params, times, sc.string_window)
    if sc.vacuum_subtract:
        vac = ee.dirac_vacuum(sc.params)
        vac_traj = [vac.copy()] + ee.evolve(vac, h, times[1:])
        series = ee.vacuum_subtract(
            series, ee.measure(vac_traj, sc.params, times, sc.string_window))
    return series, None, {}


def _run_digital(sc: Scenario):
    init = initial_state(sc)
    res = de.trotter_run(init, sc.params, sc.plan, sc.scheme, sc.cfg, seed=sc.seed)
    series = ee.measure(res.states, sc.params, res.times, sc.string_window)
    series.fidelity = res.fidelity
    extra = {
        "n_gates": de.gate_count(sc.params.N, sc.plan.n_steps, sc.scheme,
                                 sc.plan.order),
        "max_phonon_residual": res.max_phonon_residual,
    }
    return series, None, extra


def _run_noisy(sc: Scenario):
    init = initial_state(sc)
    result = nz.run_noisy_ensemble(
        init, sc.params, sc.ensemble, plan=sc.plan,
        scheme=sc.scheme if sc.scheme is not None else GateScheme.IDEAL_EFFECTIVE,
        cfg=sc.cfg, times=sc.times, string_window=sc.string_window)
    series = result.series
    series.fidelity = result.mean_fidelity
    extra = {"realizations": sc.ensemble.realizations,
             "delta_b": sc.ensemble.delta_b}
    if sc.plan is not None:
        extra["n_gates"] = de.gate_count(
            sc.params.N, sc.plan.n_steps,
            sc.scheme if sc.scheme is not None else GateScheme.IDEAL_EFFECTIVE,
            sc.plan.order)
    return series, result.std_fidelity, extra


def _run_perturbative(sc: Scenario) -> tuple[list[str], np.ndarray, dict]:
    rows = []
    for g2, m in zip(sc.perturbative["g2_values"], sc.perturbative["m_values"]):
        predicted = 2.0 * pt.jeff(g2, m)
        fitted = pt.effective_hopping_frequency(g2, m)
        rows.append([g2, m, pt.jeff(g2, m), predicted, fitted,
                     abs(fitted - predicted) / predicted])
    cols = ["g2", "m", "jeff", "predicted_rate", "fitted_rate", "rel_deviation"]
    return cols, np.array(rows), {}


def _run_performance(sc: Scenario) -> tuple[list[str], np.ndarray, dict]:
    perf = sc.performance
    init = ee.dirac_vacuum(sc.params)
    rows = []
    order = perf["order"]
    for n_steps in perf["n_steps_values"]:
        plan = TrotterPlan(order=order, dt=perf["t_final"] / n_steps, n_steps=n_steps)
        res = de.trotter_run(init, sc.params, plan, GateScheme.IDEAL_EFFECTIVE)
        fid = float(res.fidelity[-1])
        n_gates = de.gate_count(sc.params.N, n_steps, GateScheme.FULL_MS, order)
        for f_ms in perf["f_ms_values"]:
            rows.append([n_steps, f_ms, n_gates, fid,
                         nz.performance(fid, f_ms, n_gates)])
    cols = ["n_steps", "f_ms", "n_gates", "fidelity", "performance"]
    return cols, np.array(rows), {"order": order, "t_final": perf["t_final"]}


def execute(sc: Scenario, out_dir: Path) -> dict:
    """Run one scenario, write CSV + manifest, return the manifest payload."""
    start = time.perf_counter()
    meta = {
        "engine": sc.engine,
        "name": sc.name,
        "schema_version": CSV_SCHEMA_VERSION,
        "seed": sc.seed,
        "units": UNITS,
    }
    if sc.params is not None:
        meta.update(N=sc.params.N, m=_fmt(sc.params.m), g2=_fmt(sc.params.g2),
                    stagger_offset=sc.params.stagger_offset)
    std = None
    if sc.engine in ("exact", "digital", "noisy"):
        runner = {"exact": _run_exact, "digital": _run_digital,
                  "noisy": _run_noisy}[sc.engine]
        series, std, extra = runner(sc)
        cols, rows = series_table(series, std)
    elif sc.engine == "perturbative":
        cols, rows, extra = _run_perturbative(sc)
    else:
        cols, rows, extra = _run_performance(sc)
    csv_path = out_dir / sc.csv_name
    write_csv(csv_path, cols, rows, meta)
    manifest = {
        "columns": cols,
        "csv": sc.csv_name,
        "name": sc.name,
        "resolved_config": sc.raw,
        "results": {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                    for k, v in extra.items()},
        "schema_version": CSV_SCHEMA_VERSION,
        "seed": sc.seed,
        "units": UNITS,
        "versions": _versions(),
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    write_manifest(out_dir / sc.manifest_name, manifest)
    return manifest


# --- subcommands -------------------------------------------------------------------


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario, args.seed)
    execute(sc, Path(args.out))
    print(f"{sc.name}: wrote {sc.csv_name} and {sc.manifest_name} in {args.out}")
    return EXIT_OK


_SWEEP_CASTS = {
    ("model", "n"): int, ("model", "stagger_offset"): int,
    ("digital", "order"): int, ("digital", "n_steps"): int,
    ("digital", "n_max"): int, ("digital", "ell"): int,
    ("digital", "detuning_sign"): int, ("noise", "realizations"): int,
    ("evolution", "n_times"): int,
}


def _cmd_sweep(args) -> int:
    values = [v for v in args.values.split(",") if v.strip()]
    if not values:
        raise ScenarioError("sweep needs a non-empty value list")
    section, _, key = args.axis.partition(".")
    if not key:
        raise ScenarioError("axis must be SECTION.KEY")
    out_dir = Path(args.out)
    summary_rows = []
    for value in values:
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        if not cp.read(args.scenario):
            raise ScenarioError(f"cannot read scenario file {args.scenario}")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
        tag = value.replace(".", "p").replace("-", "m")
        base = cp.get("scenario", "name", fallback="sweep")
        cp.set("scenario", "name", f"{base}_{key}_{tag}")
        if cp.has_section("output"):
            cp.remove_section("output")
        with tempfile.NamedTemporaryFile(
                "w", suffix=".cfg", delete=False, encoding="utf-8") as tmp:
            cp.write(tmp)
            tmp_path = tmp.name
        try:
            sc = load_scenario(tmp_path, args.seed)
        finally:
            os.unlink(tmp_path)
        cast = _SWEEP_CASTS.get((section, key), float)
        execute(sc, out_dir)
        csv_path = out_dir / sc.csv_name
        cols, data = read_csv(csv_path)
        row = {"value": cast(value)}
        if "fidelity" in cols:
            row["final_fidelity"] = data[-1, cols.index("fidelity")]
            row["final_infidelity"] = 1.0 - row["final_fidelity"]
        if "rho" in cols:
            peak = int(np.argmax(data[:, cols.index("rho")]))
            row["peak_rho"] = data[peak, cols.index("rho")]
            row["peak_rho_time"] = data[peak, cols.index("t")]
        summary_rows.append(row)
    all_keys = ["value"] + sorted({k for r in summary_rows for k in r} - {"value"})
    table = np.array([[r.get(k, np.nan) for k in all_keys] for r in summary_rows])
    write_csv(out_dir / f"sweep_{section}_{key}.csv", all_keys, table,
              {"axis": args.axis, "scenario": str(args.scenario),
               "schema_version": CSV_SCHEMA_VERSION})
    print(f"sweep over {args.axis}: {len(values)} runs, aggregate "
          f"sweep_{section}_{key}.csv in {args.out}")
    return EXIT_OK


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read back a CSV written by this module (metadata lines skipped)."""
    cols = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if cols is None:
                cols = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    if cols is None:
        raise ScenarioError(f"no header row in {path}")
    return cols, np.array(rows)


def _cmd_gates(args) -> int:
    if args.scheme not in _SCHEMES:
        raise ScenarioError(f"unknown gate scheme {args.scheme!r}")
    count = de.gate_count(args.n, args.nst, _SCHEMES[args.scheme], args.order)
    print(count)
    return EXIT_OK


def _cmd_verify(_args) -> int:
    from . import rishon

    checks = [
        ("site matrices", rishon.verify_site_matrices),
        ("Gauss law", rishon.verify_gauss_law),
        ("parallel transporter", rishon.verify_parallel_transporter),
        ("link Casimir", rishon.verify_link_casimir),
    ]
    ok = True
    for label, check in checks:
        report = check()
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {label} (max error {report.max_error:.3e})")
        for failure in report.failures:
            print(f"  {failure}")
        ok = ok and report.passed
    return EXIT_OK if ok else EXIT_NUMERICAL


def scenario_resource(name: str) -> Path:
    """Path of a bundled scenario file (e.g. 'fig4a')."""
    res = resources.files("su2qudit") / "scenarios" / f"{name}.cfg"
    if not res.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return Path(str(res))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="su2qudit",
        description="Simulate the six-level dressed-site lattice model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario file")
    p_run.add_argument("scenario")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=".")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="scan one scalar scenario field")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--axis", required=True, help="SECTION.KEY to vary")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=".")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_gates = sub.add_parser("gates", help="print the entangling-gate count")
    p_gates.add_argument("--n", type=int, required=True)
    p_gates.add_argument("--nst", type=int, required=True)
    p_gates.add_argument("--scheme", required=True)
    p_gates.add_argument("--order", type=int, default=1)
    p_gates.set_defaults(func=_cmd_gates)

    p_verify = sub.add_parser("verify", help="independent matrix-derivation checks")
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, configparser.Error, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (KrylovError, pt.FitError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
