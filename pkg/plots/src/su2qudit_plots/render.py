"""Render figure panels from simulator CSV files.

Panel kinds:
  timeseries       columns vs t; "exact" input drawn as lines, "digital" as
                   markers; an optional fidelity subpanel below the main axes
  heatmap          a per-site column family (e.g. p_d_1..N) over (site, t)
  sweep-curve      one aggregate-CSV metric against the swept value
  performance-map  a (x, y) -> z grid, e.g. performance over (n_steps, f_ms)

Figure specs are JSON files; relative CSV paths resolve against the spec's
directory.  Rendering is deterministic: fixed style, no timestamps in image
metadata.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("timeseries", "heatmap", "sweep-curve", "performance-map")

EXIT_OK = 0
EXIT_ERROR = 2

_STYLE = {
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.bbox": "tight",
}


class PlotError(Exception):
    """Spec or data problem that prevents rendering."""


def read_csv(path: Path) -> tuple[list[str], np.ndarray, dict]:
    """Read a simulator CSV: '#'-metadata lines, header row, float rows."""
    if not path.is_file():
        raise PlotError(f"input CSV not found: {path}")
    meta: dict = {}
    cols: list[str] | None = None
    rows: list[list[float]] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line.lstrip("# ").partition("=")
            meta[key.strip()] = value.strip()
            continue
        if cols is None:
            cols = line.split(",")
        else:
            rows.append([float(v) for v in line.split(",")])
    if cols is None:
        raise PlotError(f"no header row in {path}")
    if not rows:
        raise PlotError(f"empty series in {path}")
    return cols, np.array(rows), meta


@dataclass
class FigureSpec:
    """One figure panel: kind, input CSVs, labels, and an output image path."""

    kind: str
    inputs: dict[str, Path]
    output: Path
    columns: list[str] = field(default_factory=list)
    column_prefix: str = ""
    x: str = ""
    y: str = ""
    z: str = ""
    labels: dict = field(default_factory=dict)
    fidelity_subpanel: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown panel kind {self.kind!r}")
        if not self.inputs:
            raise PlotError("figure spec needs at least one input CSV")

    @classmethod
    def load(cls, path: str | Path) -> "FigureSpec":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise PlotError(f"cannot read figure spec {path}: {exc}") from exc
        try:
            inputs = {tag: (path.parent / p) for tag, p in raw["inputs"].items()}
            out = raw["output"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise PlotError(f"figure spec {path} missing required field: {exc}") from exc
        return cls(
            kind=raw.get("kind", ""),
            inputs=inputs,
            output=path.parent / out,
            columns=list(raw.get("columns", [])),
            column_prefix=raw.get("column_prefix", ""),
            x=raw.get("x", ""),
            y=raw.get("y", ""),
            z=raw.get("z", ""),
            labels=dict(raw.get("labels", {})),
            fidelity_subpanel=bool(raw.get("fidelity_subpanel", False)),
        )


def _require(cols: list[str], wanted: list[str], path: Path):
    missing = [c for c in wanted if c not in cols]
    if missing:
        raise PlotError(f"columns {missing} not in {path} (has {cols[:8]}...)")


def _site_columns(cols: list[str], prefix: str, path: Path) -> list[str]:
    pattern = re.compile(rf"^{re.escape(prefix)}_(\d+)$")
    found = sorted((int(m.group(1)), c) for c in cols if (m := pattern.match(c)))
    if not found:
        raise PlotError(f"no '{prefix}_<n>' column family in {path}")
    return [c for _, c in found]


def _render_timeseries(spec: FigureSpec, fig):
    if not spec.columns:
        raise PlotError("timeseries panels need a 'columns' list")
    n_rows = 2 if spec.fidelity_subpanel else 1
    axes = fig.subplots(n_rows, 1, sharex=True,
                        gridspec_kw={"height_ratios": [3, 1]} if n_rows == 2 else {})
    ax = axes[0] if n_rows == 2 else axes
    for tag, path in sorted(spec.inputs.items()):
        cols, data, _ = read_csv(path)
        _require(cols, ["t"] + spec.columns, path)
        t = data[:, cols.index("t")]
        # Convention: exact trajectories as continuous lines, digital
        # (Trotterized) trajectories as discrete markers.
        style = {"linestyle": "-", "marker": ""} if tag == "exact" else \
            {"linestyle": "", "marker": "o", "markersize": 3}
        for col in spec.columns:
            ax.plot(t, data[:, cols.index(col)], label=f"{col} ({tag})", **style)
        if spec.fidelity_subpanel and "fidelity" in cols and tag != "exact":
            axes[1].plot(t, data[:, cols.index("fidelity")], marker=".",
                         linestyle="-", color="black")
            axes[1].set_ylabel("fidelity")
    ax.legend(loc="best", fontsize=7)
    ax.set_ylabel(spec.labels.get("y", "density"))
    (axes[1] if n_rows == 2 else ax).set_xlabel(spec.labels.get("x", "t"))


def _render_heatmap(spec: FigureSpec, fig):
    path = next(iter(spec.inputs.values()))
    cols, data, _ = read_csv(path)
    prefix = spec.column_prefix or "p_d"
    family = _site_columns(cols, prefix, path)
    _require(cols, ["t"], path)
    t = data[:, cols.index("t")]
    grid = np.column_stack([data[:, cols.index(c)] for c in family])
    ax = fig.subplots()
    img = ax.imshow(grid.T, aspect="auto", origin="lower", cmap="viridis",
                    extent=(t[0], t[-1], 0.5, len(family) + 0.5))
    fig.colorbar(img, ax=ax, label=spec.labels.get("z", prefix))
    ax.set_xlabel(spec.labels.get("x", "t"))
    ax.set_ylabel(spec.labels.get("y", "site n"))


def _render_sweep_curve(spec: FigureSpec, fig):
    path = next(iter(spec.inputs.values()))
    cols, data, _ = read_csv(path)
    x = spec.x or "value"
    y = spec.y
    if not y:
        raise PlotError("sweep-curve panels need a 'y' column")
    _require(cols, [x, y], path)
    ax = fig.subplots()
    order = np.argsort(data[:, cols.index(x)])
    ax.plot(data[order, cols.index(x)], data[order, cols.index(y)],
            marker="o", linestyle="-")
    ax.set_xlabel(spec.labels.get("x", x))
    ax.set_ylabel(spec.labels.get("y", y))


def _render_performance_map(spec: FigureSpec, fig):
    path = next(iter(spec.inputs.values()))
    cols, data, _ = read_csv(path)
    x, y, z = spec.x or "n_steps", spec.y or "f_ms", spec.z or "performance"
    _require(cols, [x, y, z], path)
    xs = np.unique(data[:, cols.index(x)])
    ys = np.unique(data[:, cols.index(y)])
    grid = np.full((len(ys), len(xs)), np.nan)
    for row in data:
        i = int(np.searchsorted(ys, row[cols.index(y)]))
        j = int(np.searchsorted(xs, row[cols.index(x)]))
        grid[i, j] = row[cols.index(z)]
    if np.isnan(grid).any():
        raise PlotError(f"({x}, {y}) grid in {path} is not complete")
    ax = fig.subplots()
    img = ax.imshow(grid, aspect="auto", origin="lower", cmap="magma",
                    extent=(xs[0] - 0.5, xs[-1] + 0.5, ys[0], ys[-1]))
    fig.colorbar(img, ax=ax, label=spec.labels.get("z", z))
    ax.set_xlabel(spec.labels.get("x", x))
    ax.set_ylabel(spec.labels.get("y", y))


_RENDERERS = {
    "timeseries": _render_timeseries,
    "heatmap": _render_heatmap,
    "sweep-curve": _render_sweep_curve,
    "performance-map": _render_performance_map,
}


def render(spec: FigureSpec, output: Path | None = None) -> Path:
    """Render one panel to its output image; returns the written path."""
    out = Path(output) if output is not None else spec.output
    with plt.rc_context(_STYLE):
        fig = plt.figure(figsize=(5.0, 3.4))
        try:
            _RENDERERS[spec.kind](spec, fig)
            if "title" in spec.labels:
                fig.suptitle(spec.labels["title"], fontsize=10)
            out.parent.mkdir(parents=True, exist_ok=True)
            # Strip timestamps/tool tags so identical inputs give identical bytes.
            fig.savefig(out, metadata=_no_timestamp_metadata(out))
        finally:
            plt.close(fig)
    return out


def _no_timestamp_metadata(out: Path) -> dict:
    suffix = out.suffix.lower()
    if suffix == ".png":
        return {"Software": "su2qudit-plots"}
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".pdf":
        return {"CreationDate": None}
    return {}


def bundled_specs() -> list[Path]:
    """All figure specs shipped with the package."""
    here = Path(__file__).parent / "specs"
    return sorted(here.glob("*.json"))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="su2qudit-plots",
        description="Render figure panels from simulator CSV outputs.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure spec")
    p_render.add_argument("spec", help="figure spec JSON file")
    p_render.add_argument("--out", default=None, help="override output image path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.load(args.spec)
        out = render(spec, Path(args.out) if args.out else None)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
