"""Figure builders, one per experiment type.

Each builder consumes the loaded artifact tables and returns the matplotlib
figure plus the annotation strings it drew, so tests can pin the annotations
against the JSON fields they quote.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_VERSION = 1


class ArtifactError(ValueError):
    """Missing, malformed, or schema-incompatible artifacts."""


class UnsupportedRunError(ArtifactError):
    """Valid run directory, but no figure is defined for its experiment."""


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise ArtifactError(f"{path.name}: no data rows")
    cols = {}
    for i, name in enumerate(header):
        raw = [r[i] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw, dtype=object)   # non-numeric table column
    return cols


def _require(cols: dict, names: list[str], source: str) -> None:
    missing = [n for n in names if n not in cols or cols[n].dtype == object]
    if missing:
        raise ArtifactError(f"{source}: missing numeric column(s) {', '.join(missing)}")


def load_run(run_dir: str | Path) -> dict:
    """Load a run directory: manifest, summary JSON, and all CSV tables."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "run_manifest.json"
    if not manifest_path.exists():
        raise ArtifactError(f"{run_dir}: no run_manifest.json")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("schema") != SCHEMA_VERSION:
        raise ArtifactError(f"{run_dir}: unsupported schema {manifest.get('schema')!r}")
    run = {"experiment": manifest.get("experiment"), "manifest": manifest, "tables": {}, "summary": None}
    for art in manifest.get("artifacts", []):
        path = run_dir / art["file"]
        if not path.exists():
            raise ArtifactError(f"{run_dir}: manifest references missing file {art['file']}")
        if art["kind"] == "csv":
            run["tables"][art["table"]] = _read_csv(path)
        elif art["kind"] == "json":
            run["summary"] = json.loads(path.read_text())
    return run


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    ax.set_title(title)
    ax.grid(alpha=0.3)
    return fig, ax


def figure_relax(run: dict):
    tables = run["tables"]
    if "trajectory" not in tables:
        raise ArtifactError("relax run: missing trajectory table")
    cols = tables["trajectory"]
    _require(cols, ["t"], "trajectory")
    shells = sorted(int(n.split("norm_k")[1]) for n in cols if n.startswith("norm_k"))
    if not shells:
        raise ArtifactError("trajectory: missing column(s) norm_k*")
    gamma = float(run["summary"]["gamma"]) if run["summary"] else None
    fig, ax = _new_axes("Shell-norm decay under the full dynamics")
    t = cols["t"]
    for k in shells[1:6]:
        series = cols[f"norm_k{k}"]
        line, = ax.semilogy(t, np.maximum(series, 1e-300), label=f"shell {k}")
        if gamma and series[0] > 0:
            ax.semilogy(t, series[0] * np.exp(-k * gamma * t), ls="--", lw=0.8,
                        color=line.get_color(), alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("shell norm")
    ax.legend(fontsize=8, title="dashed: exp(-k gamma t)", title_fontsize=8)
    note = f"gamma = {gamma:g}" if gamma else ""
    if note:
        ax.text(0.02, 0.04, note, transform=ax.transAxes, fontsize=8)
    return fig, {"note": note}


def figure_slowcompare(run: dict):
    summary = run["summary"]
    if not summary:
        raise ArtifactError("slowcompare run: missing summary JSON")
    for key in ("gammas", "max_err_h1", "max_err_h0", "fitted_order_h1", "fitted_order_h0"):
        if key not in summary:
            raise ArtifactError(f"slowcompare summary: missing field {key}")
    gammas = np.array(summary["gammas"], dtype=float)
    e1 = np.array(summary["max_err_h1"], dtype=float)
    e0 = np.array(summary["max_err_h0"], dtype=float)
    ann1 = f"fitted order {summary['fitted_order_h1']}"
    ann0 = f"fitted order {summary['fitted_order_h0']}"
    fig, ax = _new_axes("Slow-readoff error vs resistance rate")
    ax.loglog(gammas, e1, "o-", label=f"vs refined equation ({ann1})")
    ax.loglog(gammas, e0, "s-", label=f"vs limit equation ({ann0})")
    ax.set_xlabel("gamma")
    ax.set_ylabel("max error over t")
    ax.legend(fontsize=8)
    return fig, {"order_h1": ann1, "order_h0": ann0}


def figure_decohere(run: dict):
    tables = run["tables"]
    if "trace" not in tables:
        raise ArtifactError("decohere run: missing trace table")
    cols = tables["trace"]
    _require(cols, ["t", "ratio"], "trace")
    summary = run["summary"] or {}
    fig, ax = _new_axes("Amplitude selection under the refined equation")
    ax.semilogy(cols["t"], cols["ratio"], label="winner / runner-up amplitude")
    ann = ""
    if summary.get("fitted_exponent") is not None:
        ann = f"fitted exponent {summary['fitted_exponent']}"
        pred = summary.get("predicted_exponent")
        label = ann if pred is None else f"{ann}\npredicted {pred}"
        ax.text(0.03, 0.92, label, transform=ax.transAxes, fontsize=8, va="top")
    ax.set_xlabel("t")
    ax.set_ylabel("amplitude ratio")
    ax.legend(fontsize=8)
    return fig, {"exponent": ann}


def figure_linewidth(run: dict):
    tables = run["tables"]
    if "sweep" not in tables:
        raise ArtifactError("linewidth run: missing sweep table")
    cols = tables["sweep"]
    _require(cols, ["thermal_energy", "de_phys"], "sweep")
    fig, ax = _new_axes("Energy line width over the thermal sweep")
    ax.plot(cols["thermal_energy"], cols["de_phys"], "o-")
    ax.set_xlabel("thermal energy")
    ax.set_ylabel("energy spread")
    return fig, {}


FIGURES = {
    "relax": figure_relax,
    "slowcompare": figure_slowcompare,
    "decohere": figure_decohere,
    "linewidth": figure_linewidth,
}


def build_figure(run: dict):
    experiment = run.get("experiment")
    if experiment not in FIGURES:
        raise UnsupportedRunError(f"no figure builder for experiment {experiment!r}")
    return FIGURES[experiment](run)
