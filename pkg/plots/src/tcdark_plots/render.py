"""Render paper-style figures from tcdark CSV outputs.

Reads the engine's trajectory and spectrum CSVs (header row of documented
column names, scientific-notation floats) and draws the selected columns
against time.  Presets never transform the data: every plotted line is one
CSV column verbatim, so plotted extrema equal column extrema.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "tcdark"  # deterministic SVG ids

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotSpec", "CsvTable", "load_csv", "render", "PRESETS", "preset_spec"]


class PlotError(Exception):
    pass


@dataclass
class CsvTable:
    path: Path
    header: list[str]
    data: np.ndarray  # (nrows, ncols)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.header.index(name)]
        except ValueError:
            raise PlotError(
                f"column {name!r} not in {self.path}; available: "
                + ", ".join(self.header)
            ) from None


@dataclass
class PlotSpec:
    csv: Path
    columns: list[str]
    out: Path
    x: str = "t"
    xlabel: str = "t (schedule units)"
    ylabel: str = "probability"
    title: str = ""
    logy: bool = False


def load_csv(path) -> CsvTable:
    path = Path(path)
    if not path.exists():
        raise PlotError(f"no such CSV: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    lines = [ln for ln in lines if ln.strip()]
    if len(lines) < 2:
        raise PlotError(f"empty CSV (no data rows): {path}")
    header = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    if data.shape[1] != len(header):
        raise PlotError(f"ragged CSV: {path}")
    return CsvTable(path=path, header=header, data=data)


def render(spec: PlotSpec) -> Path:
    """Draw one figure; the output format follows the file extension
    (.svg or .png).  Read-only over the CSV and idempotent."""
    table = load_csv(spec.csv)
    xs = table.column(spec.x)
    fig, ax = plt.subplots(figsize=(8, 5))
    for name in spec.columns:
        ax.plot(xs, table.column(name), label=name, linewidth=1.0)
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    suffix = out.suffix.lower()
    if suffix not in (".svg", ".png"):
        plt.close(fig)
        raise PlotError(f"unsupported image format {suffix!r} (use .svg or .png)")
    # strip volatile metadata so re-rendering is byte-stable
    metadata = {"Date": None} if suffix == ".svg" else None
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return out


def _probability_columns(table: CsvTable) -> list[str]:
    cols = [c for c in table.header if c == "P_free" or c.startswith("P_ph[")]
    if "P_split" in table.header:
        cols.append("P_split")
    return cols


def _levels(table: CsvTable) -> list[str]:
    return [c for c in table.header if c.startswith("level[")]


PRESETS = {
    # experiment presets: probability curves, log scale (values span
    # 1e-14..1e-2 across experiments)
    "E1": dict(kind="prob", title="one cavity, two atoms: emission"),
    "E2": dict(kind="prob", title="one cavity, four atoms: emission"),
    "E2f": dict(kind="prob", title="fast schedule: emission"),
    "E2c": dict(kind="prob", title="cosine schedule: emission"),
    "E4": dict(kind="prob", title="two cavities, two atoms: emission"),
    "E5": dict(kind="prob", title="tunneling ramp: emission"),
    "E6": dict(kind="prob", title="two cavities, four atoms: emission"),
    "schedule": dict(kind="schedule", title="deformation multiplier G(t)"),
    "spectrum": dict(kind="spectrum", title="spectral flow"),
}


def preset_spec(name: str, csv, out) -> PlotSpec:
    if name not in PRESETS:
        raise PlotError(
            f"unknown preset {name!r}; available: " + ", ".join(PRESETS)
        )
    table = load_csv(csv)
    info = PRESETS[name]
    if info["kind"] == "prob":
        columns = _probability_columns(table)
        if not columns:
            raise PlotError(
                f"no probability columns in {csv}; available: "
                + ", ".join(table.header)
            )
        return PlotSpec(csv=Path(csv), columns=columns, out=Path(out),
                        title=info["title"], logy=True)
    if info["kind"] == "schedule":
        table.column("G")  # fail early with the column listing
        return PlotSpec(csv=Path(csv), columns=["G"], out=Path(out),
                        ylabel="G(t)", title=info["title"])
    columns = _levels(table)
    if not columns:
        raise PlotError(
            f"no level[j] columns in {csv}; available: " + ", ".join(table.header)
        )
    return PlotSpec(csv=Path(csv), columns=columns, out=Path(out),
                    ylabel="eigenvalue (rad/unit)", title=info["title"])
