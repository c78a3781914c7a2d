"""Phase-diagram rendering: error heatmap on log-log axes with the empirical
boundary overlaid, plus optional theoretical guide curves.

Rendering is deterministic: a fixed SVG hash salt, no timestamps, fixed dpi.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .csvio import SchemaError, SweepTable, boundary_from_table, load_sweep

matplotlib.rcParams["svg.hashsalt"] = "lfht-plotkit"
matplotlib.rcParams["svg.fonttype"] = "none"  # keep annotations greppable


@dataclass(frozen=True)
class PlotSpec:
    csv_paths: tuple
    out_path: str
    target: float = 0.25
    guides: tuple = ()  # (c1, c2, c3) for m-floor, n-floor, nm-curve
    fmt: str = "svg"
    dpi: int = 150

    def __post_init__(self):
        object.__setattr__(self, "csv_paths", tuple(str(p) for p in self.csv_paths))
        object.__setattr__(self, "guides", tuple(float(c) for c in self.guides))
        if not self.csv_paths:
            raise SchemaError("need at least one CSV input")
        if self.fmt not in ("svg", "png"):
            raise SchemaError("format must be svg or png")


def _gof_scale(table: SweepTable) -> float | None:
    if table.class_tag in ("db", "d") and table.k:
        return float(np.sqrt(table.k) / table.eps**2)
    return None


def _edges(values: np.ndarray) -> np.ndarray:
    vals = np.unique(values).astype(float)
    if vals.size == 1:
        return np.array([vals[0] / 1.5, vals[0] * 1.5])
    inner = np.sqrt(vals[:-1] * vals[1:])
    first = vals[0] ** 2 / inner[0]
    last = vals[-1] ** 2 / inner[-1]
    return np.concatenate(([first], inner, [last]))


def _panel(ax, table: SweepTable, spec: PlotSpec) -> None:
    ns = np.unique(table.n)
    ms = np.unique(table.m)
    grid = np.full((ms.size, ns.size), np.nan)
    for n, m, err in zip(table.n, table.m, table.err_total):
        grid[np.searchsorted(ms, m), np.searchsorted(ns, n)] = err
    mesh = ax.pcolormesh(
        _edges(ns), _edges(ms), grid, cmap="Greys", vmin=0.0, vmax=1.0,
        shading="flat",
    )
    plt.colorbar(mesh, ax=ax, label="total error")

    bn, bm = boundary_from_table(table, spec.target)
    if bn.size:
        ax.step(bn, bm, where="post", color="tab:red", lw=2,
                label=f"boundary at {spec.target:g}")
    if bn.size >= 2:
        slope = np.polyfit(np.log(bn), np.log(bm), 1)[0]
        ax.annotate(
            f"boundary slope {slope:.2f}",
            xy=(0.05, 0.05), xycoords="axes fraction", fontsize=9,
        )

    if spec.guides:
        c1 = spec.guides[0]
        ax.axhline(c1 / table.eps**2, color="tab:blue", ls=":",
                   label="m floor")
        gof = _gof_scale(table)
        if gof is not None and len(spec.guides) > 1:
            ax.axvline(spec.guides[1] * gof, color="tab:green", ls=":",
                       label="n floor")
        if gof is not None and len(spec.guides) > 2:
            xs = np.geomspace(ns.min(), ns.max(), 64)
            ax.plot(xs, spec.guides[2] * gof**2 / xs, color="tab:orange",
                    ls=":", label="nm product")

    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n (simulated per source)")
    ax.set_ylabel("m (observed)")
    ax.set_title(f"{table.class_tag} k={table.k} eps={table.eps:g} [{table.test}]")
    ax.legend(loc="upper right", fontsize=8)


def render_phase_diagram(spec: PlotSpec) -> Path:
    """Render one panel per CSV (side by side) and write the image."""
    tables = [load_sweep(p) for p in spec.csv_paths]
    for table in tables:
        if table.points < 4:
            raise SchemaError("need at least 4 grid points to draw a diagram")
    fig, axes = plt.subplots(
        1, len(tables), figsize=(6.4 * len(tables), 4.8), squeeze=False
    )
    for ax, table in zip(axes[0], tables):
        _panel(ax, table, spec)
    fig.tight_layout()
    out = Path(spec.out_path)
    fig.savefig(out, format=spec.fmt, dpi=spec.dpi, metadata=_metadata(spec.fmt))
    plt.close(fig)
    return out


def _metadata(fmt: str) -> dict:
    if fmt == "svg":
        return {"Date": None}
    return {}
