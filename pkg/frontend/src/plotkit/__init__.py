"""Render empirical phase diagrams from lfht-lab sweep CSVs."""

__version__ = "0.2.0"

from .csvio import SCHEMA, SweepTable, load_sweep
from .render import PlotSpec, render_phase_diagram

__all__ = [
    "PlotSpec",
    "SCHEMA",
    "SweepTable",
    "load_sweep",
    "render_phase_diagram",
    "__version__",
]
