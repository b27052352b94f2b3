"""Figure rendering for experiment summary CSVs."""

from .render import FigureSpec, PlotError, build_series, read_summary, render, spec_from_json

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "PlotError",
    "build_series",
    "read_summary",
    "render",
    "spec_from_json",
    "__version__",
]
