"""Figure rendering for bandit benchmark CSV outputs."""

__version__ = "0.1.0"

from .figures import (AXIS_LABELS, DPI, KINDS, SCHEMAS, DataError, FigureSpec,
                      aggregate, build_figure, load_table, render)

__all__ = ["AXIS_LABELS", "DPI", "DataError", "FigureSpec", "KINDS", "SCHEMAS",
           "aggregate", "build_figure", "load_table", "render"]
