"""Figure rendering for twistvan residual-suite CSVs."""

from .render import FigureSpec, SchemaError, build_figure, load_rows, render

__all__ = ["FigureSpec", "SchemaError", "build_figure", "load_rows", "render"]
