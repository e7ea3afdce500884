"""Figure renderer for fisher-fragility CSV outputs."""

from .render import FigureSpec, render
from .schemas import FIGURE_SCHEMAS, SchemaError, read_table

__all__ = ["FigureSpec", "render", "FIGURE_SCHEMAS", "SchemaError",
           "read_table"]
__version__ = "0.1.0"
