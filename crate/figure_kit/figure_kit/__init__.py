"""Figures from rkpairs CSV output."""

from .schema import SCHEMAS, SchemaError, read_csv
from .render import FigureSpec, render, theory_speedup

__all__ = ["SCHEMAS", "SchemaError", "read_csv", "FigureSpec", "render", "theory_speedup"]
