"""Figure generation for annealing-run artifacts.

Reads the CSV/JSON tables written by the sbanneal CLI and renders the
standard figures: error probability against passage time (linear and
log-log with a fitted slope), relevant gap against the passage
parameter, level diagrams colored by eigenstate class, and fairness
diagnostics for matched passage pairs.
"""

from .figures import (
    DataError,
    LEVEL_COLORS,
    SchemaError,
    fit_loglog_slope,
    plot,
    read_table,
)
from .recipe import KINDS, FigureRecipe, RecipeError, from_json_dict, load_recipe

__all__ = [
    "DataError",
    "FigureRecipe",
    "KINDS",
    "LEVEL_COLORS",
    "RecipeError",
    "SchemaError",
    "fit_loglog_slope",
    "from_json_dict",
    "load_recipe",
    "plot",
    "read_table",
]
