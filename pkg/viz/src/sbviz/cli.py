"""Batch plotting entry point: `sbviz plot --recipe recipe.json`.

On success the fact sheet for the rendered figure is printed as JSON on
stdout.  Exit codes: 0 success, 1 unexpected failure, 2 recipe or input
problems (bad recipe, missing tables, missing columns, unplottable
rows).  Failures are reported as a single JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .figures import DataError, SchemaError, plot
from .recipe import RecipeError, load_recipe


def _emit_error(kind: str, message: str) -> None:
    print(json.dumps({"error": {"type": kind, "message": message}}),
          file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbviz",
                                     description="Render figures from "
                                                 "annealing-run CSV artifacts")
    sub = parser.add_subparsers(dest="command", required=True)
    cmd = sub.add_parser("plot", help="render one figure recipe")
    cmd.add_argument("--recipe", required=True,
                     help="path to a recipe JSON file")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        recipe = load_recipe(args.recipe)
        facts = plot(recipe)
    except (RecipeError, SchemaError, DataError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except Exception as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1
    print(json.dumps(facts))
    return 0


if __name__ == "__main__":
    sys.exit(main())
