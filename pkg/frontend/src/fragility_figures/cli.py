"""Command-line entry point: render one figure from CSV inputs."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render
from .schemas import FIGURE_SCHEMAS, SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fragility-figures",
        description="Render figures from fisher-fragility CSV outputs",
    )
    parser.add_argument("--figure", required=True,
                        choices=sorted(FIGURE_SCHEMAS))
    parser.add_argument("--csv", required=True, nargs="+",
                        help="input CSV file(s) in the figure's schema")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(figure_id=args.figure, csv_paths=tuple(args.csv),
                          out_path=args.out))
    except SchemaError as exc:
        print(exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
