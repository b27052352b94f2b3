"""Command line for rendering figure specs."""
from __future__ import annotations

import argparse
import sys

from .render import PlotError, render, spec_from_json


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render an experiment-summary CSV as a figure."
    )
    parser.add_argument("--spec", required=True, help="path to the figure spec JSON")
    args = parser.parse_args(argv)
    try:
        series = render(spec_from_json(args.spec))
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"rendered {len(series)} series")
    return 0


if __name__ == "__main__":
    sys.exit(main())
