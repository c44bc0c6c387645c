import argparse
import sys

from .render import KINDS, FigureSpec, render
from .schema import SchemaError


def main(argv=None):
    ap = argparse.ArgumentParser(prog="figure_kit")
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--csv", action="append", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--theory-order", type=int)
    ap.add_argument("--title", default="")
    args = ap.parse_args(argv)
    try:
        render(FigureSpec(args.kind, args.csv, args.out, args.title, args.theory_order))
    except SchemaError as e:
        print(f"figure_kit: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
