"""render_figures: draw one figure kind from a residual-suite CSV."""

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render twistvan residual-suite CSVs to image files",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input", required=True, help="suite CSV path")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--bin", type=float, default=0.0002, help="histogram bin width")
    parser.add_argument("--qmax", type=int, default=500, help="upper end of the q range")
    parser.add_argument(
        "--column", default="resid1", choices=["resid1", "resid2"],
        help="residual column for the a_q grid",
    )
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input_csv=args.input,
        output=args.out,
        bin_width=args.bin,
        q_range=(2, args.qmax),
        column=args.column,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
