"""Time-series plot of one column from a run series or diagnostic table."""

from __future__ import annotations

import sys

from .common import base_parser, finish
from .figspec import FigureSpec
from .loader import read_csv


def render(spec: FigureSpec) -> dict:
    import matplotlib.pyplot as plt

    column = spec.options.get("column", "max_rho")
    data = read_csv(spec.inputs[0], required=("t", column))
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(data["t"], data[column], lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel(column)
    if spec.options.get("logy"):
        ax.set_yscale("log")
    out = finish(fig, spec, f"{column} over time")
    out["n_samples"] = int(data["t"].size)
    return out


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    parser.add_argument("--column", default="max_rho",
                        help="column to plot against t (default max_rho)")
    parser.add_argument("--logy", action="store_true")
    args = parser.parse_args(argv)
    render(FigureSpec(
        kind="series", inputs=tuple(args.inputs), output=args.out,
        options={"dpi": args.dpi, "column": args.column, "logy": args.logy},
    ))
    return 0


if __name__ == "__main__":
    sys.exit(main())
