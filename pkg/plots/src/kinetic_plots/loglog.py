"""Log-log convergence plot with a fitted slope and a slope-2 guide."""

from __future__ import annotations

import sys

import numpy as np

from .common import base_parser, finish
from .figspec import FigureSpec
from .loader import read_csv


def render(spec: FigureSpec) -> dict:
    import matplotlib.pyplot as plt

    data = read_csv(spec.inputs[0], required=("dtheta", "l2_error"))
    dth, err = data["dtheta"], data["l2_error"]
    slope = float(np.polyfit(np.log(dth), np.log(err), 1)[0])

    fig, ax = plt.subplots(figsize=(5.6, 4.4))
    ax.loglog(dth, err, "o-", label=f"measured (slope {slope:.2f})")
    guide = err[-1] * (dth / dth[-1]) ** 2
    ax.loglog(dth, guide, "--", color="0.5", label="slope 2 guide")
    ax.set_xlabel("angular step")
    ax.set_ylabel("L2 error")
    ax.legend()
    out = finish(fig, spec, "grid convergence")
    out["slope"] = slope
    return out


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    args = parser.parse_args(argv)
    summary = render(FigureSpec(
        kind="loglog", inputs=tuple(args.inputs), output=args.out,
        options={"dpi": args.dpi},
    ))
    print(f"slope = {summary['slope']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
