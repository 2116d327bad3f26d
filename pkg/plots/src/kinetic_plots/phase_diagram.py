"""Entropy phase diagram over (mean density, diffusion) with the ordering
threshold curve sigma = pi * mu * rho_bar."""

from __future__ import annotations

import os
import sys

import numpy as np

from .common import base_parser, finish
from .figspec import FigureSpec
from .loader import read_csv


def _mu_from_config(input_path: str) -> float | None:
    d = os.path.dirname(os.path.abspath(input_path))
    for _ in range(3):
        candidate = os.path.join(d, "config.echo")
        if os.path.exists(candidate):
            with open(candidate, "r", encoding="ascii") as fh:
                for line in fh:
                    key, _, val = line.partition("=")
                    if key.strip() == "mu":
                        return float(val.strip())
        d = os.path.dirname(d)
    return None


def render(spec: FigureSpec) -> dict:
    import matplotlib.pyplot as plt

    data = read_csv(spec.inputs[0], required=("rho_bar", "sigma", "E_u", "E_VM", "kappa"))
    mu = spec.options.get("mu") or _mu_from_config(spec.inputs[0]) or 1.0
    rho = np.unique(data["rho_bar"])
    sig = np.unique(data["sigma"])
    column = spec.options.get("column", "E_u")

    grid = np.full((sig.size, rho.size), np.nan)
    kappa_grid = np.full_like(grid, np.nan)
    for rb, sg, val, kp in zip(data["rho_bar"], data["sigma"], data[column], data["kappa"]):
        i = np.searchsorted(sig, sg)
        j = np.searchsorted(rho, rb)
        grid[i, j] = val
        kappa_grid[i, j] = kp

    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    im = ax.pcolormesh(rho, sig, grid, shading="nearest", cmap="magma")
    fig.colorbar(im, ax=ax, label=column)
    # ordering threshold: kappa vanishes above this line
    rr = np.linspace(rho.min(), rho.max(), 200)
    ax.plot(rr, np.pi * mu * rr, "w--", lw=1.5, label=r"sigma = pi mu rho")
    # mark the disordered (kappa = 0) points so the split is visible
    zero = data["kappa"] == 0.0
    ax.plot(data["rho_bar"][zero], data["sigma"][zero], "w.", ms=3)
    ax.set_xlabel("mean density")
    ax.set_ylabel("sigma")
    ax.set_ylim(sig.min(), sig.max())
    ax.legend(loc="upper left", fontsize=7)
    out = finish(fig, spec, f"{column} phase diagram")

    thresh = np.pi * mu * data["rho_bar"]
    out["threshold_consistent"] = bool(
        np.all((data["kappa"] == 0.0) == (data["sigma"] >= thresh - 1e-12))
    )
    out["n_zero"] = int(zero.sum())
    out["n_points"] = int(data["kappa"].size)
    return out


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    parser.add_argument("--column", default="E_u", choices=["E_u", "E_VM"],
                        help="entropy column to draw")
    parser.add_argument("--mu", type=float, default=None,
                        help="alignment strength for the threshold line "
                             "(default: from the run's config.echo)")
    args = parser.parse_args(argv)
    summary = render(FigureSpec(
        kind="phase-diagram", inputs=tuple(args.inputs), output=args.out,
        options={"dpi": args.dpi, "column": args.column, "mu": args.mu},
    ))
    print(f"threshold consistent: {summary['threshold_consistent']} "
          f"({summary['n_zero']}/{summary['n_points']} disordered points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
