"""Density heatmap with local-flux arrows from a solver snapshot."""

from __future__ import annotations

import sys

import numpy as np

from .common import base_parser, finish
from .figspec import FigureSpec
from .loader import density_and_flux, read_snapshot


def render(spec: FigureSpec) -> dict:
    import matplotlib.pyplot as plt

    snap = read_snapshot(spec.inputs[0])
    rho, j = density_and_flux(snap)
    L = snap.length
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    im = ax.imshow(
        rho.T, origin="lower", extent=[0, L, 0, L], cmap="viridis",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label="density")

    stride = max(1, snap.m_x // spec.options.get("arrows", 20))
    xs = (np.arange(snap.m_x) + 0.5) * (L / snap.m_x)
    ys = (np.arange(snap.m_y) + 0.5) * (L / snap.m_y)
    X, Y = np.meshgrid(xs[::stride], ys[::stride], indexing="ij")
    ax.quiver(
        X, Y, j[::stride, ::stride, 0], j[::stride, ::stride, 1],
        color="white", scale_units="xy", angles="xy",
    )
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    out = finish(fig, spec, f"density and flux, {snap.model}, t={snap.t:g}")
    out["rho_minmax"] = (float(rho.min()), float(rho.max()))
    return out


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    parser.add_argument("--arrows", type=int, default=20,
                        help="approximate arrows per axis")
    args = parser.parse_args(argv)
    render(FigureSpec(
        kind="heatmap-quiver", inputs=tuple(args.inputs), output=args.out,
        options={"dpi": args.dpi, "arrows": args.arrows},
    ))
    return 0


if __name__ == "__main__":
    sys.exit(main())
