"""Band profiles: density and mean velocity along the band axis.

Accepts either a particle band-profile CSV (columns t,bin,rho_bar,u_bar;
the latest sampled time is drawn) or a solver snapshot, whose density is
reduced over y to a 1D profile.
"""

from __future__ import annotations

import sys

import numpy as np

from .common import base_parser, finish
from .figspec import FigureSpec
from .loader import density_and_flux, read_csv, read_snapshot


def _profile_from_csv(path: str, at_time: float | None):
    data = read_csv(path, required=("t", "bin", "rho_bar", "u_bar"))
    times = np.unique(data["t"])
    t_sel = times[-1] if at_time is None else times[np.argmin(np.abs(times - at_time))]
    sel = data["t"] == t_sel
    return t_sel, data["bin"][sel], data["rho_bar"][sel], data["u_bar"][sel]


def _profile_from_snapshot(path: str):
    snap = read_snapshot(path)
    rho, j = density_and_flux(snap)
    x = (np.arange(snap.m_x) + 0.5) * (snap.length / snap.m_x)
    rho_x = rho.mean(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        u_x = np.where(rho_x > 0, j[:, :, 0].mean(axis=1) / rho_x, 0.0)
    return snap.t, x, rho_x, u_x


def render(spec: FigureSpec) -> dict:
    import matplotlib.pyplot as plt

    path = spec.inputs[0]
    if path.endswith(".snap"):
        t_sel, x, rho, u = _profile_from_snapshot(path)
    else:
        t_sel, x, rho, u = _profile_from_csv(path, spec.options.get("at_time"))

    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.6))
    ax1.plot(x, rho, lw=1.2)
    ax1.set_ylabel("density")
    ax2.plot(x, u, lw=1.2, color="tab:orange")
    ax2.set_ylabel("mean velocity")
    ax2.set_xlabel("x")
    out = finish(fig, spec, f"band profile at t={t_sel:g}")
    out["t"] = float(t_sel)
    out["rho_max_over_mean"] = float(rho.max() / rho.mean()) if rho.mean() else 0.0
    return out


def main(argv=None) -> int:
    parser = base_parser(__doc__)
    parser.add_argument("--at-time", type=float, default=None,
                        help="profile sample time (CSV input; default: last)")
    args = parser.parse_args(argv)
    render(FigureSpec(
        kind="profile", inputs=tuple(args.inputs), output=args.out,
        options={"dpi": args.dpi, "at_time": args.at_time},
    ))
    return 0


if __name__ == "__main__":
    sys.exit(main())
