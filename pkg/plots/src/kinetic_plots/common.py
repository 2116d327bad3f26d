"""Matplotlib setup and figure finishing shared by all scripts."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")  # batch rendering only

import matplotlib.pyplot as plt  # noqa: E402

from .figspec import FigureSpec  # noqa: E402
from .loader import config_hash  # noqa: E402


def finish(fig, spec: FigureSpec, title: str) -> dict:
    """Stamp the config hash into caption and metadata, write the image."""
    h = config_hash(spec.inputs[0])
    fig.suptitle(title)
    fig.text(0.99, 0.01, f"config {h}", ha="right", va="bottom",
             fontsize=6, color="0.4")
    fig.savefig(spec.output, dpi=spec.options.get("dpi", 150),
                metadata={"Description": f"config-hash={h}"})
    plt.close(fig)
    return {"output": spec.output, "config_hash": h}


def base_parser(doc: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description=doc)
    parser.add_argument("inputs", nargs="+", help="input data file(s)")
    parser.add_argument("--out", required=True, help="output image path (png/svg)")
    parser.add_argument("--dpi", type=int, default=150)
    return parser
