"""Figure specification shared by the per-kind scripts."""

from __future__ import annotations

from dataclasses import dataclass, field

KINDS = ("heatmap-quiver", "profile", "loglog", "series", "phase-diagram")


@dataclass(frozen=True)
class FigureSpec:
    """What to render: kind, input files, output image, axis options."""

    kind: str
    inputs: tuple[str, ...]
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; pick from {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input file is required")


def render(spec: FigureSpec) -> dict:
    """Dispatch to the renderer for ``spec.kind``; returns its summary."""
    from . import heatmap_quiver, loglog, phase_diagram, profile, series

    kind_map = {
        "heatmap-quiver": heatmap_quiver.render,
        "profile": profile.render,
        "loglog": loglog.render,
        "series": series.render,
        "phase-diagram": phase_diagram.render,
    }
    return kind_map[spec.kind](spec)
