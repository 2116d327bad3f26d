"""Post-processing figures for vicsek-kinetic run outputs.

One script per figure kind (heatmap-quiver, profile, loglog, series,
phase-diagram) on top of a shared loader for the solver's documented file
formats.  Rendering is a pure function of the input files.
"""

from .figspec import KINDS, FigureSpec, render

__version__ = "0.1.0"
