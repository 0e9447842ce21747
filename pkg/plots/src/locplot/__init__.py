"""Figure rendering for localization experiment CSV outputs."""

from .io import PlotInputError
from .render import KINDS, PlotSpec, RenderResult, render

__version__ = "0.1.0"

__all__ = ["PlotInputError", "KINDS", "PlotSpec", "RenderResult", "render"]
