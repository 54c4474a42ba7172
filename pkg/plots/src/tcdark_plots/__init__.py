"""Figure presets for the dark-state deformation engine's CSV outputs."""

__version__ = "0.1.0"

from .render import PlotSpec, load_csv, render, PRESETS, preset_spec  # noqa: F401
