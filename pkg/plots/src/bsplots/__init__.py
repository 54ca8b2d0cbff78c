"""Publication-style figures from bscluster summary CSVs."""

__version__ = "0.1.0"

from .plot import PlotSpec, SchemaError, plot_sweep

__all__ = ["PlotSpec", "SchemaError", "plot_sweep", "__version__"]
