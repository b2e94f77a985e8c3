"""Offline figure rendering for noisybandits harness CSVs."""

__version__ = "0.1.0"

from .render import (
    SchemaError,
    plot_alpha_scatter,
    plot_regret_over_time,
    plot_regret_vs_epsilon,
    render,
)
