"""Paper-style figure rendering for su2qudit CSV outputs.

This package consumes only the simulator's public CSV/manifest contract
(schema version 1); it never imports the simulator itself.
"""

from .render import FigureSpec, PlotError, bundled_specs, read_csv

CSV_SCHEMA_VERSION = "1"

__all__ = ["FigureSpec", "PlotError", "bundled_specs", "read_csv",
           "CSV_SCHEMA_VERSION"]
