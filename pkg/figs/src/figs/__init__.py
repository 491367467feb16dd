"""Batch figure rendering for the spectral-experiment toolkit's outputs.

Consumes only the toolkit's files (CSV tables, JSON reports); it never
imports the toolkit itself.
"""

from .render import KINDS, FigureSpec, build_figure, render
from .schemas import (
    GridResults,
    ReportDocument,
    SchemaError,
    Table,
    TABLE_HEADERS,
    dump_grid_results,
    dump_report_document,
    dump_table,
    dump_table_json,
    load_grid_results,
    load_report_document,
    load_table,
    load_table_json,
)

__version__ = "0.1.0"

__all__ = [
    "FigureSpec", "GridResults", "KINDS", "ReportDocument", "SchemaError",
    "Table", "TABLE_HEADERS", "build_figure", "dump_grid_results",
    "dump_report_document", "dump_table", "dump_table_json",
    "load_grid_results", "load_report_document", "load_table",
    "load_table_json", "render", "__version__",
]
