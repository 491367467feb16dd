"""Parsers for the experiment toolkit's file outputs.

The toolkit emits flat CSV tables (repr-formatted floats, CRLF rows from the
csv module) and JSON documents (sorted keys, two-space indent, trailing
newline).  Every loader validates the schema strictly and every schema has a
dump counterpart, so a parse/dump cycle reproduces the input byte for byte;
the tests pin that against golden files.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the expected table or document schema."""


# column layout of each table schema; order matters for the header check
TABLE_HEADERS = {
    "report": ("n", "trial", "statistic", "argmax"),
    "spectrum": ("re", "im", "modulus"),
    "density": ("r", "density", "limit_density"),
    "mean-distance": ("R", "distance"),
    "potential": ("re", "im", "u_empirical", "u_limit", "clamped"),
    "counts": ("trial", "count"),
}

# integer-valued columns; everything else parses as float
_INT_COLUMNS = frozenset({"n", "trial", "count", "clamped"})


@dataclass(frozen=True)
class Table:
    """One parsed table: typed columns plus the raw document for JSON
    round-trips (None when the source was CSV)."""

    schema: str
    header: tuple
    columns: dict
    raw: object = field(default=None, repr=False)

    @property
    def nrows(self) -> int:
        return 0 if not self.header else len(self.columns[self.header[0]])

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"table has no column {name!r}")
        return self.columns[name]


def _expected_header(schema: str) -> tuple:
    if schema not in TABLE_HEADERS:
        raise SchemaError(f"unknown table schema {schema!r}")
    return TABLE_HEADERS[schema]


def _typed(name: str, value) -> object:
    try:
        return int(value) if name in _INT_COLUMNS else float(value)
    except (TypeError, ValueError):
        raise SchemaError(f"column {name!r} has non-numeric value {value!r}")


def _pack(schema, header, cells):
    cols = {}
    for j, name in enumerate(header):
        vals = [row[j] for row in cells]
        cols[name] = np.array(vals, dtype=int if name in _INT_COLUMNS
                              else float)
    return schema, header, cols


def load_table(path, schema: str) -> Table:
    """Parse a CSV table, checking the header and the cell types."""
    header = _expected_header(schema)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {header}")
        if tuple(first) != header:
            raise SchemaError(f"{path}: header {tuple(first)} does not match "
                              f"{schema} schema {header}")
        cells = []
        for k, row in enumerate(reader):
            if len(row) != len(header):
                raise SchemaError(f"{path}: row {k + 1} has {len(row)} cells, "
                                  f"expected {len(header)}")
            cells.append([_typed(n, v) for n, v in zip(header, row)])
    return Table(*_pack(schema, header, cells))


def dump_table(table: Table) -> bytes:
    """Serialize back to the CSV wire format (repr floats, CRLF rows)."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(table.header)
    for i in range(table.nrows):
        w.writerow([str(int(table.columns[n][i])) if n in _INT_COLUMNS
                    else repr(float(table.columns[n][i]))
                    for n in table.header])
    return buf.getvalue().encode()


def load_table_json(path, schema: str) -> Table:
    """Parse the JSON variant of a table: a list of one object per row.

    The writer emits numeric cells as repr strings or as plain numbers
    depending on the producing subcommand, so values are coerced here; the
    raw document is kept for byte-exact re-serialization.
    """
    header = _expected_header(schema)
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: expected a JSON array of row objects")
    cells = []
    for k, row in enumerate(doc):
        missing = [n for n in header if n not in row]
        if missing:
            raise SchemaError(f"{path}: row {k} is missing columns {missing}")
        cells.append([_typed(n, row[n]) for n in header])
    packed = _pack(schema, header, cells)
    return Table(*packed, raw=doc)


def _dump_json(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()


def dump_table_json(table: Table) -> bytes:
    if table.raw is None:
        raise SchemaError("table was not loaded from JSON")
    return _dump_json(table.raw)


@dataclass(frozen=True)
class ReportDocument:
    """The sweep report: echoed plan, per-n summaries, fit, verdicts."""

    plan: dict
    per_n: dict
    fit: object
    constants: dict
    verdicts: dict
    failures: list
    seed: int
    versions: dict
    raw: dict = field(repr=False, default=None)


_REPORT_KEYS = ("plan", "per_n", "fit", "constants", "verdicts", "failures",
                "seed", "versions")


def load_report_document(path) -> ReportDocument:
    with open(path) as fh:
        doc = json.load(fh)
    missing = [k for k in _REPORT_KEYS if k not in doc]
    if missing:
        raise SchemaError(f"{path}: report document missing keys {missing}")
    if doc["fit"] is not None and "slope" not in doc["fit"]:
        raise SchemaError(f"{path}: fit block has no slope")
    return ReportDocument(*(doc[k] for k in _REPORT_KEYS), raw=doc)


def dump_report_document(doc: ReportDocument) -> bytes:
    return _dump_json(doc.raw)


@dataclass(frozen=True)
class GridResults:
    """Randomized-lattice approximation records: M, shift, lhs, rhs, gap."""

    records: list
    raw: list = field(repr=False, default=None)


def load_grid_results(path) -> GridResults:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: expected a JSON array of records")
    for k, rec in enumerate(doc):
        missing = [key for key in ("M", "shift", "lhs", "rhs", "gap")
                   if key not in rec]
        if missing:
            raise SchemaError(f"{path}: record {k} missing keys {missing}")
        if len(rec["shift"]) != 2:
            raise SchemaError(f"{path}: record {k} shift must have 2 entries")
    return GridResults(records=doc, raw=doc)


def dump_grid_results(res: GridResults) -> bytes:
    return _dump_json(res.raw)
