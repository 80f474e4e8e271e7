"""CSV readers and writers for loads, load patterns and command outputs.

All user-facing powers are consumption-positive. Floats are written with
``repr`` so re-runs are byte-identical and values round-trip exactly.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .boundary import LoadPattern
from .netmodel import Network


class CsvFormatError(ValueError):
    pass


def fmt(x) -> str:
    return repr(float(x))


def _rows(text, required):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CsvFormatError("empty CSV document")
    header = [h.strip() for h in reader.fieldnames]
    missing = [c for c in required if c not in header]
    if missing:
        raise CsvFormatError(f"CSV is missing column(s) {missing}; found {header}")
    reader.fieldnames = header
    for lineno, row in enumerate(reader, start=2):
        if not any((v or "").strip() for v in row.values()):
            continue
        yield lineno, row


def _per_bus(text, net: Network, columns):
    """Read ``bus_id`` plus two numeric columns into per-load-bus arrays (missing rows are 0)."""
    order = {bus: k for k, bus in enumerate(net.load_buses)}
    a = np.zeros(net.n_loads)
    b = np.zeros(net.n_loads)
    seen = set()
    for lineno, row in _rows(text, ("bus_id",) + columns):
        try:
            bus = int(row["bus_id"])
            x, y = (float(row[c]) for c in columns)
        except (TypeError, ValueError) as exc:
            raise CsvFormatError(f"line {lineno}: {exc}") from None
        if bus not in order:
            raise CsvFormatError(f"line {lineno}: bus {bus} is not a load bus")
        if bus in seen:
            raise CsvFormatError(f"line {lineno}: bus {bus} listed twice")
        if not (np.isfinite(x) and np.isfinite(y)):
            raise CsvFormatError(f"line {lineno}: non-finite value")
        seen.add(bus)
        a[order[bus]], b[order[bus]] = x, y
    return a, b


def read_loads(text, net: Network) -> np.ndarray:
    """Consumption-positive complex loads ``P + jQ`` from ``bus_id,P,Q`` rows."""
    P, Q = _per_bus(text, net, ("P", "Q"))
    return P + 1j * Q


def read_pattern(text, net: Network) -> LoadPattern:
    wp, wq = _per_bus(text, net, ("weight_p", "weight_q"))
    return LoadPattern(wp, wq)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def read_table(text):
    """Parse a CSV written by :func:`write_csv` into a header and a list of row dicts."""
    reader = csv.DictReader(io.StringIO(text))
    return reader.fieldnames or [], list(reader)
