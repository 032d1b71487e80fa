"""Tab-separated evaluation reports.

A report starts with two provenance lines, the toolkit version and the
resolved configuration as JSON::

    # resto 0.3.0a1
    # config {"quantizer.scheme": "sq_rvq", ...}

followed by a header row and one row per utterance. The first column is the
row identifier, every other column a float written with its shortest
round-trip representation.

"""
import json
from collections import OrderedDict
from typing import List, NamedTuple

import numpy as np

from .._version import __version__
from ..exceptions import FormatError
from ..utils import atomic_write

__all__ = ["Report", "write_report", "read_report", "summarize"]

_VERSION_PREFIX = "# resto "
_CONFIG_PREFIX = "# config "


class Report(NamedTuple):
    version: str
    config: dict
    columns: List[str]
    rows: List["OrderedDict"]


def _format(value):
    return value if isinstance(value, str) else repr(float(value))


def write_report(path, rows, config=None):
    """Write report rows atomically.

    Parameters
    ----------
    path : str
        Output file.
    rows : list of dict
        Rows sharing the same keys, ``"id"`` first.
    config : dict, optional
        Resolved configuration recorded in the header.

    """
    if len(rows) == 0:
        raise ValueError("A report needs at least one row.")

    columns = list(rows[0].keys())
    if columns[0] != "id":
        raise ValueError(f"The first report column must be 'id', got {columns[0]}.")
    for row in rows:
        if list(row.keys()) != columns:
            raise ValueError(f"Row {row['id']} has columns {list(row.keys())}.")

    with atomic_write(path, "w") as f:
        f.write(f"{_VERSION_PREFIX}{__version__}\n")
        f.write(f"{_CONFIG_PREFIX}{json.dumps(config or {}, sort_keys=True)}\n")
        f.write("\t".join(columns) + "\n")
        for row in rows:
            f.write("\t".join(_format(row[c]) for c in columns) + "\n")


def read_report(path):
    """Read a report written by :func:`write_report`."""
    with open(path, "r") as f:
        lines = [line.rstrip("\n") for line in f if line.strip()]

    if len(lines) < 3:
        raise FormatError(f"{path} is too short to be a report.")
    if not lines[0].startswith(_VERSION_PREFIX):
        raise FormatError(f"{path} has no version line.")
    if not lines[1].startswith(_CONFIG_PREFIX):
        raise FormatError(f"{path} has no config line.")

    try:
        config = json.loads(lines[1][len(_CONFIG_PREFIX) :])
    except json.JSONDecodeError as e:
        raise FormatError(f"{path} has an invalid config line: {e}") from e

    columns = lines[2].split("\t")
    if columns[0] != "id":
        raise FormatError(f"{path} header does not start with 'id'.")

    rows = []
    for number, line in enumerate(lines[3:], start=4):
        values = line.split("\t")
        if len(values) != len(columns):
            raise FormatError(f"{path}:{number} has {len(values)} columns.")
        try:
            row = OrderedDict([("id", values[0])])
            row.update((c, float(v)) for c, v in zip(columns[1:], values[1:]))
        except ValueError as e:
            raise FormatError(f"{path}:{number} is malformed: {e}") from e
        rows.append(row)

    return Report(lines[0][len(_VERSION_PREFIX) :], config, columns, rows)


def _aggregate(row_id, rows, columns, reduce):
    row = OrderedDict([("id", row_id)])
    for column in columns:
        row[column] = float(reduce([r[column] for r in rows]))
    return row


def summarize(rows, group_by="snr_db"):
    """Aggregate rows of a report.

    Returns
    -------
    list of OrderedDict
        A ``mean`` and a ``median`` row over every row, then one mean row
        ``snr=<level>`` per distinct value of the `group_by` column, in
        increasing order, when that column exists.

    """
    if len(rows) == 0:
        raise ValueError("Nothing to summarize.")

    columns = [c for c in rows[0].keys() if c != "id"]
    summary = [
        _aggregate("mean", rows, columns, np.mean),
        _aggregate("median", rows, columns, np.median),
    ]

    if group_by in columns:
        for level in sorted({r[group_by] for r in rows}):
            members = [r for r in rows if r[group_by] == level]
            summary.append(_aggregate(f"snr={level!r}", members, columns, np.mean))

    return summary
