"""Long-format experiment reports (CSV / JSON) and parsing.

One row per grid cell: dataset, classifier, treatment, mechanism, delta,
error, stdev, replicates, seconds. Floats are written with repr() so parsing
recovers them exactly. The ``timing`` switch blanks the wall-clock column,
which makes reruns of the same grid byte-identical.
"""

from __future__ import annotations

import csv
import io
import json

__all__ = ["COLUMNS", "emit_report", "report_rows", "parse_report"]

COLUMNS = (
    "dataset",
    "classifier",
    "treatment",
    "mechanism",
    "delta",
    "error",
    "stdev",
    "replicates",
    "seconds",
)


def report_rows(results, timing: bool = True) -> list[dict]:
    rows = []
    for r in sorted(results, key=lambda r: r.cell_index):
        rows.append(
            {
                "dataset": r.dataset,
                "classifier": r.classifier,
                "treatment": r.treatment,
                "mechanism": r.mechanism,
                "delta": r.delta,
                "error": r.error,
                "stdev": r.stdev,
                "replicates": [float(e) for e in r.replicate_errors],
                "seconds": r.seconds if timing else None,
            }
        )
    return rows


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(
            [
                row["dataset"],
                row["classifier"],
                row["treatment"],
                row["mechanism"],
                repr(row["delta"]),
                repr(row["error"]),
                repr(row["stdev"]),
                json.dumps(row["replicates"]),
                "" if row["seconds"] is None else repr(row["seconds"]),
            ]
        )
    return buf.getvalue()


def emit_report(results, path, fmt: str = "csv", timing: bool = True) -> None:
    """Write results to ``path`` as csv or json."""
    if not results:
        raise ValueError("no results to report")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    rows = report_rows(results, timing=timing)
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            fh.write(_csv_text(rows))
        else:
            json.dump(rows, fh, indent=2)
            fh.write("\n")


def parse_report(path) -> list[dict]:
    """Read a report back (either format) into the row-dict form."""
    with open(path, newline="") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return json.loads(text)
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"{path}: unexpected report columns {reader.fieldnames}")
    for rec in reader:
        rows.append(
            {
                "dataset": rec["dataset"],
                "classifier": rec["classifier"],
                "treatment": rec["treatment"],
                "mechanism": rec["mechanism"],
                "delta": float(rec["delta"]),
                "error": float(rec["error"]),
                "stdev": float(rec["stdev"]),
                "replicates": json.loads(rec["replicates"]),
                "seconds": float(rec["seconds"]) if rec["seconds"] else None,
            }
        )
    return rows
