"""
Result files.

A run writes one data file (CSV or JSON) plus a ``.meta.json`` sidecar
holding the schema version, the config snapshot and the seed. JSON records
carry the same snapshot under ``run``. Histograms also get a gnuplot script.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

from django.conf import settings

from spectral.density import SpectralHistogram
from superrmt.errors import OutputError, UsageError
from verify.reports import VerificationReport

logger = logging.getLogger(__name__)

HISTOGRAM_FIELDS = ("bin_lo", "bin_hi", "density", "stderr")
REPORT_FIELDS = ("identity", "passed", "hard_failure", "inconclusive", "lhs_re", "lhs_im",
                 "rhs_re", "rhs_im", "abs_deviation", "rel_deviation", "message")


def report_row(report: VerificationReport) -> dict:
    lhs = report.lhs or (None, None)
    rhs = report.rhs or (None, None)
    return {
        "identity": report.identity,
        "passed": report.passed,
        "hard_failure": report.hard_failure,
        "inconclusive": report.inconclusive,
        "lhs_re": lhs[0],
        "lhs_im": lhs[1],
        "rhs_re": rhs[0],
        "rhs_im": rhs[1],
        "abs_deviation": report.abs_deviation,
        "rel_deviation": report.rel_deviation,
        "message": report.message,
    }


def _normalize(records, fields):
    """(rows, fields, json_rows) for histograms, report lists and plain dicts."""
    if isinstance(records, SpectralHistogram):
        rows = records.rows()
        return rows, fields or HISTOGRAM_FIELDS, rows
    records = list(records)
    if records and isinstance(records[0], VerificationReport):
        return [report_row(r) for r in records], fields or REPORT_FIELDS, [
            r.model_dump(mode="json") for r in records
        ]
    if fields is None:
        if not records:
            raise UsageError("cannot infer CSV columns from an empty record list; pass fields")
        fields = tuple(records[0])
    return records, tuple(fields), records


def _with_run(row: dict, snapshot: dict | None, nested: bool) -> dict:
    if snapshot is None:
        return row
    if nested:
        return dict(row, method=dict(row.get("method", {}), run=snapshot))
    return dict(row, run=snapshot)


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OutputError(f"could not open output file: {exc.strerror or exc}", path) from exc


def write_meta(path: Path, snapshot: dict | None, **extra) -> Path:
    meta = path.with_name(path.name + ".meta.json")
    body = {"schema": settings.SUPERRMT_RESULTS_SCHEMA, "data": path.name,
            "seed": (snapshot or {}).get("seed"), "config": snapshot, **extra}
    fh = _open(meta)
    try:
        with fh:
            json.dump(body, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"could not write metadata: {exc.strerror or exc}", meta) from exc
    return meta


def emit_results(records, format: str, path, *, fields=None, snapshot: dict | None = None) -> list[Path]:
    """
    Write ``records`` to ``path`` and return the files written.

    ``records`` is a SpectralHistogram, a list of VerificationReports or a
    list of flat dicts. Column order is ``fields`` when given, otherwise the
    key order of the first record.
    """
    if format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {format!r}")
    path = Path(path)
    nested = isinstance(records, list) and bool(records) and isinstance(records[0], VerificationReport)
    rows, fields, json_rows = _normalize(records, fields)
    fh = _open(path)
    try:
        with fh:
            if format == "csv":
                writer = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore")
                writer.writeheader()
                writer.writerows(rows)
            else:
                json.dump([_with_run(row, snapshot, nested) for row in json_rows], fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise OutputError(f"could not write results: {exc.strerror or exc}", path) from exc
    written = [path, write_meta(path, snapshot, format=format, records=len(rows), fields=list(fields))]
    logger.info("wrote %s %s records to %s", len(rows), format, path)
    return written


def plot_script(data_path, *, title: str, reference: str | None = None) -> str:
    """gnuplot commands for a histogram CSV written by :func:`emit_results`."""
    data_path = Path(data_path)
    lines = [
        "set datafile separator ','",
        f"set title \"{title}\"",
        "set xlabel 'E'",
        "set ylabel 'rho(E)'",
        "set key top right",
        f"data = '{data_path.name}'",
        "plot data every ::1 using (($1+$2)/2):3:4 with yerrorbars title 'histogram'"
        + (f", {reference} with lines title 'reference'" if reference else ""),
    ]
    return "\n".join(lines) + "\n"


def write_plot_script(data_path, *, title: str, reference: str | None = None) -> Path:
    data_path = Path(data_path)
    script = data_path.with_suffix(".gp")
    fh = _open(script)
    try:
        with fh:
            fh.write(plot_script(data_path, title=title, reference=reference))
    except OSError as exc:
        raise OutputError(f"could not write plot script: {exc.strerror or exc}", script) from exc
    return script
