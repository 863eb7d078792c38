"""CSV export of a MetricsReport.

Each file opens with a ``# schema_version=N`` comment line followed by a
header row. Floats use ``repr`` so every cell parses back to the same value;
an empty ``mean_latency_s`` cell means no completions in that interval.
"""

from __future__ import annotations

import csv
import os
from dataclasses import astuple, fields

from .engine import LatencySample, MetricsRecord, MetricsReport, RunSummary

SCHEMA_VERSION = 1

INTERVAL_COLUMNS = ["t", "node_id", "utilization", "queue_len", "completed", "mean_latency_s", "energy_j"]
LATENCY_COLUMNS = ["request_id", "created_at", "completed_at", "latency_s", "node_id", "kind"]
SUMMARY_COLUMNS = [f.name for f in fields(RunSummary)]


class ReportError(OSError):
    pass


def cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path: str, columns, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# schema_version={SCHEMA_VERSION}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([cell(v) for v in row])
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from exc


def summary_row(s: RunSummary) -> list:
    return list(astuple(s))


def emit_csv(report: MetricsReport, out_dir: str) -> list[str]:
    """Write intervals.csv, latency.csv and summary.csv into ``out_dir``; return the paths."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    paths = [os.path.join(out_dir, n) for n in ("intervals.csv", "latency.csv", "summary.csv")]
    _write(paths[0], INTERVAL_COLUMNS, (astuple(r) for r in report.records))
    _write(paths[1], LATENCY_COLUMNS, (astuple(s) for s in report.latencies))
    _write(paths[2], SUMMARY_COLUMNS, [summary_row(report.summary)] if report.summary else [])
    return paths


def write_table(path: str, columns, rows) -> None:
    _write(path, columns, rows)


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# schema_version="):
            raise ValueError(f"{path}: missing schema_version line")
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _num(text: str, typ):
    if text == "":
        return None
    if typ is int:
        return int(text)
    if typ is float:
        return float(text)
    return text


def load_intervals(path: str) -> list[MetricsRecord]:
    _, rows = read_csv(path)
    types = [float, int, float, int, int, float, float]
    return [MetricsRecord(*(_num(v, t) for v, t in zip(r, types))) for r in rows]


def load_latencies(path: str) -> list[LatencySample]:
    _, rows = read_csv(path)
    types = [int, float, float, float, int, str]
    return [LatencySample(*(_num(v, t) for v, t in zip(r, types))) for r in rows]


def load_summary(path: str) -> list[RunSummary]:
    _, rows = read_csv(path)
    types = [int if f.type in ("int", int) else float for f in fields(RunSummary)]
    return [RunSummary(*(_num(v, t) for v, t in zip(r, types))) for r in rows]
