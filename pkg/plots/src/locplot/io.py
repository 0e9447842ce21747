"""Readers for the simulator's documented CSV schemas.

The plot tool is a pure consumer: it parses trial and summary CSVs (and the
optional run report) by their documented columns and never writes to them.
"""

import csv
import json
import os


class PlotInputError(ValueError):
    """Raised for unreadable inputs, missing columns or empty method filters."""


TRIAL_COLUMNS = [
    "setup_id", "test_id", "method", "true_x", "true_y", "est_x", "est_y",
    "var_x", "var_y", "err_m", "ellipse_area_m2", "covered",
]

SUMMARY_NUMERIC = ["mean_err_m", "mean_ellipse_area_m2", "coverage_pct"] + [
    f"p{q}" for q in range(10, 100, 10)
] + ["runtime_s"]


def read_csv_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise PlotInputError(f"{path} is empty")
            return list(reader), list(reader.fieldnames)
    except OSError as exc:
        raise PlotInputError(f"cannot read {path}: {exc}") from exc


def require_columns(fieldnames, needed, path):
    missing = [c for c in needed if c not in fieldnames]
    if missing:
        raise PlotInputError(f"{path} lacks column(s) {', '.join(missing)}")


def read_summary(path):
    rows, fields = read_csv_rows(path)
    require_columns(fields, ["sweep_value", "method"], path)
    return rows


def read_trials(path):
    rows, fields = read_csv_rows(path)
    require_columns(fields, ["method", "err_m", "setup_id"], path)
    return rows


def numeric(row, column, path):
    try:
        return float(row[column])
    except (KeyError, TypeError, ValueError) as exc:
        raise PlotInputError(f"{path}: column {column!r} is not numeric "
                             f"({row.get(column)!r})") from exc


def sweep_map_for(trials_path, report_path=None):
    """setup_id -> sweep value from the run report next to a trial CSV."""
    if report_path is None:
        candidate = os.path.join(os.path.dirname(os.path.abspath(trials_path)),
                                 "report.json")
        report_path = candidate if os.path.exists(candidate) else None
    if report_path is None:
        return {}
    try:
        with open(report_path, encoding="utf-8") as fh:
            return dict(json.load(fh).get("setup_sweep", {}))
    except (OSError, json.JSONDecodeError) as exc:
        raise PlotInputError(f"cannot read report {report_path}: {exc}") from exc
