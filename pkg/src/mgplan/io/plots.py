"""Tidy CSV emission for iteration results.

Two files per run: costs.csv with one row per outer iteration, and
metrics.csv with one row per (iteration, day, block) holding the predicted
transient metrics and corrective deviations.  Currency cells are integer
cents; everything else is plain repr floats, dot-decimal, LF endings.
"""
from __future__ import annotations

import csv
import os
import tempfile


class IoError(RuntimeError):
    """Nothing to write, or the filesystem refused."""


def _cents(amount: float) -> int:
    return int(round(100.0 * amount))


def _atomic_rows(path, header, rows) -> None:
    directory = os.path.dirname(os.fspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(str(exc)) from exc


def emit_plot_csv(records, out_dir) -> dict[str, str]:
    """Write costs.csv and metrics.csv for a list of iteration records."""
    records = list(records)
    if not records:
        raise IoError("no iteration records to emit")
    os.makedirs(out_dir, exist_ok=True)

    cost_rows = []
    for rec in records:
        decisions = " ".join(rec.plan.generators) or "-"
        if rec.plan.lines:
            decisions += " " + " ".join(f"{a}-{b}" for a, b in rec.plan.lines)
        cost_rows.append([
            rec.psi,
            _cents(rec.investment_cost),
            decisions,
            _cents(rec.operation_cost - rec.shift_cost),
            _cents(rec.shift_cost),
            _cents(rec.disconnect_penalty),
            _cents(rec.total_cost),
            repr(float(rec.import_deviation_kw)),
            repr(float(rec.export_deviation_kw)),
        ])
    costs_path = os.path.join(out_dir, "costs.csv")
    _atomic_rows(costs_path, [
        "iteration", "investment_cents", "decisions", "operational_cents",
        "shift_penalty_cents", "disconnection_penalty_cents", "total_cents",
        "import_deviation_kw", "export_deviation_kw"], cost_rows)

    metric_rows = []
    for rec in records:
        for m in rec.metrics:
            metric_rows.append([
                rec.psi, m.day, m.hour,
                repr(float(m.import_kw)), repr(float(m.export_kw)),
                repr(float(m.secure_limit_kw)),
                repr(float(m.rocof)), repr(float(m.nadir)),
                repr(float(m.steady_state)), m.binding,
                repr(float(m.dp_import_kw)), repr(float(m.dp_export_kw)),
            ])
    metrics_path = os.path.join(out_dir, "metrics.csv")
    _atomic_rows(metrics_path, [
        "iteration", "day", "hour", "import_kw", "export_kw",
        "secure_limit_kw", "rocof_hz_per_s", "nadir_hz", "steady_state_hz",
        "binding", "import_deviation_kw", "export_deviation_kw"], metric_rows)
    return {"costs": costs_path, "metrics": metrics_path}
