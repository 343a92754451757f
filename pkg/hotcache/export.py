"""Export sweep rows to CSV."""

import csv
import sqlite3
from typing import Dict, Iterable, Optional, TextIO

from .hhpda import format_user
from .ledger import iter_rows, row_report
from .sim import SessionReport

SWEEP_COLUMNS = [
    'tau',
    'strategy',
    'seed',
    'R1_measured',
    'R1_theory',
    'R2_measured',
    'R2_theory',
    'r2_per_mirror',
    'decode_ok',
    'bytes_server',
    'bytes_mirrors',
    'demands',
]


def report_row(report: SessionReport) -> Dict[str, object]:
    """One CSV row; loads stay exact as p/q strings."""
    return {
        'tau': ",".join(format_user(user) for user in report.tau),
        'strategy': report.strategy,
        'seed': report.seed,
        'R1_measured': str(report.R1_measured),
        'R1_theory': str(report.R1_theory),
        'R2_measured': str(report.R2_measured),
        'R2_theory': str(report.R2_theory),
        'r2_per_mirror': ";".join(
            f"{k1}:{load}" for k1, load in sorted(report.r2_per_mirror.items())
        ),
        'decode_ok': str(all(report.decode_ok.values())).lower(),
        'bytes_server': report.bytes_server,
        'bytes_mirrors': report.bytes_mirrors,
        'demands': ",".join(str(n) for n in report.demands),
    }


def write_sweep(reports: Iterable[SessionReport], handle: TextIO) -> int:
    writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS)
    writer.writeheader()
    count = 0
    for report in reports:
        writer.writerow(report_row(report))
        count += 1
    return count


def export_sweep(reports: Iterable[SessionReport], out_csv: str) -> int:
    """Write sweep rows to a CSV file; returns the row count."""
    with open(out_csv, 'w', newline='', encoding='utf-8') as csvfile:
        return write_sweep(reports, csvfile)


def export_ledger(db_path: str, out_csv: str, digest: Optional[str] = None) -> int:
    """Export sessions already stored in a sweep ledger."""
    conn = sqlite3.connect(db_path)
    conn.row_factory = sqlite3.Row
    try:
        return export_sweep((row_report(row) for row in iter_rows(conn, digest)), out_csv)
    finally:
        conn.close()
