"""Incremental sweeps with a SQLite session ledger."""

import hashlib
import logging
import sqlite3
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .hhpda import HhpdaPair, Strategy, format_user, pair_json
from .schema import SessionReportFile
from .sim import SessionReport, SweepTask, make_library, plan_sweep, report_from_model, run_tasks

logger = logging.getLogger(__name__)


def init_db(conn: sqlite3.Connection) -> None:
    """Create ledger tables if they do not exist."""
    conn.execute(
        """
        CREATE TABLE IF NOT EXISTS sessions (
            session_id INTEGER PRIMARY KEY,
            pair_digest TEXT NOT NULL,
            tau TEXT NOT NULL,
            demands TEXT NOT NULL,
            strategy TEXT NOT NULL,
            seed INTEGER NOT NULL,
            library_seed INTEGER NOT NULL,
            files INTEGER NOT NULL,
            packet_bytes INTEGER NOT NULL,
            decode_ok INTEGER NOT NULL,
            report_json TEXT NOT NULL,
            stored_at TEXT NOT NULL
        )
        """
    )
    conn.execute(
        """
        CREATE UNIQUE INDEX IF NOT EXISTS idx_sessions_unique
        ON sessions (pair_digest, tau, demands, strategy, seed, library_seed, files, packet_bytes)
        """
    )
    conn.commit()


def pair_digest(pair: HhpdaPair) -> str:
    """SHA-256 of the canonical pair JSON; any changed cell gives a new digest."""
    return hashlib.sha256(pair_json(pair).encode("utf-8")).hexdigest()


def tau_key(tau: Iterable[Tuple[int, int]]) -> str:
    return ",".join(format_user(user) for user in tau)


def demands_key(demands: Iterable[int]) -> str:
    return ",".join(str(n) for n in demands)


SessionKey = Tuple[str, str, str, str, int, int, int, int]


def session_key(
    digest: str,
    task: SweepTask,
    strategy: Union[Strategy, str],
    library_seed: int,
    files: int,
    packet_bytes: int,
) -> SessionKey:
    return (
        digest,
        tau_key(task.tau),
        demands_key(task.demands),
        Strategy(strategy).value,
        task.seed,
        library_seed,
        files,
        packet_bytes,
    )


def lookup_row(conn: sqlite3.Connection, key: SessionKey) -> Optional[sqlite3.Row]:
    """Fetch a stored session by its full key."""
    return conn.execute(
        """
        SELECT session_id, decode_ok, report_json
        FROM sessions
        WHERE pair_digest = ? AND tau = ? AND demands = ? AND strategy = ?
          AND seed = ? AND library_seed = ? AND files = ? AND packet_bytes = ?
        """,
        key,
    ).fetchone()


def upsert_row(conn: sqlite3.Connection, key: SessionKey, report: SessionReport) -> None:
    """Insert or replace a finished session."""
    conn.execute(
        """
        INSERT INTO sessions (
            pair_digest,
            tau,
            demands,
            strategy,
            seed,
            library_seed,
            files,
            packet_bytes,
            decode_ok,
            report_json,
            stored_at
        )
        VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
        ON CONFLICT(pair_digest, tau, demands, strategy, seed, library_seed, files, packet_bytes)
        DO UPDATE SET
            decode_ok = excluded.decode_ok,
            report_json = excluded.report_json,
            stored_at = excluded.stored_at
        """,
        (
            *key,
            int(report.ok),
            SessionReportFile.model_validate(report.to_dict()).model_dump_json(),
            datetime.now(timezone.utc).isoformat(),
        ),
    )


def iter_rows(conn: sqlite3.Connection, digest: Optional[str] = None) -> Iterable[sqlite3.Row]:
    """Yield stored sessions in insertion order, optionally for one pair."""
    if digest is None:
        return conn.execute(
            "SELECT pair_digest, report_json FROM sessions ORDER BY session_id"
        )
    return conn.execute(
        "SELECT pair_digest, report_json FROM sessions WHERE pair_digest = ? ORDER BY session_id",
        (digest,),
    )


def row_report(row: sqlite3.Row) -> SessionReport:
    return report_from_model(SessionReportFile.model_validate_json(row["report_json"]))


def run_sweep_cached(
    pair: HhpdaPair,
    n_files: int,
    packet_bytes: int,
    db_path: str,
    taus: Union[str, int] = "all",
    policy: str = "random",
    strategy: Union[Strategy, str] = Strategy.PREFER_MIRROR_STAR,
    seed: int = 0,
    per_tau: int = 1,
    fixed_demands: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
    progress: Optional[bool] = None,
) -> Tuple[List[SessionReport], Dict[str, int]]:
    """Run a sweep, reusing sessions already stored in the ledger."""
    lib = make_library(n_files, pair.Fprime, packet_bytes, seed)
    tasks = plan_sweep(pair, n_files, taus, policy, seed, per_tau, fixed_demands)
    digest = pair_digest(pair)

    cache_hits = 0
    cache_misses = 0

    conn = sqlite3.connect(db_path)
    try:
        conn.row_factory = sqlite3.Row
        init_db(conn)

        found: Dict[int, SessionReport] = {}
        missing: List[int] = []
        for position, task in enumerate(tasks):
            row = lookup_row(conn, session_key(digest, task, strategy, seed, n_files, packet_bytes))
            if row is None:
                cache_misses += 1
                missing.append(position)
            else:
                cache_hits += 1
                found[position] = row_report(row)

        fresh = run_tasks(pair, lib, [tasks[p] for p in missing], strategy, threads, progress)
        for position, report in zip(missing, fresh):
            upsert_row(conn, session_key(digest, tasks[position], strategy, seed, n_files, packet_bytes), report)
            found[position] = report

        conn.commit()
    finally:
        conn.close()

    logger.info("ledger %s: %d hits, %d misses", db_path, cache_hits, cache_misses)
    reports = [found[position] for position in range(len(tasks))]
    return reports, {"cache_hits": cache_hits, "cache_misses": cache_misses}
