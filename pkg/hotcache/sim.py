"""Hotplug delivery sessions on real bytes.

A session runs the whole two-layer protocol for one active set: the server
multicasts one XOR per inner-array label, every mirror with active users
forwards those messages with the terms it can cancel removed (phase A) and
then serves its own labels out of the mirror cache (phase B). Users cancel
what they hold, keep the single unknown coded packet of every message and
decode their file once they hold F' distinct coded packets.
"""

import logging
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from tqdm import tqdm

from .errors import (
    CorruptionError,
    InsufficientSharesError,
    ParameterError,
    ProtocolViolation,
    ShapeError,
    UndecodableError,
)
from .gf import GeneratorMatrix, Packet, mds_decode, mds_encode, mds_generator, split_file, xor_packets
from .hhpda import HhpdaPair, Strategy, User, fill_qbar, find_zeta, format_user, normalize_tau, parse_users
from .pda import STAR, Grid, is_label
from .schema import SessionReportFile, parse_json

logger = logging.getLogger(__name__)

THREADS_ENV = "HOTCACHE_THREADS"

# (file id, 1-based coded index)
Term = Tuple[int, int]

PHASE_SERVER = "server"
PHASE_FORWARD = "A"
PHASE_LOCAL = "B"


@dataclass(frozen=True)
class Library:
    files: Tuple[bytes, ...]

    def __post_init__(self) -> None:
        if not self.files:
            raise ParameterError("a library needs at least one file")
        lengths = {len(data) for data in self.files}
        if len(lengths) != 1:
            raise ShapeError(f"files have unequal lengths {sorted(lengths)}")
        if 0 in lengths:
            raise ShapeError("files must hold at least one byte")

    @property
    def N(self) -> int:
        return len(self.files)

    @property
    def file_bytes(self) -> int:
        return len(self.files[0])

    def file(self, n: int) -> bytes:
        if not 1 <= n <= self.N:
            raise ParameterError(f"file id {n} outside 1..{self.N}")
        return self.files[n - 1]


def make_library(n_files: int, Fprime: int, packet_bytes: int, seed: int = 0) -> Library:
    """N random files of F' packets each, reproducible from ``seed``."""
    if n_files < 1:
        raise ParameterError(f"need at least one file, got {n_files}")
    if packet_bytes < 1:
        raise ParameterError(f"packets must hold at least one byte, got {packet_bytes}")
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 256, size=(n_files, Fprime * packet_bytes), dtype=np.uint8)
    return Library(tuple(row.tobytes() for row in data))


@dataclass
class CacheState:
    """Coded packets of the server, every mirror and every user, keyed by (file id, coded index)."""

    generator: GeneratorMatrix
    coded: Dict[int, List[Packet]]
    mirrors: Dict[int, Dict[Term, Packet]]
    users: Dict[User, Dict[Term, Packet]]
    packet_bytes: int

    def packet(self, term: Term) -> Packet:
        n, f = term
        return self.coded[n][f - 1]

    def mirror_rows(self, k1: int) -> List[int]:
        return sorted({f for _, f in self.mirrors[k1]})

    def user_rows(self, user: User) -> List[int]:
        return sorted({f for _, f in self.users[user]})


def place(pair: HhpdaPair, lib: Library) -> CacheState:
    """Split, MDS-encode and distribute every file according to the star positions of Q."""
    if lib.file_bytes % pair.Fprime:
        raise ShapeError(f"file length {lib.file_bytes} is not divisible by F'={pair.Fprime}")
    g = mds_generator(pair.F, pair.Fprime)
    coded = {n: mds_encode(g, split_file(lib.file(n), pair.Fprime)) for n in range(1, lib.N + 1)}

    mirrors: Dict[int, Dict[Term, Packet]] = {}
    for k1 in range(1, pair.K1 + 1):
        rows = [f for f in range(1, pair.F + 1) if pair.Q0[f - 1][k1 - 1] == STAR]
        mirrors[k1] = {(n, f): coded[n][f - 1] for n in coded for f in rows}

    users: Dict[User, Dict[Term, Packet]] = {}
    for k1, k2 in pair.users():
        grid = pair.Qsub[k1 - 1]
        rows = [f for f in range(1, pair.F + 1) if grid[f - 1][k2 - 1] == STAR]
        users[(k1, k2)] = {(n, f): coded[n][f - 1] for n in coded for f in rows}

    logger.info(
        "placed %d files: M1/N=%s M2/N=%s",
        lib.N,
        Fraction(pair.Z1, pair.Fprime),
        Fraction(pair.Z2, pair.Fprime),
    )
    return CacheState(g, coded, mirrors, users, lib.file_bytes // pair.Fprime)


@dataclass(frozen=True)
class SessionState:
    """One delivery round; ``tau`` is sorted and its order is the bijection phi."""

    tau: Tuple[User, ...]
    demands: Tuple[int, ...]
    zeta: Tuple[int, ...]
    qbar: Grid
    strategy: Strategy
    seed: int

    @property
    def phi(self) -> Dict[User, int]:
        return {user: j for j, user in enumerate(self.tau, start=1)}

    def column(self, user: User) -> int:
        try:
            return self.tau.index(user)
        except ValueError:
            raise ParameterError(f"user {format_user(user)} is not active in this session") from None

    def demand(self, user: User) -> int:
        return self.demands[self.column(user)]

    def column_labels(self, user: User) -> Set[int]:
        j = self.column(user)
        return {row[j] for row in self.qbar if is_label(row[j])}

    def active_under(self, k1: int) -> List[User]:
        return [user for user in self.tau if user[0] == k1]


def open_session(
    pair: HhpdaPair,
    tau: Sequence[User],
    demands: Sequence[int],
    strategy: Union[Strategy, str] = Strategy.PREFER_MIRROR_STAR,
    seed: int = 0,
    n_files: Optional[int] = None,
    method: str = "auto",
) -> SessionState:
    """Pick zeta and fill Q-bar for an active set; demands follow the order ``tau`` was given in."""
    strategy = Strategy(strategy)
    given = [(int(k1), int(k2)) for k1, k2 in tau]
    users = normalize_tau(pair, given)
    if len(users) != pair.Kprime:
        raise ParameterError(f"sessions need exactly K'={pair.Kprime} active users, got {len(users)}")
    if len(demands) != len(given):
        raise ParameterError(f"{len(demands)} demands for {len(given)} active users")
    for n in demands:
        if n < 1 or (n_files is not None and n > n_files):
            limit = f"1..{n_files}" if n_files is not None else "positive ids"
            raise ParameterError(f"demand {n} outside {limit}")
    by_user = dict(zip(given, demands))
    zeta = find_zeta(pair, users, strategy, method=method)
    qbar = fill_qbar(pair, zeta, users)
    return SessionState(
        tau=tuple(users),
        demands=tuple(int(by_user[user]) for user in users),
        zeta=tuple(zeta),
        qbar=qbar,
        strategy=strategy,
        seed=seed,
    )


@dataclass(frozen=True)
class Transmission:
    """A coded message; ``sender`` is None for the server, else the mirror index."""

    sender: Optional[int]
    phase: str
    label: int
    payload: Packet
    terms: Tuple[Term, ...]


def _label_cells(session: SessionState) -> Dict[int, List[Tuple[int, int]]]:
    cells: Dict[int, List[Tuple[int, int]]] = {}
    for r, row in enumerate(session.qbar):
        for j, cell in enumerate(row):
            if is_label(cell):
                cells.setdefault(cell, []).append((j, r))
    for positions in cells.values():
        positions.sort()
    return cells


def server_transmissions(pair: HhpdaPair, session: SessionState, caches: CacheState) -> List[Transmission]:
    """X_s for every label of B, in label order; terms are listed by active-user column."""
    cells = _label_cells(session)
    out = []
    for s in sorted(pair.S):
        terms = tuple((session.demands[j], session.zeta[r]) for j, r in cells.get(s, []))
        if not terms:
            continue
        payload = xor_packets(*(caches.packet(term) for term in terms))
        out.append(Transmission(None, PHASE_SERVER, s, payload, terms))
    logger.debug("server sends %d messages for %s", len(out), [format_user(u) for u in session.tau])
    return out


def mirror_transmissions(
    pair: HhpdaPair,
    session: SessionState,
    caches: CacheState,
    k1: int,
    server_msgs: Sequence[Transmission],
) -> List[Transmission]:
    active = session.active_under(k1)
    if not active:
        return []
    mirror_cache = caches.mirrors[k1]
    cells = _label_cells(session)
    wanted = set().union(*(session.column_labels(user) for user in active))

    out = []
    for msg in server_msgs:
        if msg.label not in wanted:
            continue
        kept: List[Term] = []
        cancelled: List[Term] = []
        for j, r in cells[msg.label]:
            term = (session.demands[j], session.zeta[r])
            if session.tau[j][0] != k1 and term in mirror_cache:
                cancelled.append(term)
            else:
                kept.append(term)
        payload = xor_packets(msg.payload, *(mirror_cache[term] for term in cancelled))
        out.append(Transmission(k1, PHASE_FORWARD, msg.label, payload, tuple(kept)))

    grid = pair.Qsub[k1 - 1]
    local: Dict[int, List[Term]] = {}
    for f in session.zeta:
        for user in active:
            cell = grid[f - 1][user[1] - 1]
            if is_label(cell):
                local.setdefault(cell, []).append((session.demand(user), f))
    for s in sorted(local):
        terms = tuple(local[s])
        missing = [term for term in terms if term not in mirror_cache]
        if missing:
            raise ProtocolViolation(f"mirror {k1} label {s} needs uncached packets {missing}")
        payload = xor_packets(*(mirror_cache[term] for term in terms))
        out.append(Transmission(k1, PHASE_LOCAL, s, payload, terms))
    return out


def _local_labels(pair: HhpdaPair, session: SessionState, user: User) -> Set[int]:
    k1, k2 = user
    grid = pair.Qsub[k1 - 1]
    return {grid[f - 1][k2 - 1] for f in session.zeta if is_label(grid[f - 1][k2 - 1])}


def recover_packets(
    pair: HhpdaPair,
    session: SessionState,
    user: User,
    cache: Dict[Term, Packet],
    received: Sequence[Transmission],
) -> Dict[int, Packet]:
    """Coded packets of the demanded file peeled off the messages meant for ``user``."""
    demand = session.demand(user)
    forward_labels = session.column_labels(user)
    local_labels = _local_labels(pair, session, user)

    recovered: Dict[int, Packet] = {}
    for msg in received:
        if msg.sender != user[0]:
            continue
        if msg.phase == PHASE_FORWARD and msg.label not in forward_labels:
            continue
        if msg.phase == PHASE_LOCAL and msg.label not in local_labels:
            continue
        if msg.phase == PHASE_SERVER:
            continue
        unknown = [term for term in msg.terms if term not in cache]
        if len(unknown) != 1:
            raise ProtocolViolation(
                f"user {format_user(user)}: message {msg.phase}{msg.label} leaves unknown terms {unknown}"
            )
        n, f = unknown[0]
        if n != demand:
            raise ProtocolViolation(
                f"user {format_user(user)}: message {msg.phase}{msg.label} carries file {n}, demand is {demand}"
            )
        known = [cache[term] for term in msg.terms if term in cache]
        recovered[f] = xor_packets(msg.payload, *known)
    return recovered


def user_decode(
    pair: HhpdaPair,
    session: SessionState,
    user: User,
    cache: Dict[Term, Packet],
    received: Sequence[Transmission],
    generator: Optional[GeneratorMatrix] = None,
) -> bytes:
    """Rebuild the demanded file from the cache and the mirror's messages."""
    if user not in session.phi:
        raise ParameterError(f"user {format_user(user)} is not active in this session")
    demand = session.demand(user)
    recovered = recover_packets(pair, session, user, cache, received)
    shares = {f: packet for (n, f), packet in cache.items() if n == demand}
    shares.update(recovered)
    if len(shares) < pair.Fprime:
        raise UndecodableError(
            f"user {format_user(user)} holds {len(shares)} coded packets of file {demand}, needs {pair.Fprime}"
        )
    g = generator if generator is not None else mds_generator(pair.F, pair.Fprime)
    try:
        info = mds_decode(g, [(f - 1, packet) for f, packet in sorted(shares.items())])
    except InsufficientSharesError as exc:
        raise UndecodableError(str(exc)) from exc
    logger.debug(
        "user %s decoded file %d from %d cached and %d recovered packets",
        format_user(user),
        demand,
        len(shares) - len(recovered),
        len(recovered),
    )
    return b"".join(info)


@dataclass(frozen=True)
class Loads:
    R1: Fraction
    r2: Dict[int, Fraction]
    R2: Fraction
    phase_a: Dict[int, int]
    phase_b: Dict[int, int]


def theoretical_loads(pair: HhpdaPair, session: SessionState) -> Loads:
    """Closed-form counts from the arrays alone; the measured messages must match them.

    Phase A of mirror k1 is the union of the label sets of B's columns for
    its active users. Phase B is the union of the labels those users hold in
    the mirror's array on selected rows the mirror caches.
    """
    b_labels = [
        {row[j] for row in pair.B.grid if is_label(row[j])} for j in range(pair.Kprime)
    ]
    selected = set(session.zeta)
    phase_a: Dict[int, int] = {}
    phase_b: Dict[int, int] = {}
    for k1 in range(1, pair.K1 + 1):
        active = [(j, user) for j, user in enumerate(session.tau) if user[0] == k1]
        forward: Set[int] = set().union(*(b_labels[j] for j, _ in active))
        grid = pair.Qsub[k1 - 1]
        local = {
            grid[f][user[1] - 1]
            for f in range(pair.F)
            if f + 1 in selected and pair.Q0[f][k1 - 1] == STAR
            for _, user in active
            if is_label(grid[f][user[1] - 1])
        }
        phase_a[k1] = len(forward)
        phase_b[k1] = len(local)
    r2 = {k1: Fraction(phase_a[k1] + phase_b[k1], pair.Fprime) for k1 in phase_a}
    return Loads(
        R1=Fraction(len(pair.S), pair.Fprime),
        r2=r2,
        R2=max(r2.values(), default=Fraction(0)),
        phase_a=phase_a,
        phase_b=phase_b,
    )


@dataclass(frozen=True)
class MirrorCount:
    k1: int
    phase_a: int
    phase_b: int
    theory_phase_a: int
    theory_phase_b: int


@dataclass
class SessionReport:
    tau: Tuple[User, ...]
    demands: Tuple[int, ...]
    zeta: Tuple[int, ...]
    strategy: str
    seed: int
    Fprime: int
    R1_measured: Fraction
    R1_theory: Fraction
    R2_measured: Fraction
    R2_theory: Fraction
    r2_per_mirror: Dict[int, Fraction]
    mirrors: List[MirrorCount]
    decode_ok: Dict[User, bool]
    packets_server: int
    packets_mirrors: int
    packet_bytes: int
    failures: Dict[User, str] = field(default_factory=dict)

    @property
    def bytes_server(self) -> int:
        return self.packets_server * self.packet_bytes

    @property
    def bytes_mirrors(self) -> int:
        return self.packets_mirrors * self.packet_bytes

    @property
    def loads_match(self) -> bool:
        return (
            self.R1_measured == self.R1_theory
            and self.R2_measured == self.R2_theory
            and all(
                m.phase_a == m.theory_phase_a and m.phase_b == m.theory_phase_b for m in self.mirrors
            )
        )

    @property
    def ok(self) -> bool:
        return self.loads_match and all(self.decode_ok.values())

    def to_dict(self) -> Dict:
        return {
            "tau": [list(user) for user in self.tau],
            "demands": list(self.demands),
            "zeta": list(self.zeta),
            "strategy": self.strategy,
            "seed": self.seed,
            "Fprime": self.Fprime,
            "R1_measured": str(self.R1_measured),
            "R1_theory": str(self.R1_theory),
            "R2_measured": str(self.R2_measured),
            "R2_theory": str(self.R2_theory),
            "r2_per_mirror": {str(k1): str(load) for k1, load in sorted(self.r2_per_mirror.items())},
            "mirrors": [
                {
                    "k1": m.k1,
                    "phase_a": m.phase_a,
                    "phase_b": m.phase_b,
                    "theory_phase_a": m.theory_phase_a,
                    "theory_phase_b": m.theory_phase_b,
                }
                for m in self.mirrors
            ],
            "decode_ok": {format_user(user): ok for user, ok in self.decode_ok.items()},
            "failures": {format_user(user): reason for user, reason in self.failures.items()},
            "packets_server": self.packets_server,
            "packets_mirrors": self.packets_mirrors,
            "bytes_server": self.bytes_server,
            "bytes_mirrors": self.bytes_mirrors,
            "packet_bytes": self.packet_bytes,
            "loads_float": {
                "R1_measured": float(self.R1_measured),
                "R1_theory": float(self.R1_theory),
                "R2_measured": float(self.R2_measured),
                "R2_theory": float(self.R2_theory),
            },
        }


def report_from_model(model: SessionReportFile) -> SessionReport:
    return SessionReport(
        tau=tuple((user[0], user[1]) for user in model.tau),
        demands=tuple(model.demands),
        zeta=tuple(model.zeta),
        strategy=model.strategy,
        seed=model.seed,
        Fprime=model.Fprime,
        R1_measured=Fraction(model.R1_measured),
        R1_theory=Fraction(model.R1_theory),
        R2_measured=Fraction(model.R2_measured),
        R2_theory=Fraction(model.R2_theory),
        r2_per_mirror={int(k1): Fraction(load) for k1, load in model.r2_per_mirror.items()},
        mirrors=[MirrorCount(**m.model_dump()) for m in model.mirrors],
        decode_ok={parse_users(user)[0]: ok for user, ok in model.decode_ok.items()},
        failures={parse_users(user)[0]: reason for user, reason in model.failures.items()},
        packets_server=model.packets_server,
        packets_mirrors=model.packets_mirrors,
        packet_bytes=model.packet_bytes,
    )


def load_report(path: Union[str, Path]) -> SessionReport:
    return report_from_model(parse_json(path, SessionReportFile))


def run_session(
    pair: HhpdaPair,
    lib: Library,
    tau: Sequence[User],
    demands: Sequence[int],
    strategy: Union[Strategy, str] = Strategy.PREFER_MIRROR_STAR,
    seed: int = 0,
    caches: Optional[CacheState] = None,
    method: str = "auto",
) -> SessionReport:
    """Run one session end to end and compare every decoded file with the library."""
    session = open_session(pair, tau, demands, strategy, seed, n_files=lib.N, method=method)
    if caches is None:
        caches = place(pair, lib)
    server = server_transmissions(pair, session, caches)
    mirror_msgs = {
        k1: mirror_transmissions(pair, session, caches, k1, server) for k1 in range(1, pair.K1 + 1)
    }
    return session_report(pair, lib, session, caches, server, mirror_msgs)


def session_report(
    pair: HhpdaPair,
    lib: Library,
    session: SessionState,
    caches: CacheState,
    server: Sequence[Transmission],
    mirror_msgs: Dict[int, List[Transmission]],
) -> SessionReport:
    """Decode at every active user from the given messages and count them against the closed form."""
    theory = theoretical_loads(pair, session)

    decode_ok: Dict[User, bool] = {}
    failures: Dict[User, str] = {}
    for user in session.tau:
        try:
            data = user_decode(
                pair, session, user, caches.users[user], mirror_msgs[user[0]], caches.generator
            )
        except (ProtocolViolation, UndecodableError, CorruptionError) as exc:
            logger.warning("user %s failed to decode: %s", format_user(user), exc)
            decode_ok[user] = False
            failures[user] = str(exc)
            continue
        decode_ok[user] = data == lib.file(session.demand(user))
        if not decode_ok[user]:
            failures[user] = "decoded bytes differ from the library file"
            logger.warning("user %s decoded the wrong bytes", format_user(user))

    mirrors = []
    for k1, msgs in mirror_msgs.items():
        mirrors.append(
            MirrorCount(
                k1=k1,
                phase_a=sum(1 for msg in msgs if msg.phase == PHASE_FORWARD),
                phase_b=sum(1 for msg in msgs if msg.phase == PHASE_LOCAL),
                theory_phase_a=theory.phase_a[k1],
                theory_phase_b=theory.phase_b[k1],
            )
        )
    r2 = {m.k1: Fraction(m.phase_a + m.phase_b, pair.Fprime) for m in mirrors}
    report = SessionReport(
        tau=session.tau,
        demands=session.demands,
        zeta=session.zeta,
        strategy=session.strategy.value,
        seed=session.seed,
        Fprime=pair.Fprime,
        R1_measured=Fraction(len(server), pair.Fprime),
        R1_theory=theory.R1,
        R2_measured=max(r2.values(), default=Fraction(0)),
        R2_theory=theory.R2,
        r2_per_mirror=r2,
        mirrors=mirrors,
        decode_ok=decode_ok,
        failures=failures,
        packets_server=len(server),
        packets_mirrors=sum(len(msgs) for msgs in mirror_msgs.values()),
        packet_bytes=caches.packet_bytes,
    )
    if not report.loads_match:
        logger.error("measured loads differ from the label-union counts for %s", list(session.tau))
    logger.info(
        "session %s demands %s: R1=%s R2=%s decoded %d/%d",
        "".join(format_user(u) for u in session.tau),
        list(session.demands),
        report.R1_measured,
        report.R2_measured,
        sum(decode_ok.values()),
        len(decode_ok),
    )
    return report


def resolve_threads(value: Optional[str] = None) -> int:
    """Worker count from HOTCACHE_THREADS (or ``value``); bad values mean sequential."""
    raw = os.environ.get(THREADS_ENV) if value is None else value
    if raw is None or raw.strip() == "":
        return min(4, os.cpu_count() or 1)
    try:
        threads = int(raw)
    except ValueError:
        threads = 0
    if threads < 1:
        logger.warning("%s=%r is not a positive integer; running sequentially", THREADS_ENV, raw)
        return 1
    return threads


def active_sets(pair: HhpdaPair) -> List[Tuple[User, ...]]:
    return list(combinations(pair.users(), pair.Kprime))


@dataclass(frozen=True)
class SweepTask:
    rank: int
    index: int
    tau: Tuple[User, ...]
    demands: Tuple[int, ...]
    seed: int


def plan_sweep(
    pair: HhpdaPair,
    n_files: int,
    taus: Union[str, int] = "all",
    policy: str = "random",
    seed: int = 0,
    per_tau: int = 1,
    fixed_demands: Optional[Sequence[int]] = None,
) -> List[SweepTask]:
    """Rows in replay order: active sets lexicographically, then demand index.

    Each row's seed is ``seed ^ rank(tau)``, so a row can be rerun alone.
    """
    everything = active_sets(pair)
    ranks = list(range(len(everything)))
    if taus != "all":
        count = int(taus)
        if count < 0:
            raise ParameterError(f"sample size must be non-negative, got {count}")
        ranks = sorted(random.Random(seed).sample(ranks, min(count, len(ranks))))
    if per_tau < 1:
        raise ParameterError(f"need at least one demand vector per active set, got {per_tau}")
    if policy == "fixed":
        fixed = tuple(fixed_demands) if fixed_demands is not None else (1,) * pair.Kprime
        if len(fixed) != pair.Kprime or any(not 1 <= n <= n_files for n in fixed):
            raise ParameterError(f"fixed demands {list(fixed)} must be {pair.Kprime} ids in 1..{n_files}")
    elif policy != "random":
        raise ParameterError(f"unknown demand policy {policy!r}")

    tasks = []
    for rank in ranks:
        session_seed = seed ^ rank
        for index in range(per_tau):
            if policy == "fixed":
                demands = fixed
            else:
                rng = random.Random(session_seed * 1009 + index)
                demands = tuple(rng.randint(1, n_files) for _ in range(pair.Kprime))
            tasks.append(SweepTask(rank, index, everything[rank], demands, session_seed))
    return tasks


def run_tasks(
    pair: HhpdaPair,
    lib: Library,
    tasks: Sequence[SweepTask],
    strategy: Union[Strategy, str] = Strategy.PREFER_MIRROR_STAR,
    threads: Optional[int] = None,
    progress: Optional[bool] = None,
    method: str = "auto",
) -> List[SessionReport]:
    if not tasks:
        return []
    strategy = Strategy(strategy)
    caches = place(pair, lib)
    workers = resolve_threads() if threads is None else max(1, threads)
    if progress is None:
        progress = sys.stderr.isatty()

    def one(task: SweepTask) -> SessionReport:
        return run_session(pair, lib, task.tau, task.demands, strategy, task.seed, caches=caches, method=method)

    reports: List[SessionReport] = []
    with tqdm(total=len(tasks), desc="sessions", unit="session", disable=not progress) as bar:
        if workers == 1:
            for task in tasks:
                reports.append(one(task))
                bar.update()
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for report in pool.map(one, tasks):
                    reports.append(report)
                    bar.update()
    logger.info(
        "swept %d sessions with %d worker(s): %d fully decoded",
        len(reports),
        workers,
        sum(1 for report in reports if report.ok),
    )
    return reports


def sweep(
    pair: HhpdaPair,
    lib: Library,
    taus: Union[str, int] = "all",
    policy: str = "random",
    strategy: Union[Strategy, str] = Strategy.PREFER_MIRROR_STAR,
    seed: int = 0,
    per_tau: int = 1,
    fixed_demands: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
    progress: Optional[bool] = None,
) -> List[SessionReport]:
    tasks = plan_sweep(pair, lib.N, taus, policy, seed, per_tau, fixed_demands)
    return run_tasks(pair, lib, tasks, strategy, threads, progress)
