"""Hierarchical hotplug PDA pairs: construction from t-designs, verification, projection and row selection."""

import logging
import random
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .designs import (
    TDesign,
    design_from_model,
    design_to_dict,
    format_block,
    lambda_s,
    lambda_st,
    verify_design,
)
from .errors import ConsistencyError, InfeasibleError, ParameterError
from .pda import (
    STAR,
    Cell,
    Grid,
    PdaArray,
    check_label_cells,
    b_array_params,
    b_row_index,
    build_b_array,
    find_row_assignment,
    is_label,
    star_set,
    to_grid,
    verify_pda,
)
from .schema import PairFile, dump_json, parse_json
from .verdict import Verdict

logger = logging.getLogger(__name__)

User = Tuple[int, int]

DATA_DIR = Path(__file__).resolve().parent / "data"
EXAMPLE_PAIR_PATH = DATA_DIR / "example1_pair.json"


class Strategy(str, Enum):
    PREFER_MIRROR_STAR = "prefer-mirror-star"
    AVOID_MIRROR_STAR = "avoid-mirror-star"
    FIRST_FIT = "first-fit"


@dataclass(frozen=True)
class PairProvenance:
    design_id: str
    design: TDesign
    K2: int
    a: Tuple[int, ...]
    mirror_groups: Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class HhpdaPair:
    """The array pair (Q, B); Q0 is F x K1, Qsub holds one F x K2 grid per mirror."""

    K1: int
    K2: int
    Kprime: int
    F: int
    Fprime: int
    Z1: int
    Z2: int
    Zprime: int
    Q0: Grid
    Qsub: Tuple[Grid, ...]
    B: PdaArray
    S: Tuple[int, ...]
    S_k: Tuple[Tuple[int, ...], ...]
    provenance: Optional[PairProvenance] = None

    def users(self) -> List[User]:
        return [(k1, k2) for k1 in range(1, self.K1 + 1) for k2 in range(1, self.K2 + 1)]

    def user_point(self, user: User) -> int:
        k1, k2 = user
        return (k1 - 1) * self.K2 + k2

    def header(self) -> str:
        return (
            f"({self.K1},{self.K2},{self.Kprime};{self.F},{self.Fprime};"
            f"{self.Z1},{self.Z2},{self.Zprime}) |S|={len(self.S)} "
            f"|S_k|={[len(labels) for labels in self.S_k]}"
        )


@dataclass(frozen=True)
class ParamRecord:
    K1: int
    K2: int
    Kprime: int
    F: int
    Fprime: int
    Z1: int
    Z2: int
    Zprime: int
    S_size: int
    S_k_size: int
    M1_over_N: Fraction
    M2_over_N: Fraction
    R1: Fraction

    def as_dict(self) -> Dict[str, Union[int, str]]:
        return {
            "K1": self.K1,
            "K2": self.K2,
            "Kprime": self.Kprime,
            "F": self.F,
            "Fprime": self.Fprime,
            "Z1": self.Z1,
            "Z2": self.Z2,
            "Zprime": self.Zprime,
            "S": self.S_size,
            "S_k1": self.S_k_size,
            "M1/N": str(self.M1_over_N),
            "M2/N": str(self.M2_over_N),
            "R1": str(self.R1),
        }


def mirror_groups(v: int, K2: int) -> List[Tuple[int, ...]]:
    return [tuple(range((k1 - 1) * K2 + 1, k1 * K2 + 1)) for k1 in range(1, v // K2 + 1)]


def _check_construction(d: TDesign, K2: int, a: Sequence[int]) -> None:
    verdict = verify_design(d, forbid_repeats=True)
    if not verdict.ok:
        raise ParameterError(f"design is not a non-repeated {d.label()} design: {verdict.violations[0]}")
    if K2 < 1:
        raise ParameterError(f"K2 must be positive, got {K2}")
    if K2 == d.t:
        raise ParameterError(f"K2={K2} equals t; the construction needs K2 < t")
    if K2 > d.t:
        raise ParameterError(f"K2={K2} must be smaller than t={d.t}")
    if d.v % K2:
        raise ParameterError(f"K2={K2} must divide v={d.v}")
    if len(a) != d.t - 1:
        raise ParameterError(f"need {d.t - 1} multiplicities a_1..a_{d.t - 1}, got {len(a)}")
    for s, a_s in enumerate(a, start=1):
        bound = lambda_st(d, s)
        if not 0 <= a_s <= bound:
            raise ParameterError(f"a_{s}={a_s} must lie in 0..{bound} (blocks through {s} of t points avoiding the rest)")
    fprime = sum(a_s * comb(d.t, s) for s, a_s in enumerate(a, start=1))
    lam1 = lambda_s(d, 1)
    if fprime <= lam1:
        raise ParameterError(f"sum a_s*C(t,s) = {fprime} must exceed lambda_1 = {lam1}")


def build_from_design(d: TDesign, K2: int, a: Sequence[int], design_id: str = "custom") -> HhpdaPair:
    """Build (Q, B) from a t-design: rows are blocks, mirror k1 owns the points D_k1."""
    a = tuple(a)
    _check_construction(d, K2, a)
    K1 = d.v // K2
    groups = mirror_groups(d.v, K2)
    blocks = d.block_sets()

    q0 = [[STAR if set(group) <= block else None for group in groups] for block in blocks]

    b_arr = build_b_array(d.t, a)
    server_labels = b_arr.labels()
    next_label = max(server_labels) + 1

    qsub: List[Grid] = []
    s_k: List[Tuple[int, ...]] = []
    for k1, group in enumerate(groups):
        numbering: Dict[FrozenSet[int], int] = {}
        grid: List[List[Cell]] = []
        for f, block in enumerate(blocks):
            row: List[Cell] = []
            for point in group:
                if point not in block:
                    row.append(None)
                elif q0[f][k1] != STAR:
                    row.append(STAR)
                else:
                    key = block - {point}
                    if key not in numbering:
                        numbering[key] = next_label
                        next_label += 1
                    row.append(numbering[key])
            grid.append(row)
        qsub.append(to_grid(grid))
        s_k.append(tuple(sorted(numbering.values())))

    pair = HhpdaPair(
        K1=K1,
        K2=K2,
        Kprime=d.t,
        F=d.b,
        Fprime=b_arr.rows,
        Z1=_column_stars(q0, 0),
        Z2=_column_stars(qsub[0], 0),
        Zprime=b_arr.star_counts()[0],
        Q0=to_grid(q0),
        Qsub=tuple(qsub),
        B=b_arr,
        S=tuple(server_labels),
        S_k=tuple(s_k),
        provenance=PairProvenance(design_id, d, K2, a, tuple(groups)),
    )
    logger.info("built HHPDA %s from %s design %s", pair.header(), d.label(), design_id)
    return pair


def _column_stars(grid: Sequence[Sequence[Cell]], j: int) -> int:
    return sum(1 for row in grid if row[j] == STAR)


def construction_params(d: TDesign, K2: int, a: Sequence[int]) -> ParamRecord:
    """Closed-form parameters of the design construction, checked against the built arrays."""
    _check_construction(d, K2, a)
    lam_k2 = lambda_s(d, K2)
    closed = b_array_params(d.t, a)
    record = ParamRecord(
        K1=d.v // K2,
        K2=K2,
        Kprime=d.t,
        F=d.b,
        Fprime=closed["Fprime"],
        Z1=lam_k2,
        Z2=lambda_s(d, 1) - lam_k2,
        Zprime=closed["Zprime"],
        S_size=closed["S"],
        S_k_size=lam_k2 * K2,
        M1_over_N=Fraction(lam_k2, closed["Fprime"]),
        M2_over_N=Fraction(lambda_s(d, 1) - lam_k2, closed["Fprime"]),
        R1=Fraction(closed["S"], closed["Fprime"]),
    )
    measured = measured_params(build_from_design(d, K2, a))
    for name in ("K1", "K2", "Kprime", "F", "Fprime", "Z1", "Z2", "Zprime", "S_size"):
        if getattr(record, name) != getattr(measured, name):
            raise ConsistencyError(
                f"{name}: closed form {getattr(record, name)} != measured {getattr(measured, name)}"
            )
    if measured.S_k_size != record.S_k_size:
        raise ConsistencyError(f"|S_k1|: closed form {record.S_k_size} != measured {measured.S_k_size}")
    return record


def measured_params(pair: HhpdaPair) -> ParamRecord:
    """Parameters counted on the arrays themselves."""
    sizes = {len(labels) for labels in pair.S_k}
    z1 = {_column_stars(pair.Q0, j) for j in range(pair.K1)}
    z2 = {_column_stars(grid, j) for grid in pair.Qsub for j in range(pair.K2)}
    zp = set(pair.B.star_counts())
    if len(sizes) != 1 or len(z1) != 1 or len(z2) != 1 or len(zp) != 1:
        raise ConsistencyError("column star counts or |S_k1| differ across columns/mirrors")
    (s_k,), (z1v,), (z2v,), (zpv,) = sizes, z1, z2, zp
    labels = pair.B.labels()
    return ParamRecord(
        K1=pair.K1,
        K2=pair.K2,
        Kprime=pair.B.cols,
        F=len(pair.Q0),
        Fprime=pair.B.rows,
        Z1=z1v,
        Z2=z2v,
        Zprime=zpv,
        S_size=len(labels),
        S_k_size=s_k,
        M1_over_N=Fraction(z1v, pair.B.rows),
        M2_over_N=Fraction(z2v, pair.B.rows),
        R1=Fraction(len(labels), pair.B.rows),
    )


def normalize_tau(pair: HhpdaPair, tau: Sequence[User]) -> List[User]:
    """Sort an active set lexicographically; this order is the bijection phi."""
    users = [tuple(int(x) for x in user) for user in tau]
    for k1, k2 in users:
        if not (1 <= k1 <= pair.K1 and 1 <= k2 <= pair.K2):
            raise ParameterError(f"user ({k1},{k2}) outside [1..{pair.K1}] x [1..{pair.K2}]")
    if len(set(users)) != len(users):
        raise ParameterError(f"active set {users} repeats a user")
    return sorted(users)


def projected_cell(pair: HhpdaPair, f: int, user: User) -> Cell:
    k1, k2 = user
    if pair.Q0[f][k1 - 1] == STAR or pair.Qsub[k1 - 1][f][k2 - 1] == STAR:
        return STAR
    return None


def project_subarray(pair: HhpdaPair, zeta: Sequence[int], tau: Sequence[User]) -> Grid:
    """Rows zeta (1-based) and users tau of Q': star iff the mirror or the user caches the packet."""
    users = normalize_tau(pair, tau)
    for f in zeta:
        if not 1 <= f <= pair.F:
            raise ParameterError(f"row {f} outside 1..{pair.F}")
    return to_grid([[projected_cell(pair, f - 1, user) for user in users] for f in zeta])


def projection_array(pair: HhpdaPair) -> Grid:
    """The F x K1*K2 star/null array over all users (columns in lexicographic user order)."""
    return project_subarray(pair, range(1, pair.F + 1), pair.users())


def _mirror_star_count(pair: HhpdaPair, f: int, users: Sequence[User], columns: FrozenSet[int]) -> int:
    return sum(1 for j in columns if pair.Q0[f][users[j][0] - 1] == STAR)


def _rank_key(strategy: Strategy, mirror_stars: int) -> int:
    if strategy is Strategy.PREFER_MIRROR_STAR:
        return -mirror_stars
    if strategy is Strategy.AVOID_MIRROR_STAR:
        return mirror_stars
    return 0


def find_zeta(
    pair: HhpdaPair,
    tau: Sequence[User],
    strategy: Union[Strategy, str] = Strategy.PREFER_MIRROR_STAR,
    method: str = "auto",
) -> List[int]:
    """Choose F' rows (1-based, one per row of B) whose projection on tau star-matches B.

    ``method`` is "design" (count candidate blocks directly), "generic"
    (bipartite matching on the projection) or "auto" (design when the pair
    carries its design).
    """
    strategy = Strategy(strategy)
    users = normalize_tau(pair, tau)
    if len(users) != pair.Kprime:
        raise ParameterError(f"active set has {len(users)} users, K'={pair.Kprime}")
    if method == "auto" and pair.provenance is not None:
        try:
            zeta = _find_zeta_design(pair, users, strategy)
        except InfeasibleError:
            zeta = None
        if zeta is not None and check_zeta(pair, zeta, users).ok:
            return zeta
        logger.warning("recorded design does not fit the arrays for %s; using the matcher", users)
    elif method == "design":
        if pair.provenance is None:
            raise ParameterError("design method needs a design-backed pair")
        return _find_zeta_design(pair, users, strategy)
    elif method not in ("auto", "generic"):
        raise ParameterError(f"unknown method {method!r}")

    host = [[projected_cell(pair, f, user) for user in users] for f in range(pair.F)]
    b_stars = [star_set(row) for row in pair.B.grid]

    def preference(r: int, f: int) -> int:
        return _rank_key(strategy, _mirror_star_count(pair, f - 1, users, b_stars[r]))

    zeta = find_row_assignment(host, pair.B, host_rows=range(1, pair.F + 1), preference=preference)
    if zeta is None:
        raise InfeasibleError(f"no rows star-match B for active set {users}")
    return zeta


def _find_zeta_design(pair: HhpdaPair, users: List[User], strategy: Strategy) -> List[int]:
    prov = pair.provenance
    d = prov.design
    blocks = d.block_sets()
    points = [pair.user_point(user) for user in users]
    rows = b_row_index(d.t, prov.a)

    chosen: Dict[FrozenSet[int], List[int]] = {}
    for y in dict.fromkeys(y for y, _ in rows):
        inside = {points[j - 1] for j in y}
        outside = {points[j - 1] for j in range(1, d.t + 1) if j not in y}
        candidates = [f for f, block in enumerate(blocks) if inside <= block and not outside & block]
        expected = lambda_st(d, len(y))
        if len(candidates) != expected:
            raise InfeasibleError(
                f"Y={sorted(y)} has {len(candidates)} candidate blocks, expected {expected}"
            )
        columns = frozenset(j - 1 for j in y)
        ranked = sorted(
            candidates,
            key=lambda f: (_rank_key(strategy, _mirror_star_count(pair, f, users, columns)), f),
        )
        need = sum(1 for key, _ in rows if key == y)
        if need > len(ranked):
            raise InfeasibleError(f"Y={sorted(y)} needs {need} blocks, only {len(ranked)} qualify")
        chosen[y] = sorted(f + 1 for f in ranked[:need])

    zeta = []
    for y, i in rows:
        zeta.append(chosen[y][i - 1])
    logger.debug(
        "zeta for %s (%s): %s via blocks %s",
        users,
        strategy.value,
        zeta,
        [format_block(d.blocks[f - 1]) for f in zeta],
    )
    return zeta


def fill_qbar(pair: HhpdaPair, zeta: Sequence[int], tau: Sequence[User]) -> Grid:
    """Fill the nulls of the projection with B's labels; the result equals B."""
    projection = project_subarray(pair, zeta, tau)
    if len(projection) != pair.B.rows:
        raise ConsistencyError(f"zeta has {len(projection)} rows, B has {pair.B.rows}")
    filled = []
    for r, (row, b_row) in enumerate(zip(projection, pair.B.grid)):
        if star_set(row) != star_set(b_row):
            raise ConsistencyError(
                f"row {zeta[r]} stars {sorted(j + 1 for j in star_set(row))} "
                f"!= B row {r + 1} stars {sorted(j + 1 for j in star_set(b_row))}"
            )
        filled.append([cell if cell == STAR else b_cell for cell, b_cell in zip(row, b_row)])
    return to_grid(filled)


def _all_taus(pair: HhpdaPair) -> List[Tuple[User, ...]]:
    return list(combinations(pair.users(), pair.Kprime))


def _star_rows(grid: Grid) -> List[FrozenSet[int]]:
    return [star_set(row) for row in grid]


def _check_provenance(pair: HhpdaPair) -> Verdict:
    """Rebuild the pair from its recorded design and compare star patterns and B."""
    verdict = Verdict()
    prov = pair.provenance
    try:
        rebuilt = build_from_design(prov.design, prov.K2, prov.a, design_id=prov.design_id)
    except ParameterError as exc:
        verdict.add("provenance", f"recorded design does not build: {exc}")
        return verdict
    if tuple(prov.mirror_groups) != rebuilt.provenance.mirror_groups:
        verdict.add("provenance", "mirror groups differ from the design's", "mirror_groups")
    if (rebuilt.F, rebuilt.K1, rebuilt.K2) != (pair.F, pair.K1, pair.K2):
        verdict.add(
            "provenance",
            f"design gives F={rebuilt.F}, K1={rebuilt.K1}, K2={rebuilt.K2}",
            "params",
        )
        return verdict

    arrays = [("Q0", pair.Q0, rebuilt.Q0)]
    arrays.extend(
        (f"Q{k1}", pair.Qsub[k1 - 1], rebuilt.Qsub[k1 - 1]) for k1 in range(1, pair.K1 + 1)
    )
    for name, grid, expected in arrays:
        for f, (got, want) in enumerate(zip(_star_rows(grid), _star_rows(expected)), start=1):
            if got != want:
                verdict.add("provenance", f"row {f} does not match block {f} of the recorded design", name)
                break
    if pair.B.grid != rebuilt.B.grid:
        verdict.add("provenance", f"B differs from the inner array for a={list(prov.a)}", "B")
    return verdict


def verify_hhpda(pair: HhpdaPair, sample: Optional[int] = None, seed: int = 0) -> Verdict:
    """Check every HHPDA clause; the active-set scan is exhaustive unless ``sample`` is given."""
    verdict = Verdict(params={"header": pair.header()})
    if not pair.Z1 + pair.Z2 < pair.Fprime <= pair.F:
        verdict.add("bounds", f"need Z1+Z2 < F' <= F, got Z1={pair.Z1}, Z2={pair.Z2}, F'={pair.Fprime}, F={pair.F}")
    if pair.Kprime > pair.K1 * pair.K2:
        verdict.add("bounds", f"K'={pair.Kprime} exceeds K1*K2={pair.K1 * pair.K2}")
    if len(pair.Q0) != pair.F or len(pair.Qsub) != pair.K1 or len(pair.S_k) != pair.K1:
        verdict.add("shape", "Q0, Qsub or S_k do not match F and K1")
    if pair.B.rows != pair.Fprime or pair.B.cols != pair.Kprime:
        verdict.add("shape", f"B is {pair.B.rows}x{pair.B.cols}, expected {pair.Fprime}x{pair.Kprime}")
    if not verdict.ok:
        return verdict

    server = set(pair.S)
    owner: Dict[int, int] = {}
    for k1, labels in enumerate(pair.S_k, start=1):
        for label in labels:
            if label in server:
                verdict.add("labels", "label declared in both S and S_k", f"label {label}, mirror {k1}")
            if label in owner:
                verdict.add("labels", f"label also declared for mirror {owner[label]}", f"label {label}, mirror {k1}")
            owner.setdefault(label, k1)

    for j in range(pair.K1):
        count = _column_stars(pair.Q0, j)
        if count != pair.Z1:
            verdict.add("A1", f"{count} stars, expected Z1={pair.Z1}", f"Q0 column {j + 1}")
        for f, row in enumerate(pair.Q0):
            if row[j] not in (STAR, None):
                verdict.add("A1", f"Q0 holds {row[j]!r}; only star or null allowed", f"Q0 ({f + 1},{j + 1})")

    for k1, grid in enumerate(pair.Qsub, start=1):
        declared = set(pair.S_k[k1 - 1])
        present = set()
        for j in range(pair.K2):
            count = _column_stars(grid, j)
            if count != pair.Z2:
                verdict.add("A2", f"{count} stars, expected Z2={pair.Z2}", f"Q{k1} column {j + 1}")
        positions: Dict[int, List[Tuple[int, int]]] = {}
        for f, row in enumerate(grid):
            for j, cell in enumerate(row):
                where = f"Q{k1} ({f + 1},{j + 1})"
                if is_label(cell):
                    present.add(cell)
                    positions.setdefault(cell, []).append((f, j))
                    if cell not in declared:
                        other = owner.get(cell)
                        detail = f"declared for mirror {other}" if other else "undeclared"
                        verdict.add("A3", f"label {cell} is {detail}", where)
                elif cell not in (STAR, None):
                    verdict.add("A3", f"unexpected cell {cell!r}", where)
                if pair.Q0[f][k1 - 1] == STAR and not (cell == STAR or cell in declared):
                    verdict.add("A3", f"mirror caches row {f + 1} but cell is {cell!r}", where)
        for label in sorted(declared - present):
            verdict.add("A3", f"declared label {label} never occurs", f"Q{k1}")
        for label, cells in sorted(positions.items()):
            verdict.extend(check_label_cells(grid, label, cells, "A4"), prefix=f"Q{k1}")

    inner = verify_pda(pair.B, claimed_labels=pair.S)
    verdict.extend(inner, prefix="B")
    if inner.params.get("Z") != pair.Zprime:
        verdict.add("B", f"B has {inner.params.get('Z')} stars per column, Z'={pair.Zprime}")

    if pair.provenance is not None:
        verdict.extend(_check_provenance(pair))
        counts: Dict[int, int] = {}
        for grid in pair.Qsub:
            for row in grid:
                for cell in row:
                    if is_label(cell):
                        counts[cell] = counts.get(cell, 0) + 1
        for label, count in sorted(counts.items()):
            if count != 1:
                verdict.add("label-unique", f"occurs {count} times in Q", f"label {label}")
    if not verdict.ok:
        return verdict

    taus = _all_taus(pair)
    if sample is not None:
        rng = random.Random(seed)
        taus = sorted(rng.sample(taus, min(sample, len(taus))))
    for tau in taus:
        host = [[projected_cell(pair, f, user) for user in tau] for f in range(pair.F)]
        if find_row_assignment(host, pair.B) is None:
            verdict.add("Eq1", "no rows star-match B", f"tau={list(tau)}")
    verdict.params.update(
        {
            "K1": pair.K1,
            "K2": pair.K2,
            "Kprime": pair.Kprime,
            "F": pair.F,
            "Fprime": pair.Fprime,
            "Z1": pair.Z1,
            "Z2": pair.Z2,
            "Zprime": pair.Zprime,
            "S": len(pair.S),
            "S_k": [len(labels) for labels in pair.S_k],
            "tau_scanned": len(taus),
            "coverage": "exhaustive" if sample is None else f"sample({sample}, seed={seed})",
        }
    )
    logger.info("verified %s over %d active sets: %s", pair.header(), len(taus), "ok" if verdict.ok else "FAILED")
    return verdict


def check_zeta(pair: HhpdaPair, zeta: Sequence[int], tau: Sequence[User]) -> Verdict:
    """Does the given zeta make the projection on tau star-match B row by row?"""
    verdict = Verdict()
    if len(zeta) != pair.Fprime or len(set(zeta)) != len(zeta):
        verdict.add("zeta", f"zeta must list {pair.Fprime} distinct rows")
        return verdict
    projection = project_subarray(pair, zeta, tau)
    for r, (row, b_row) in enumerate(zip(projection, pair.B.grid), start=1):
        if star_set(row) != star_set(b_row):
            verdict.add("Eq1", "stars differ from B", f"B row {r} / Q row {zeta[r - 1]}")
    return verdict


def drop_mirror_layer(pair: HhpdaPair) -> Tuple[Grid, PdaArray]:
    """With Z1 = 0 the user arrays alone form an HpPDA (P, B)."""
    if any(cell == STAR for row in pair.Q0 for cell in row):
        raise ParameterError(f"mirror layer caches packets (Z1={pair.Z1}); cannot drop it")
    p = [
        [STAR if pair.Qsub[k1 - 1][f][k2 - 1] == STAR else None for k1, k2 in pair.users()]
        for f in range(pair.F)
    ]
    return to_grid(p), pair.B


def pair_to_dict(pair: HhpdaPair) -> Dict:
    prov = None
    if pair.provenance is not None:
        p = pair.provenance
        prov = {
            "design_id": p.design_id,
            "design": design_to_dict(p.design),
            "K2": p.K2,
            "a": list(p.a),
            "mirror_groups": [list(group) for group in p.mirror_groups],
        }
    return {
        "params": {
            "K1": pair.K1,
            "K2": pair.K2,
            "Kprime": pair.Kprime,
            "F": pair.F,
            "Fprime": pair.Fprime,
            "Z1": pair.Z1,
            "Z2": pair.Z2,
            "Zprime": pair.Zprime,
        },
        "Q0": [list(row) for row in pair.Q0],
        "Q": [[list(row) for row in grid] for grid in pair.Qsub],
        "B": pair.B.to_list(),
        "S": list(pair.S),
        "S_k": [list(labels) for labels in pair.S_k],
        "provenance": prov,
    }


def pair_from_model(model: PairFile) -> HhpdaPair:
    p = model.params
    prov = None
    if model.provenance is not None:
        m = model.provenance
        prov = PairProvenance(
            design_id=m.design_id,
            design=design_from_model(m.design),
            K2=m.K2,
            a=tuple(m.a),
            mirror_groups=tuple(tuple(group) for group in m.mirror_groups),
        )
    return HhpdaPair(
        K1=p.K1,
        K2=p.K2,
        Kprime=p.Kprime,
        F=p.F,
        Fprime=p.Fprime,
        Z1=p.Z1,
        Z2=p.Z2,
        Zprime=p.Zprime,
        Q0=to_grid(model.Q0),
        Qsub=tuple(to_grid(grid) for grid in model.Q),
        B=PdaArray(to_grid(model.B)),
        S=tuple(model.S),
        S_k=tuple(tuple(labels) for labels in model.S_k),
        provenance=prov,
    )


_SCALAR_LIST = re.compile(r"\[([^\[\]{}]*)\]")


def _collapse(match: "re.Match[str]") -> str:
    items = [item.strip() for item in match.group(1).split(",") if item.strip()]
    return "[" + ", ".join(items) + "]"


def pair_json(pair: HhpdaPair) -> str:
    """Canonical pair text: one array row per line."""
    return _SCALAR_LIST.sub(_collapse, dump_json(pair_to_dict(pair)))


def load_pair(path: Union[str, Path]) -> HhpdaPair:
    return pair_from_model(parse_json(path, PairFile))


def store_pair(pair: HhpdaPair, path: Union[str, Path]) -> None:
    Path(path).write_text(pair_json(pair), encoding="utf-8")
    logger.info("stored HHPDA %s to %s", pair.header(), path)


def example_pair() -> HhpdaPair:
    """The bundled example pair (4,2,3; 14,9; 3,4,5)."""
    return load_pair(EXAMPLE_PAIR_PATH)


_USER = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_users(text: str) -> List[User]:
    """Parse an active set written as "(1,1),(2,2),(3,1)"."""
    found = _USER.findall(text)
    leftover = _USER.sub("", text).replace(",", "").strip()
    if not found or leftover:
        raise ParameterError(f"cannot parse active set {text!r}; expected (k1,k2) pairs")
    return [(int(k1), int(k2)) for k1, k2 in found]


def format_user(user: User) -> str:
    return f"({user[0]},{user[1]})"
