"""Star/null/label arrays, the PDA and HpPDA verifiers, the inner array B and the row matcher."""

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .errors import ParameterError
from .schema import ArrayFile, dump_json, parse_json
from .verdict import Verdict

logger = logging.getLogger(__name__)

STAR = "*"

Cell = Union[str, None, int]
Grid = Tuple[Tuple[Cell, ...], ...]


def is_label(cell: Cell) -> bool:
    return isinstance(cell, int) and not isinstance(cell, bool)


def to_grid(rows: Sequence[Sequence[Cell]]) -> Grid:
    return tuple(tuple(row) for row in rows)


def star_set(row: Sequence[Cell]) -> FrozenSet[int]:
    return frozenset(j for j, cell in enumerate(row) if cell == STAR)


@dataclass(frozen=True)
class PdaArray:
    grid: Grid

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    def column(self, j: int) -> Tuple[Cell, ...]:
        return tuple(row[j] for row in self.grid)

    def star_counts(self) -> List[int]:
        return [sum(1 for cell in self.column(j) if cell == STAR) for j in range(self.cols)]

    def labels(self) -> List[int]:
        return sorted({cell for row in self.grid for cell in row if is_label(cell)})

    def column_labels(self, j: int) -> List[int]:
        return sorted({cell for cell in self.column(j) if is_label(cell)})

    def star_pattern(self) -> Grid:
        return tuple(tuple(STAR if cell == STAR else None for cell in row) for row in self.grid)

    def to_list(self) -> List[List[Cell]]:
        return [list(row) for row in self.grid]


def verify_pda(arr: PdaArray, claimed_labels: Optional[Sequence[int]] = None) -> Verdict:
    """Check C1 (equal star count per column), C2 (every label used) and C3."""
    verdict = Verdict()
    counts = arr.star_counts()
    labels = arr.labels()
    verdict.params.update(
        {"K": arr.cols, "F": arr.rows, "Z": counts[0] if counts else 0, "S": len(labels)}
    )

    for i, row in enumerate(arr.grid, start=1):
        for j, cell in enumerate(row, start=1):
            if not (cell == STAR or cell is None or is_label(cell)):
                verdict.add("cell", f"unexpected cell value {cell!r}", f"({i},{j})")
            elif is_label(cell) and cell < 1:
                verdict.add("cell", f"label {cell} is not positive", f"({i},{j})")

    if len(set(counts)) > 1:
        for j, count in enumerate(counts, start=1):
            if count != counts[0]:
                verdict.add("C1", f"column has {count} stars, column 1 has {counts[0]}", f"column {j}")

    if claimed_labels is not None:
        missing = sorted(set(claimed_labels) - set(labels))
        for label in missing:
            verdict.add("C2", f"label {label} never occurs", f"label {label}")
        extra = sorted(set(labels) - set(claimed_labels))
        for label in extra:
            verdict.add("C2", f"label {label} occurs but is not declared", f"label {label}")

    positions: Dict[int, List[Tuple[int, int]]] = {}
    for i, row in enumerate(arr.grid):
        for j, cell in enumerate(row):
            if is_label(cell):
                positions.setdefault(cell, []).append((i, j))
    for label, cells in sorted(positions.items()):
        verdict.extend(check_label_cells(arr.grid, label, cells, "C3"))
    return verdict


def check_label_cells(grid: Grid, label: int, cells: List[Tuple[int, int]], code: str) -> Verdict:
    """Equal labels must sit in distinct rows and columns with stars at the crossings."""
    verdict = Verdict()
    for (i, j), (i2, j2) in combinations(cells, 2):
        where = f"label {label} at ({i + 1},{j + 1}) and ({i2 + 1},{j2 + 1})"
        if i == i2 or j == j2:
            verdict.add(code, "equal labels share a row or column", where)
        elif grid[i][j2] != STAR or grid[i2][j] != STAR:
            verdict.add(code, "cross positions are not both stars", where)
    return verdict


BRow = Tuple[FrozenSet[int], int]


def b_row_index(t: int, a: Sequence[int]) -> List[BRow]:
    """Rows (Y, i) of B: s descending, then i ascending, then Y lexicographic."""
    if len(a) != t - 1:
        raise ParameterError(f"need {t - 1} multiplicities a_1..a_{t - 1}, got {len(a)}")
    if any(x < 0 for x in a):
        raise ParameterError(f"multiplicities must be non-negative, got {list(a)}")
    if sum(x * comb(t, s) for s, x in enumerate(a, start=1)) < 1:
        raise ParameterError("all multiplicities are zero; B would be empty")
    rows: List[BRow] = []
    for s in range(t - 1, 0, -1):
        for i in range(1, a[s - 1] + 1):
            for y in combinations(range(1, t + 1), s):
                rows.append((frozenset(y), i))
    return rows


def _set_label_order(key: BRow) -> Tuple:
    y, i = key
    return (-len(y), tuple(sorted(y)), i)


def build_b_array(t: int, a: Sequence[int]) -> PdaArray:
    """Inner array of the t-scheme: star where j in Y, else label (Y + {j}, i)."""
    rows = b_row_index(t, a)
    raw: List[List[object]] = []
    set_labels = set()
    for y, i in rows:
        row: List[object] = []
        for j in range(1, t + 1):
            if j in y:
                row.append(STAR)
            else:
                key = (y | {j}, i)
                set_labels.add(key)
                row.append(key)
        raw.append(row)
    numbering = {key: n for n, key in enumerate(sorted(set_labels, key=_set_label_order), start=1)}
    grid = to_grid([[cell if cell == STAR else numbering[cell] for cell in row] for row in raw])
    logger.debug("built B for t=%d a=%s: %dx%d with %d labels", t, list(a), len(grid), t, len(numbering))
    return PdaArray(grid)


def b_array_params(t: int, a: Sequence[int]) -> Dict[str, int]:
    return {
        "Kprime": t,
        "Fprime": sum(x * comb(t, s) for s, x in enumerate(a, start=1)),
        "Zprime": sum(x * comb(t - 1, s - 1) for s, x in enumerate(a, start=1)),
        "S": sum(x * comb(t, s + 1) for s, x in enumerate(a, start=1)),
    }


RowOrder = Callable[[int, int], Tuple]


def find_row_assignment(
    host: Sequence[Sequence[Cell]],
    pattern: PdaArray,
    host_rows: Optional[Sequence[int]] = None,
    preference: Optional[RowOrder] = None,
) -> Optional[List[int]]:
    """Match every row of ``pattern`` to a distinct host row with the same star set.

    ``host`` holds one row per host row (already restricted to the chosen
    columns); ``host_rows`` names them (default 0..len-1). ``preference``
    maps (pattern row, host row name) to a sort key; lower keys are tried
    first. Free candidates are taken greedily in preference order and an
    augmenting path is searched only when none is free. Pattern rows with
    the same star set get their host rows in ascending order.
    """
    names = list(host_rows) if host_rows is not None else list(range(len(host)))
    if len(names) != len(host):
        raise ParameterError("host_rows must name every host row")
    if any(len(row) != pattern.cols for row in host):
        raise ParameterError(f"host rows must have {pattern.cols} columns")

    host_stars = [star_set(row) for row in host]
    candidates: List[List[int]] = []
    for r, b_row in enumerate(pattern.grid):
        wanted = star_set(b_row)
        options = [h for h, stars in enumerate(host_stars) if stars == wanted]
        if preference is not None:
            options.sort(key=lambda h: (preference(r, names[h]), names[h]))
        else:
            options.sort(key=lambda h: names[h])
        candidates.append(options)

    owner: Dict[int, int] = {}

    def augment(r: int, seen: set) -> bool:
        for h in candidates[r]:
            if h in seen:
                continue
            seen.add(h)
            if h not in owner or augment(owner[h], seen):
                owner[h] = r
                return True
        return False

    for r in range(pattern.rows):
        free = next((h for h in candidates[r] if h not in owner), None)
        if free is not None:
            owner[free] = r
        elif not augment(r, set()):
            return None

    assigned = {r: h for h, r in owner.items()}
    classes: Dict[FrozenSet[int], List[int]] = {}
    for r, b_row in enumerate(pattern.grid):
        classes.setdefault(star_set(b_row), []).append(r)
    result = [0] * pattern.rows
    for members in classes.values():
        chosen = sorted((names[assigned[r]] for r in members))
        for r, name in zip(members, chosen):
            result[r] = name
    return result


def verify_hppda(p: Sequence[Sequence[Cell]], b: PdaArray) -> Verdict:
    """Equal star counts in P, B a PDA, and every K'-column choice of P star-matches B."""
    p_arr = PdaArray(to_grid(p))
    if b.cols > p_arr.cols:
        raise ParameterError(f"B has {b.cols} columns but P only {p_arr.cols}")
    verdict = Verdict()
    counts = p_arr.star_counts()
    verdict.params.update({"K": p_arr.cols, "F": p_arr.rows, "Z": counts[0] if counts else 0})
    for j, count in enumerate(counts, start=1):
        if count != counts[0]:
            verdict.add("P-stars", f"column has {count} stars, column 1 has {counts[0]}", f"column {j}")
    inner = verify_pda(b)
    verdict.extend(inner, prefix="B")
    verdict.params["Zprime"] = inner.params["Z"]
    verdict.notes.append(
        f"P has {verdict.params['Z']} stars per column, B has {inner.params['Z']}"
    )
    if not verdict.ok:
        return verdict

    scanned = 0
    for tau in combinations(range(p_arr.cols), b.cols):
        host = [[row[j] for j in tau] for row in p_arr.grid]
        scanned += 1
        if find_row_assignment(host, b) is None:
            verdict.add("Eq1", "no row subset star-matches B", f"tau={[j + 1 for j in tau]}")
    verdict.params["tau_scanned"] = scanned
    return verdict


def load_array(path: Union[str, Path]) -> PdaArray:
    return PdaArray(to_grid(parse_json(path, ArrayFile).grid))


def store_array(arr: PdaArray, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_json({"grid": arr.to_list()}), encoding="utf-8")
