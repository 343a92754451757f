"""t-(v,k,lambda) designs: verification, lambda counting, generation and the catalog."""

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Tuple, Union

from .errors import LookupFailure, ParameterError
from .schema import DesignFile, dump_json, parse_json
from .verdict import Verdict

logger = logging.getLogger(__name__)

Block = Tuple[int, ...]


@dataclass(frozen=True)
class TDesign:
    """Point set [v] and an ordered block list; block order indexes rows of Q."""

    t: int
    v: int
    k: int
    lambda_: int
    blocks: Tuple[Block, ...]

    @property
    def b(self) -> int:
        return len(self.blocks)

    def block_sets(self) -> List[FrozenSet[int]]:
        return [frozenset(block) for block in self.blocks]

    def label(self) -> str:
        return f"{self.t}-({self.v},{self.k},{self.lambda_})"


def make_design(t: int, v: int, k: int, lambda_: int, blocks: Iterable[Iterable[int]]) -> TDesign:
    return TDesign(t, v, k, lambda_, tuple(tuple(sorted(block)) for block in blocks))


def format_block(block: Iterable[int]) -> str:
    points = sorted(block)
    if all(p < 10 for p in points):
        return "".join(str(p) for p in points)
    return "{" + ",".join(str(p) for p in points) + "}"


def verify_design(d: TDesign, forbid_repeats: bool = False) -> Verdict:
    """Check every TDesign invariant by direct counting.

    Repeated blocks are a warning unless ``forbid_repeats`` is set, which the
    HHPDA construction does.
    """
    verdict = Verdict(params={"t": d.t, "v": d.v, "k": d.k, "lambda": d.lambda_, "b": d.b})
    if not d.v > d.k >= d.t >= 1:
        verdict.add("bounds", f"need v > k >= t >= 1, got v={d.v}, k={d.k}, t={d.t}")

    for index, block in enumerate(d.blocks, start=1):
        where = f"block {index} ({format_block(block)})"
        if len(set(block)) != len(block):
            verdict.add("block-repeat-point", "block repeats a point", where)
        if len(set(block)) != d.k:
            verdict.add("block-size", f"block has {len(set(block))} points, expected {d.k}", where)
        outside = [p for p in block if not 1 <= p <= d.v]
        if outside:
            verdict.add("block-range", f"points {outside} outside 1..{d.v}", where)

    seen: Dict[Block, int] = {}
    for index, block in enumerate(d.blocks, start=1):
        key = tuple(sorted(block))
        if key in seen:
            message = f"block {index} repeats block {seen[key]} ({format_block(key)})"
            if forbid_repeats:
                verdict.add("repeated-block", message, f"block {index}")
            else:
                verdict.warnings.append(message)
        else:
            seen[key] = index

    if verdict.ok and d.t <= d.v:
        block_sets = d.block_sets()
        for subset in combinations(range(1, d.v + 1), d.t):
            needed = set(subset)
            count = sum(1 for block in block_sets if needed <= block)
            if count != d.lambda_:
                verdict.add(
                    "t-subset-cover",
                    f"covered by {count} blocks, expected lambda={d.lambda_}",
                    f"t-subset {format_block(subset)}",
                )
    return verdict


def lambda_s_formula(d: TDesign, s: int) -> int:
    if not 0 <= s <= d.t:
        raise ParameterError(f"s={s} must satisfy 0 <= s <= t={d.t}")
    numerator = d.lambda_ * comb(d.v - s, d.t - s)
    denominator = comb(d.k - s, d.t - s)
    if numerator % denominator:
        raise ParameterError(f"lambda_{s} is not an integer for {d.label()}; not a t-design")
    return numerator // denominator


def lambda_s(d: TDesign, s: int) -> int:
    """Number of blocks through any s points, checked against a direct count."""
    value = lambda_s_formula(d, s)
    block_sets = d.block_sets()
    for subset in combinations(range(1, d.v + 1), s):
        needed = set(subset)
        counted = sum(1 for block in block_sets if needed <= block)
        if counted != value:
            raise ParameterError(
                f"lambda_{s}: subset {format_block(subset)} lies in {counted} blocks, formula gives {value}"
            )
    return value


def count_containing_avoiding(d: TDesign, contain: Iterable[int], avoid: Iterable[int]) -> int:
    """Blocks holding every point of ``contain`` and none of ``avoid``."""
    contain = set(contain)
    avoid = set(avoid)
    if contain & avoid:
        raise ParameterError(f"contain and avoid overlap on {sorted(contain & avoid)}")
    return sum(1 for block in d.block_sets() if contain <= block and not avoid & block)


def lambda_st(d: TDesign, s: int) -> int:
    """Blocks holding s given points of a t-set and avoiding its other t-s points."""
    if not 0 <= s <= d.t or d.t > d.v:
        raise ParameterError(f"s={s} must satisfy 0 <= s <= t={d.t}")
    return count_containing_avoiding(d, range(1, s + 1), range(s + 1, d.t + 1))


def complete_design(v: int, k: int, t: int) -> TDesign:
    """All k-subsets of [v] in lexicographic order."""
    if not v > k >= t >= 1:
        raise ParameterError(f"complete design needs v > k >= t >= 1, got v={v}, k={k}, t={t}")
    blocks = tuple(combinations(range(1, v + 1), k))
    return TDesign(t=t, v=v, k=k, lambda_=comb(v - t, k - t), blocks=blocks)


# ex1 is usually written on points 0..9; the catalog shifts them to 1..10.
_EX1_BLOCKS = (
    "0123 0145 0246 0378 0579 0689 1278 1369 1479 1568 2359 2489 2567 3458 3467"
)
# Row labels of the t-design figure, in printed order.
_EX2_BLOCKS = "1234 1256 1278 1357 1368 1458 1467 3478 2468 2358 2367 2457 3456 5678"

CATALOG_NOTES = {
    "ex1-2-10-4-2": "2-(10,4,2) design; points 0..9 shifted to 1..10",
    "ex2-3-8-4-1": "3-(8,4,1) design; blocks in the printed row order",
}


def _catalog_design(design_id: str) -> TDesign:
    if design_id == "ex1-2-10-4-2":
        blocks = [[int(ch) + 1 for ch in word] for word in _EX1_BLOCKS.split()]
        return make_design(2, 10, 4, 2, blocks)
    if design_id == "ex2-3-8-4-1":
        blocks = [[int(ch) for ch in word] for word in _EX2_BLOCKS.split()]
        return make_design(3, 8, 4, 1, blocks)
    raise LookupFailure(f"unknown catalog design {design_id!r}; known: {', '.join(CATALOG_NOTES)}")


def catalog_ids() -> List[str]:
    return list(CATALOG_NOTES)


def design_to_dict(d: TDesign) -> Dict:
    return {
        "t": d.t,
        "v": d.v,
        "k": d.k,
        "lambda": d.lambda_,
        "blocks": [list(block) for block in d.blocks],
    }


def design_from_model(model: DesignFile) -> TDesign:
    return make_design(model.t, model.v, model.k, model.lambda_, model.blocks)


def load_design(source: Union[str, Path]) -> TDesign:
    """Load a design from a catalog id or a JSON design file."""
    if str(source) in CATALOG_NOTES:
        return _catalog_design(str(source))
    path = Path(source)
    if not path.exists() and path.suffix != ".json":
        return _catalog_design(str(source))
    return design_from_model(parse_json(path, DesignFile))


def store_design(d: TDesign, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_json(design_to_dict(d)), encoding="utf-8")
    logger.info("stored %s design with %d blocks to %s", d.label(), d.b, path)
