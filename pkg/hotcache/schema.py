"""JSON file schemas for designs, arrays, HHPDA pairs and session reports."""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError, model_validator

from .errors import ParseError

Cell = Union[Literal["*"], None, PositiveInt]
Grid = List[List[Cell]]
StarGrid = List[List[Optional[Literal["*"]]]]

ModelT = TypeVar("ModelT", bound=BaseModel)


class DesignFile(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    t: PositiveInt
    v: PositiveInt
    k: PositiveInt
    lambda_: PositiveInt = Field(alias="lambda")
    blocks: List[List[PositiveInt]]

    @model_validator(mode="after")
    def check_blocks(self) -> "DesignFile":
        for index, block in enumerate(self.blocks):
            label = "".join(str(p) for p in block) if self.v < 10 else str(block)
            if len(block) != self.k:
                raise ValueError(f"block {index + 1} ({label}) has {len(block)} points, expected k={self.k}")
            if any(b <= a for a, b in zip(block, block[1:])):
                raise ValueError(f"block {index + 1} ({label}) is not strictly increasing")
            if block and block[-1] > self.v:
                raise ValueError(f"block {index + 1} ({label}) has a point outside 1..{self.v}")
        return self


class ArrayFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: Grid

    @model_validator(mode="after")
    def check_rectangular(self) -> "ArrayFile":
        widths = {len(row) for row in self.grid}
        if len(widths) > 1:
            raise ValueError(f"rows have unequal widths {sorted(widths)}")
        return self


class PairParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    K1: PositiveInt
    K2: PositiveInt
    Kprime: PositiveInt
    F: PositiveInt
    Fprime: PositiveInt
    Z1: int = Field(ge=0)
    Z2: int = Field(ge=0)
    Zprime: int = Field(ge=0)


class Provenance(BaseModel):
    model_config = ConfigDict(extra="forbid")

    design_id: str
    design: DesignFile
    K2: PositiveInt
    a: List[int]
    mirror_groups: List[List[PositiveInt]]


class PairFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    params: PairParams
    Q0: StarGrid
    Q: List[Grid]
    B: Grid
    S: List[PositiveInt]
    S_k: List[List[PositiveInt]]
    provenance: Optional[Provenance] = None

    @model_validator(mode="after")
    def check_shapes(self) -> "PairFile":
        p = self.params
        if len(self.Q0) != p.F or any(len(row) != p.K1 for row in self.Q0):
            raise ValueError(f"Q0 must be {p.F}x{p.K1}")
        if len(self.Q) != p.K1:
            raise ValueError(f"Q must hold {p.K1} grids, found {len(self.Q)}")
        for k1, grid in enumerate(self.Q, start=1):
            if len(grid) != p.F or any(len(row) != p.K2 for row in grid):
                raise ValueError(f"Q[{k1}] must be {p.F}x{p.K2}")
        if len(self.B) != p.Fprime or any(len(row) != p.Kprime for row in self.B):
            raise ValueError(f"B must be {p.Fprime}x{p.Kprime}")
        if len(self.S_k) != p.K1:
            raise ValueError(f"S_k must hold {p.K1} label sets, found {len(self.S_k)}")
        server = set(self.S)
        seen: Dict[int, int] = {}
        for k1, labels in enumerate(self.S_k, start=1):
            clash = server.intersection(labels)
            if clash:
                raise ValueError(f"S and S_{k1} overlap on {sorted(clash)}")
            for label in labels:
                if label in seen:
                    raise ValueError(f"label {label} declared in both S_{seen[label]} and S_{k1}")
                seen[label] = k1
        return self


class MirrorLoad(BaseModel):
    k1: PositiveInt
    phase_a: int
    phase_b: int
    theory_phase_a: int
    theory_phase_b: int


class SessionReportFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tau: List[List[PositiveInt]]
    demands: List[PositiveInt]
    zeta: List[PositiveInt]
    strategy: str
    seed: int
    Fprime: PositiveInt
    R1_measured: str
    R1_theory: str
    R2_measured: str
    R2_theory: str
    r2_per_mirror: Dict[str, str]
    mirrors: List[MirrorLoad]
    decode_ok: Dict[str, bool]
    failures: Dict[str, str] = Field(default_factory=dict)
    packets_server: int
    packets_mirrors: int
    bytes_server: int
    bytes_mirrors: int
    packet_bytes: PositiveInt
    loads_float: Dict[str, float] = Field(default_factory=dict)


def _format_loc(loc: Any) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_json(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """Read and validate a JSON file, turning every failure into ParseError."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path=str(path)) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=str(path), line=exc.lineno) from exc
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ParseError(first["msg"], path=str(path), field=_format_loc(first["loc"])) from exc


def dump_json(data: Dict[str, Any]) -> str:
    """Canonical JSON text used by every store_* function."""
    return json.dumps(data, indent=2) + "\n"
