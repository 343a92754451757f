"""GF(2^8) arithmetic and the [F, F'] MDS code used for coded placement."""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import galois
import numpy as np

from .errors import (
    CorruptionError,
    FieldError,
    InsufficientSharesError,
    ParameterError,
    ShapeError,
)

logger = logging.getLogger(__name__)

REDUCTION_POLY = 0x11B
FIELD_SIZE = 256

GF256 = galois.GF(2**8, irreducible_poly=REDUCTION_POLY)

Packet = bytes


def field_mul(a: int, b: int) -> int:
    """Multiply two byte symbols in GF(2^8) reduced by x^8+x^4+x^3+x+1."""
    _check_symbol(a)
    _check_symbol(b)
    return int(GF256(a) * GF256(b))


def field_inv(a: int) -> int:
    """Multiplicative inverse of a nonzero byte symbol."""
    _check_symbol(a)
    if a == 0:
        raise FieldError("0x00 has no multiplicative inverse")
    return int(GF256(a) ** -1)


def _check_symbol(a: int) -> None:
    if not 0 <= a < FIELD_SIZE:
        raise ParameterError(f"{a!r} is not a GF(2^8) symbol")


def xor_packets(*packets: Packet) -> Packet:
    """Symbol-wise sum of equal-length packets."""
    if not packets:
        raise ShapeError("xor_packets needs at least one packet")
    length = len(packets[0])
    acc = np.zeros(length, dtype=np.uint8)
    for packet in packets:
        if len(packet) != length:
            raise ShapeError(f"packet length {len(packet)} != {length}")
        np.bitwise_xor(acc, np.frombuffer(packet, dtype=np.uint8), out=acc)
    return acc.tobytes()


@dataclass(frozen=True)
class GeneratorMatrix:
    """k_info x n_total Vandermonde generator; column j evaluates at node j."""

    k_info: int
    n_total: int
    entries: Tuple[Tuple[int, ...], ...]

    def as_field(self) -> galois.FieldArray:
        return GF256(np.array(self.entries, dtype=np.uint8))

    def column(self, j: int) -> Tuple[int, ...]:
        return tuple(row[j] for row in self.entries)


def mds_generator(n_total: int, k_info: int) -> GeneratorMatrix:
    """Build the deterministic [n_total, k_info] generator.

    Evaluation points are the field elements 0, 1, 2, ... in integer order,
    so the coded bytes never depend on platform or run.
    """
    if not 1 <= k_info <= n_total <= FIELD_SIZE:
        raise ParameterError(
            f"need 1 <= k_info <= n_total <= {FIELD_SIZE}, got k_info={k_info}, n_total={n_total}"
        )
    nodes = GF256(np.arange(n_total, dtype=np.uint8))
    rows = [GF256.Ones(n_total)]
    for _ in range(1, k_info):
        rows.append(rows[-1] * nodes)
    entries = tuple(tuple(int(x) for x in row) for row in rows)
    return GeneratorMatrix(k_info=k_info, n_total=n_total, entries=entries)


def _stack(packets: Sequence[Packet]) -> galois.FieldArray:
    lengths = {len(packet) for packet in packets}
    if len(lengths) != 1:
        raise ShapeError(f"packets have unequal lengths {sorted(lengths)}")
    if 0 in lengths:
        raise ShapeError("packets must hold at least one symbol")
    data = np.stack([np.frombuffer(packet, dtype=np.uint8) for packet in packets])
    return GF256(data)


def mds_encode(g: GeneratorMatrix, info: Sequence[Packet]) -> List[Packet]:
    """Encode k_info information packets into n_total coded packets.

    Coded packet j is sum_i info_i * g[i][j], evaluated symbol-wise.
    """
    if len(info) != g.k_info:
        raise ShapeError(f"expected {g.k_info} information packets, got {len(info)}")
    coded = g.as_field().T @ _stack(info)
    return [row.view(np.ndarray).astype(np.uint8).tobytes() for row in coded]


def mds_decode(g: GeneratorMatrix, shares: Iterable[Tuple[int, Packet]]) -> List[Packet]:
    """Recover the information packets from coded (0-based index, packet) shares.

    Any k_info distinct indices suffice; every extra share is re-encoded and
    compared, so a share that disagrees raises CorruptionError.
    """
    by_index = {}
    for index, packet in shares:
        if not 0 <= index < g.n_total:
            raise ParameterError(f"coded index {index} outside [0, {g.n_total})")
        if index in by_index and by_index[index] != packet:
            raise CorruptionError(f"two different packets for coded index {index}")
        by_index[index] = packet
    if len(by_index) < g.k_info:
        raise InsufficientSharesError(
            f"{len(by_index)} distinct coded packets, need {g.k_info}"
        )

    indices = sorted(by_index)
    chosen = indices[: g.k_info]
    generator = g.as_field()
    sub = generator[:, chosen]
    received = _stack([by_index[j] for j in chosen])
    info = np.linalg.inv(sub.T) @ received

    check = generator[:, indices].T @ info
    supplied = _stack([by_index[j] for j in indices])
    if not np.array_equal(check, supplied):
        bad = [indices[r] for r in range(len(indices)) if not np.array_equal(check[r], supplied[r])]
        raise CorruptionError(f"coded packets {bad} are inconsistent with the others")

    logger.debug("decoded %d packets from indices %s", g.k_info, chosen)
    return [row.view(np.ndarray).astype(np.uint8).tobytes() for row in info]


def split_file(data: bytes, parts: int) -> List[Packet]:
    """Split a file into equal information packets."""
    if parts < 1 or len(data) % parts:
        raise ShapeError(f"file of {len(data)} bytes does not split into {parts} packets")
    size = len(data) // parts
    if size == 0:
        raise ShapeError("packets must hold at least one symbol")
    return [data[i * size:(i + 1) * size] for i in range(parts)]
