"""Nested-class packet codec.

A coded packet of class i mixes content from layers 1..i of one GOP, so the
packet classes nest: class 1 packets protect only the base layer
while class L packets blend everything. Receivers that can decode depth i
get value out of every packet of class <= i, which is what makes unequal
replica allocation across classes worthwhile on lossy links.

Two mixing schemes share this layout. "xor" combines one grid column per
packet, so layer j of a column peels out of consecutive depths. "rlc" draws
seeded random GF(2^8) coefficients over all cells of the first i layers and
decodes by Gaussian elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kernels import gf_matmul, gf_rref
from .media import LayerGrid

SCHEME_XOR = "xor"
SCHEME_RLC = "rlc"
SCHEMES = (SCHEME_XOR, SCHEME_RLC)


@dataclass
class CodedPacket:
    gop_id: int
    class_depth: int
    replica_index: int
    scheme: str
    payload: np.ndarray
    column: Optional[int] = None
    coefficients: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.class_depth < 1:
            raise ValueError(f"class_depth must be >= 1, got {self.class_depth}")


def decodable_layers(counts: Sequence[int], packets_per_layer: int) -> int:
    """Deepest prefix of layers covered by per-class reception counts.

    counts[j] is how many class j+1 packets arrived. Depth i qualifies when
    every trailing window of classes i-k..i holds at least (k+1) *
    packets_per_layer packets, i.e. enough material to cancel everything the
    deepest packets mixed in. Returns the largest qualifying i, or 0.
    """
    if packets_per_layer < 1:
        raise ValueError(f"packets_per_layer must be positive, got {packets_per_layer}")
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValueError(f"reception counts must be non-negative, got {counts}")
    for i in range(len(counts), 0, -1):
        acc = 0
        ok = True
        for k in range(i):
            acc += counts[i - 1 - k]
            if acc < (k + 1) * packets_per_layer:
                ok = False
                break
        if ok:
            return i
    return 0


def _check_strategy(strategy: Sequence[int], layer_count: int) -> list[int]:
    counts = [int(x) for x in strategy]
    if len(counts) != layer_count:
        raise ValueError(
            f"strategy has {len(counts)} classes, grid has {layer_count} layers"
        )
    if any(x < 0 for x in counts):
        raise ValueError(f"replica counts must be non-negative, got {counts}")
    return counts


def encode_gop(
    grid: LayerGrid,
    strategy: Sequence[int],
    scheme: str = SCHEME_RLC,
    seed: int = 0,
) -> list[CodedPacket]:
    """Produces strategy[i-1] packets of class i, shallow classes first."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    counts = _check_strategy(strategy, grid.layer_count)
    per_layer = grid.packets_per_layer
    packets: list[CodedPacket] = []

    if scheme == SCHEME_XOR:
        for depth in range(1, grid.layer_count + 1):
            for t in range(counts[depth - 1]):
                col = t % per_layer
                payload = np.bitwise_xor.reduce(grid.cells[:depth, col], axis=0)
                packets.append(
                    CodedPacket(
                        gop_id=grid.gop_id,
                        class_depth=depth,
                        replica_index=t,
                        scheme=scheme,
                        payload=payload,
                        column=col,
                    )
                )
        return packets

    rng = np.random.default_rng(seed)
    for depth in range(1, grid.layer_count + 1):
        n = counts[depth - 1]
        if n == 0:
            continue
        coeffs = rng.integers(0, 256, size=(n, depth * per_layer), dtype=np.uint8)
        data = grid.cells[:depth].reshape(depth * per_layer, grid.payload_size)
        payloads = gf_matmul(coeffs, data)
        for t in range(n):
            packets.append(
                CodedPacket(
                    gop_id=grid.gop_id,
                    class_depth=depth,
                    replica_index=t,
                    scheme=scheme,
                    payload=payloads[t],
                    coefficients=coeffs[t],
                )
            )
    return packets


def decode_gop(
    packets: Sequence[CodedPacket],
    layer_count: int,
    packets_per_layer: int,
    payload_size: int,
    gop_id: Optional[int] = None,
) -> tuple[int, LayerGrid]:
    """Recovers the deepest layer prefix the received packets pin down.

    Returns (recovered_layer_count, grid); grid cells past the recovered
    prefix are zero. With no packets the result is an all-zero grid.
    """
    if packets:
        gids = {p.gop_id for p in packets}
        schemes = {p.scheme for p in packets}
        if len(gids) > 1:
            raise ValueError(f"packets span several GOPs: {sorted(gids)}")
        if len(schemes) > 1:
            raise ValueError(f"packets mix schemes: {sorted(schemes)}")
        if gop_id is None:
            gop_id = packets[0].gop_id
        elif gop_id != packets[0].gop_id:
            raise ValueError(f"packets carry gop_id {packets[0].gop_id}, expected {gop_id}")
        bad_depth = [p.class_depth for p in packets if p.class_depth > layer_count]
        if bad_depth:
            raise ValueError(
                f"packet class depth {max(bad_depth)} exceeds layer_count {layer_count}"
            )
    cells = np.zeros((layer_count, packets_per_layer, payload_size), dtype=np.uint8)
    if not packets:
        return 0, LayerGrid(0 if gop_id is None else gop_id, cells)

    scheme = packets[0].scheme
    if scheme == SCHEME_XOR:
        recovered = _decode_xor(packets, layer_count, packets_per_layer, cells)
    else:
        recovered = _decode_rlc(packets, layer_count, packets_per_layer, payload_size, cells)
    return recovered, LayerGrid(gop_id, cells)


def _decode_xor(packets, layer_count, packets_per_layer, cells) -> int:
    by_column: list[dict[int, np.ndarray]] = [{} for _ in range(packets_per_layer)]
    for p in packets:
        if p.column is None or not 0 <= p.column < packets_per_layer:
            raise ValueError(f"xor packet carries invalid column {p.column}")
        by_column[p.column].setdefault(p.class_depth, p.payload)

    depth = layer_count
    for col_map in by_column:
        run = 0
        while run < depth and (run + 1) in col_map:
            run += 1
        depth = min(depth, run)
        if depth == 0:
            return 0

    for col, col_map in enumerate(by_column):
        prev = None
        for j in range(1, depth + 1):
            cur = col_map[j]
            cells[j - 1, col] = cur if prev is None else cur ^ prev
            prev = cur
    return depth


def _decode_rlc(packets, layer_count, packets_per_layer, payload_size, cells) -> int:
    n_unknowns = layer_count * packets_per_layer
    aug = np.zeros((len(packets), n_unknowns + payload_size), dtype=np.uint8)
    for r, p in enumerate(packets):
        if p.coefficients is None:
            raise ValueError("rlc packet is missing its coefficient vector")
        width = p.class_depth * packets_per_layer
        if p.coefficients.shape != (width,):
            raise ValueError(
                f"class {p.class_depth} packet needs {width} coefficients, "
                f"got shape {p.coefficients.shape}"
            )
        if p.payload.shape != (payload_size,):
            raise ValueError(
                f"payload must hold {payload_size} bytes, got shape {p.payload.shape}"
            )
        aug[r, :width] = p.coefficients
        aug[r, n_unknowns : n_unknowns + payload_size] = p.payload

    owner = gf_rref(aug, n_unknowns)

    coeff_part = aug[:, :n_unknowns]
    recovered = 0
    for depth in range(1, layer_count + 1):
        ok = True
        for c in range((depth - 1) * packets_per_layer, depth * packets_per_layer):
            row = owner[c]
            if row < 0 or np.count_nonzero(coeff_part[row]) != 1:
                ok = False
                break
        if not ok:
            break
        recovered = depth

    for c in range(recovered * packets_per_layer):
        layer, col = divmod(c, packets_per_layer)
        cells[layer, col] = aug[owner[c], n_unknowns:]
    return recovered
