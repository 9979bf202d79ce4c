"""Layered media containers.

A group of pictures (GOP) is a dense byte grid of shape (layer_count,
packets_per_layer, payload_size): row 0 is the base layer, each later row
refines the ones before it, and a layer is only useful when every layer
below it is available as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class LayerGrid:
    """One GOP worth of source packets. Treated as immutable after creation."""

    gop_id: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8).copy()
        if cells.ndim != 3:
            raise ValueError(f"cells must have 3 axes, got shape {cells.shape}")
        if min(cells.shape) < 1:
            raise ValueError(f"all grid axes must be positive, got shape {cells.shape}")
        if self.gop_id < 0:
            raise ValueError(f"gop_id must be non-negative, got {self.gop_id}")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @property
    def layer_count(self) -> int:
        return self.cells.shape[0]

    @property
    def packets_per_layer(self) -> int:
        return self.cells.shape[1]

    @property
    def payload_size(self) -> int:
        return self.cells.shape[2]


@dataclass(frozen=True)
class StrategyVector:
    """Per-class replica counts; entry i is how many class i+1 packets to send."""

    counts: tuple[int, ...]
    budget: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"replica counts must be non-negative, got {counts}")
        if sum(counts) != self.budget:
            raise ValueError(
                f"replica counts sum to {sum(counts)}, expected budget {self.budget}"
            )

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "StrategyVector":
        counts = tuple(int(c) for c in counts)
        return cls(counts, sum(counts))


def make_synthetic_gop(
    gop_id: int,
    layer_count: int,
    packets_per_layer: int,
    payload_size: int,
    seed: int = 0,
) -> LayerGrid:
    """Deterministic pseudo-random grid; a pure function of its arguments."""
    if gop_id < 0 or seed < 0:
        raise ValueError("gop_id and seed must be non-negative")
    for name, value in (
        ("layer_count", layer_count),
        ("packets_per_layer", packets_per_layer),
        ("payload_size", payload_size),
    ):
        if value < 1:
            raise ValueError(f"{name} must be positive, got {value}")
    rng = np.random.default_rng(
        [seed, gop_id, layer_count, packets_per_layer, payload_size]
    )
    cells = rng.integers(
        0, 256, size=(layer_count, packets_per_layer, payload_size), dtype=np.uint8
    )
    return LayerGrid(gop_id, cells)


def grid_from_bytes(
    data: bytes,
    gop_id: int,
    layer_count: int,
    packets_per_layer: int,
    payload_size: int,
) -> LayerGrid:
    """Rebuilds a grid from layer-major bytes as produced by grid_to_bytes."""
    expected = layer_count * packets_per_layer * payload_size
    if len(data) != expected:
        raise ValueError(
            f"need exactly {expected} bytes for a "
            f"{layer_count}x{packets_per_layer}x{payload_size} grid, got {len(data)}"
        )
    cells = np.frombuffer(data, dtype=np.uint8).reshape(
        layer_count, packets_per_layer, payload_size
    )
    return LayerGrid(gop_id, cells)


def grid_to_bytes(grid: LayerGrid) -> bytes:
    return grid.cells.tobytes()
