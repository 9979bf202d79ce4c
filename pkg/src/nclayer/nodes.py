"""Per-node behaviour along the delivery chain.

The sender picks a replica allocation from its table (or threshold policy)
and encodes each GOP. An intermediate either forwards whatever arrives, or
decodes what it can and re-encodes the recovered prefix at full budget with
a strategy restricted to the depths it actually holds. The receiver counts
arrivals per class and scores the GOP by the count-based decode rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .codec import CodedPacket, decodable_layers, decode_gop, encode_gop
from .heuristic import ThresholdPolicy, select_strategy
from .media import LayerGrid
from .spt import StrategyTable, best_restricted, nearest_bin, select_best

MODE_FORWARD = "forward"
MODE_NC = "nc"
RELAY_MODES = (MODE_FORWARD, MODE_NC)


@dataclass
class FeedbackReport:
    """Outcome of one probe round, reported back to the strategy owner."""

    node_id: str
    delivered: int
    probes: int

    @property
    def ratio(self) -> float:
        if self.probes < 1:
            raise ValueError(f"probe count must be positive, got {self.probes}")
        return self.delivered / self.probes


def _fresh_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63))


@dataclass
class SenderState:
    budget: int
    scheme: str
    table: Optional[StrategyTable] = None
    policy: Optional[ThresholdPolicy] = None
    update_period: int = 1
    pdr_estimate: float = 1.0
    strategy: Optional[tuple[int, ...]] = None
    gop_counter: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self):
        if (self.table is None) == (self.policy is None):
            raise ValueError("sender needs exactly one of table or policy")
        if self.update_period < 1:
            raise ValueError(f"update_period must be positive, got {self.update_period}")


def sender_epoch(
    state: SenderState, grid: LayerGrid, feedback: Optional[FeedbackReport] = None
) -> list[CodedPacket]:
    """Encodes one GOP; the strategy refreshes only on period boundaries."""
    if feedback is not None:
        state.pdr_estimate = feedback.ratio
    if state.strategy is None or state.gop_counter % state.update_period == 0:
        if state.table is not None:
            state.strategy = select_best(state.table, state.pdr_estimate)
        else:
            state.strategy = select_strategy(state.policy, state.pdr_estimate)
    state.gop_counter += 1
    return encode_gop(grid, state.strategy, state.scheme, _fresh_seed(state.rng))


@dataclass
class RelayState:
    mode: str
    budget: int
    scheme: str
    layer_count: int
    packets_per_layer: int
    payload_size: int
    table: Optional[StrategyTable] = None
    pdr_estimate: float = 1.0
    forward_delay: float = 0.005
    recode_delay: float = 60.0
    last_decoded: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self):
        if self.mode not in RELAY_MODES:
            raise ValueError(f"unknown relay mode {self.mode!r}, expected one of {RELAY_MODES}")
        if self.mode == MODE_NC and self.table is None:
            raise ValueError("a re-encoding relay needs a strategy table")


def relay_step(state: RelayState, packets: Sequence[CodedPacket]) -> list[CodedPacket]:
    """Forward mode passes packets through untouched. Re-encode mode decodes
    the deepest available prefix and spends the full budget on it, never
    emitting a class deeper than what it decoded."""
    if state.mode == MODE_FORWARD:
        return list(packets)
    if not packets:
        state.last_decoded = 0
        return []
    decoded, grid = decode_gop(
        packets, state.layer_count, state.packets_per_layer, state.payload_size
    )
    state.last_decoded = decoded
    if decoded == 0:
        return []
    strategy = best_restricted(state.table, nearest_bin(state.pdr_estimate), decoded)
    if strategy is None:
        return []
    return encode_gop(grid, strategy, state.scheme, _fresh_seed(state.rng))


@dataclass
class ReceiverState:
    layer_count: int
    packets_per_layer: int
    payload_size: int
    verify_payloads: bool = False
    counts: np.ndarray = field(init=False)
    buffer: list = field(init=False, default_factory=list)
    history: list = field(init=False, default_factory=list)
    prediction_gaps: int = 0
    payload_errors: int = 0

    def __post_init__(self):
        self.counts = np.zeros(self.layer_count, dtype=np.int64)


def receiver_ingest(state: ReceiverState, packet: CodedPacket) -> None:
    if not 1 <= packet.class_depth <= state.layer_count:
        raise ValueError(
            f"packet class depth {packet.class_depth} outside 1..{state.layer_count}"
        )
    state.counts[packet.class_depth - 1] += 1
    if state.verify_payloads:
        state.buffer.append(packet)


def receiver_finalize_gop(
    state: ReceiverState, reference: Optional[LayerGrid] = None
) -> int:
    """Scores the finished GOP from the per-class counts and resets state.

    In payload-verification mode the buffered packets are actually decoded:
    a decode shallower than the count-based score bumps prediction_gaps, and
    recovered bytes differing from the reference bump payload_errors.
    """
    predicted = decodable_layers(state.counts.tolist(), state.packets_per_layer)
    if state.verify_payloads and state.buffer:
        actual, grid = decode_gop(
            state.buffer, state.layer_count, state.packets_per_layer, state.payload_size
        )
        if actual < predicted:
            state.prediction_gaps += 1
        if reference is not None and actual > 0:
            if not np.array_equal(grid.cells[:actual], reference.cells[:actual]):
                state.payload_errors += 1
    state.history.append(predicted)
    state.counts[:] = 0
    state.buffer = []
    return predicted
