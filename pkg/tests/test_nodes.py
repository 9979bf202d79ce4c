import numpy as np
import pytest

from nclayer.codec import SCHEME_RLC, encode_gop
from nclayer.heuristic import builtin_policy
from nclayer.media import make_synthetic_gop
from nclayer.nodes import (
    FeedbackReport,
    ReceiverState,
    RelayState,
    SenderState,
    receiver_finalize_gop,
    receiver_ingest,
    relay_step,
    sender_epoch,
)
from nclayer.spt import build_table


@pytest.fixture(scope="module")
def small_table():
    return build_table(budget=8, layer_count=3, packets_per_layer=2, granularity=2)


def _grid():
    return make_synthetic_gop(0, 3, 2, 8, seed=1)


def test_sender_needs_exactly_one_selector(small_table):
    with pytest.raises(ValueError):
        SenderState(budget=8, scheme=SCHEME_RLC)
    with pytest.raises(ValueError):
        SenderState(
            budget=8, scheme=SCHEME_RLC, table=small_table, policy=builtin_policy(1)
        )


def test_sender_emits_full_budget(small_table):
    sender = SenderState(
        budget=8, scheme=SCHEME_RLC, table=small_table, rng=np.random.default_rng(0)
    )
    packets = sender_epoch(sender, _grid(), FeedbackReport("s", 100, 100))
    assert len(packets) == 8
    assert sender.strategy is not None
    assert sum(sender.strategy) == 8


def test_sender_strategy_refreshes_on_period(small_table):
    sender = SenderState(
        budget=8,
        scheme=SCHEME_RLC,
        table=small_table,
        update_period=3,
        rng=np.random.default_rng(0),
    )
    grid = _grid()
    sender_epoch(sender, grid, FeedbackReport("s", 100, 100))
    lossless = sender.strategy
    # mid-epoch feedback is recorded but must not change the strategy yet
    sender_epoch(sender, grid, FeedbackReport("s", 5, 100))
    assert sender.strategy == lossless
    sender_epoch(sender, grid, FeedbackReport("s", 5, 100))
    assert sender.strategy == lossless
    sender_epoch(sender, grid, FeedbackReport("s", 5, 100))
    assert sender.strategy != lossless


def test_sender_with_policy():
    sender = SenderState(
        budget=64, scheme=SCHEME_RLC, policy=builtin_policy(3),
        rng=np.random.default_rng(0),
    )
    grid = make_synthetic_gop(0, 4, 8, 16, seed=0)
    sender_epoch(sender, grid, FeedbackReport("s", 100, 100))
    assert sender.strategy == (40, 8, 8, 8)


def test_forward_relay_is_transparent():
    relay = RelayState(
        mode="forward", budget=8, scheme=SCHEME_RLC,
        layer_count=3, packets_per_layer=2, payload_size=8,
    )
    packets = encode_gop(_grid(), (4, 2, 2), SCHEME_RLC, seed=0)
    out = relay_step(relay, packets)
    assert out == packets


def test_nc_relay_requires_table():
    with pytest.raises(ValueError):
        RelayState(
            mode="nc", budget=8, scheme=SCHEME_RLC,
            layer_count=3, packets_per_layer=2, payload_size=8,
        )


def test_nc_relay_reencodes_full_budget(small_table):
    relay = RelayState(
        mode="nc", budget=8, scheme=SCHEME_RLC,
        layer_count=3, packets_per_layer=2, payload_size=8,
        table=small_table, pdr_estimate=1.0, rng=np.random.default_rng(0),
    )
    packets = encode_gop(_grid(), (4, 2, 2), SCHEME_RLC, seed=0)
    out = relay_step(relay, packets)
    assert relay.last_decoded == 3
    assert len(out) == 8
    assert all(p.gop_id == 0 for p in out)


def test_nc_relay_never_encodes_past_decoded_depth(small_table):
    relay = RelayState(
        mode="nc", budget=8, scheme=SCHEME_RLC,
        layer_count=3, packets_per_layer=2, payload_size=8,
        table=small_table, pdr_estimate=1.0, rng=np.random.default_rng(0),
    )
    # only class-1 packets arrive: the relay can recover just layer 1
    packets = encode_gop(_grid(), (4, 0, 0), SCHEME_RLC, seed=0)[:3]
    out = relay_step(relay, packets)
    assert relay.last_decoded == 1
    assert len(out) == 8
    assert all(p.class_depth == 1 for p in out)


def test_nc_relay_empty_input(small_table):
    relay = RelayState(
        mode="nc", budget=8, scheme=SCHEME_RLC,
        layer_count=3, packets_per_layer=2, payload_size=8,
        table=small_table,
    )
    assert relay_step(relay, []) == []
    assert relay.last_decoded == 0


def test_receiver_counts_and_reset():
    receiver = ReceiverState(layer_count=3, packets_per_layer=2, payload_size=8)
    for pkt in encode_gop(_grid(), (4, 2, 2), SCHEME_RLC, seed=0):
        receiver_ingest(receiver, pkt)
    assert receiver.counts.tolist() == [4, 2, 2]
    decoded = receiver_finalize_gop(receiver)
    assert decoded == 3
    assert receiver.counts.tolist() == [0, 0, 0]
    assert receiver.history == [3]


def test_receiver_rejects_overdeep_packet():
    receiver = ReceiverState(layer_count=2, packets_per_layer=2, payload_size=8)
    packets = encode_gop(_grid(), (0, 0, 2), SCHEME_RLC, seed=0)
    with pytest.raises(ValueError):
        receiver_ingest(receiver, packets[0])


def test_receiver_verification_clean_path():
    grid = _grid()
    receiver = ReceiverState(
        layer_count=3, packets_per_layer=2, payload_size=8, verify_payloads=True
    )
    for pkt in encode_gop(grid, (4, 2, 2), SCHEME_RLC, seed=3):
        receiver_ingest(receiver, pkt)
    decoded = receiver_finalize_gop(receiver, reference=grid)
    assert decoded == 3
    assert receiver.prediction_gaps == 0
    assert receiver.payload_errors == 0
    assert receiver.buffer == []
