"""Layered-video delivery over lossy multi-hop chains, with nested
inter-layer coding, precomputed strategy tables, and a chain simulator."""

from .channel import LinkModel, chain_e2e_pdr
from .codec import (
    SCHEME_RLC,
    SCHEME_XOR,
    CodedPacket,
    decodable_layers,
    decode_gop,
    encode_gop,
)
from .config import ConfigError, apply_overrides, load_config, parse_config_text
from .gf256 import gf256_inv, gf256_mul
from .heuristic import ThresholdPolicy, builtin_policy, select_strategy
from .kernels import BACKEND
from .media import LayerGrid, StrategyVector, grid_from_bytes, grid_to_bytes, make_synthetic_gop
from .nodes import (
    FeedbackReport,
    ReceiverState,
    RelayState,
    SenderState,
    receiver_finalize_gop,
    receiver_ingest,
    relay_step,
    sender_epoch,
)
from .simulator import (
    ChainConfig,
    RunMetrics,
    no_nc_baseline,
    resolve_mode,
    run,
    sweep,
)
from .spt import (
    PDR_BINS,
    StrategyTable,
    build_table,
    enumerate_strategies,
    expected_decoded_layers,
    load_table,
    nearest_bin,
    save_table,
    select_best,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChainConfig",
    "CodedPacket",
    "ConfigError",
    "FeedbackReport",
    "LayerGrid",
    "LinkModel",
    "PDR_BINS",
    "ReceiverState",
    "RelayState",
    "RunMetrics",
    "SCHEME_RLC",
    "SCHEME_XOR",
    "SenderState",
    "StrategyTable",
    "StrategyVector",
    "ThresholdPolicy",
    "apply_overrides",
    "build_table",
    "builtin_policy",
    "chain_e2e_pdr",
    "decodable_layers",
    "decode_gop",
    "encode_gop",
    "enumerate_strategies",
    "expected_decoded_layers",
    "gf256_inv",
    "gf256_mul",
    "grid_from_bytes",
    "grid_to_bytes",
    "load_config",
    "load_table",
    "make_synthetic_gop",
    "nearest_bin",
    "no_nc_baseline",
    "parse_config_text",
    "receiver_finalize_gop",
    "receiver_ingest",
    "relay_step",
    "resolve_mode",
    "run",
    "save_table",
    "select_best",
    "select_strategy",
    "sender_epoch",
    "sweep",
    "__version__",
]
