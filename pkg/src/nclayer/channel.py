"""Single-hop loss model: every packet survives independently with fixed odds."""

from __future__ import annotations

from typing import Sequence

import numpy as np


class LinkModel:
    """One directed link. Deterministic for a given seed and call sequence."""

    def __init__(self, delivery_prob: float, seed: int = 0, transmit_delay: float = 0.001):
        if not 0.0 <= delivery_prob <= 1.0:
            raise ValueError(f"delivery_prob must lie in [0, 1], got {delivery_prob}")
        if transmit_delay < 0.0:
            raise ValueError(f"transmit_delay must be non-negative, got {transmit_delay}")
        self.delivery_prob = float(delivery_prob)
        self.transmit_delay = float(transmit_delay)
        self.draws = 0
        self._rng = np.random.default_rng(seed)

    def transmit(self, packets: Sequence) -> list:
        """Delivered subsequence; consumes exactly one draw per packet."""
        if not packets:
            return []
        uniforms = self._rng.random(len(packets))
        self.draws += len(packets)
        return [pkt for pkt, u in zip(packets, uniforms) if u < self.delivery_prob]

    def send_one(self) -> bool:
        self.draws += 1
        return bool(self._rng.random() < self.delivery_prob)

    def estimate_pdr(self, n_probes: int = 100) -> float:
        """Probe-based delivery estimate; probes ride outside any data budget."""
        if n_probes < 1:
            raise ValueError(f"n_probes must be positive, got {n_probes}")
        uniforms = self._rng.random(n_probes)
        self.draws += n_probes
        return float(np.count_nonzero(uniforms < self.delivery_prob)) / n_probes


def chain_e2e_pdr(links: Sequence[LinkModel], n_probes: int = 100) -> float:
    """Walks each probe across the links until lost; the survivor fraction
    estimates the product of the per-link delivery probabilities."""
    if not links:
        raise ValueError("need at least one link to probe")
    if n_probes < 1:
        raise ValueError(f"n_probes must be positive, got {n_probes}")
    survived = 0
    for _ in range(n_probes):
        for link in links:
            if not link.send_one():
                break
        else:
            survived += 1
    return survived / n_probes
