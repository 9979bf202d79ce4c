"""Built-in diagnostic suite.

Every check recomputes its expectation from first principles (bitwise field
arithmetic, outcome enumeration) rather than trusting the module under test,
so a silent table or kernel corruption shows up as a named failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codec import SCHEME_RLC, SCHEME_XOR, decode_gop, encode_gop
from .gf256 import INV_TABLE, MUL_TABLE, _mul_slow
from .media import make_synthetic_gop
from .spt import enumerate_strategies, expected_decoded_layers

# domain of the exact-vs-enumeration equivalence sweep
ORACLE_MAX_BUDGET = 8
ORACLE_MAX_LAYERS = 3
ORACLE_PROBS = (0.25, 0.5, 0.75)
ORACLE_TOLERANCE = 1e-12
# compositions of b into l non-negative parts, summed over b<=8, l<=3
ORACLE_SUITE_SIZE = 216


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def check_gf256_mul_table(mul_table: Optional[np.ndarray] = None) -> CheckResult:
    """Every cell of the 256x256 product table against shift-and-reduce."""
    table = MUL_TABLE if mul_table is None else mul_table
    for a in range(256):
        for b in range(256):
            want = _mul_slow(a, b)
            if int(table[a, b]) != want:
                return CheckResult(
                    "gf256-mul-table",
                    False,
                    f"table[{a},{b}] = {int(table[a, b])}, expected {want}",
                )
    return CheckResult("gf256-mul-table", True, "65536 products verified")


def check_gf256_inverses(mul_table: Optional[np.ndarray] = None) -> CheckResult:
    """a * inv(a) == 1 for every non-zero a, using the product table."""
    table = MUL_TABLE if mul_table is None else mul_table
    for a in range(1, 256):
        inv = int(INV_TABLE[a])
        if int(table[a, inv]) != 1:
            return CheckResult(
                "gf256-inverse-identity",
                False,
                f"{a} * {inv} = {int(table[a, inv])}, expected 1",
            )
    return CheckResult("gf256-inverse-identity", True, "255 inverses verified")


def _oracle_domain():
    for layers in range(1, ORACLE_MAX_LAYERS + 1):
        for budget in range(1, ORACLE_MAX_BUDGET + 1):
            for strategy in enumerate_strategies(budget, layers):
                yield strategy


def check_strategy_enumeration() -> CheckResult:
    suite = sum(1 for _ in _oracle_domain())
    standard = len(enumerate_strategies(64, 4, 4))
    passed = suite == ORACLE_SUITE_SIZE and standard == 969
    return CheckResult(
        "strategy-enumeration",
        passed,
        f"oracle suite {suite} (expected {ORACLE_SUITE_SIZE}), "
        f"standard table {standard} (expected 969)",
    )


def check_oracle_equivalence() -> CheckResult:
    """Exact DP against full delivery-outcome enumeration, P = 1."""
    worst = 0.0
    cases = 0
    for strategy in _oracle_domain():
        for p in ORACLE_PROBS:
            exact = expected_decoded_layers(strategy, p, 1, method="exact")
            brute = expected_decoded_layers(strategy, p, 1, method="brute-force")
            diff = abs(exact - brute)
            cases += 1
            if diff > ORACLE_TOLERANCE:
                return CheckResult(
                    "oracle-equivalence",
                    False,
                    f"strategy {strategy}, p={p}: exact {exact!r} vs brute {brute!r}",
                )
            worst = max(worst, diff)
    return CheckResult(
        "oracle-equivalence", True, f"{cases} cases, worst diff {worst:.2e}"
    )


def check_codec_roundtrip() -> CheckResult:
    grid = make_synthetic_gop(0, 3, 2, 16, seed=7)
    for scheme, seed in ((SCHEME_XOR, 0), (SCHEME_RLC, 1)):
        packets = encode_gop(grid, (2, 2, 2), scheme, seed=seed)
        decoded, recovered = decode_gop(packets, 3, 2, 16)
        if decoded != 3:
            return CheckResult(
                "codec-roundtrip", False, f"{scheme}: decoded {decoded} of 3 layers"
            )
        if not np.array_equal(recovered.cells, grid.cells):
            return CheckResult(
                "codec-roundtrip", False, f"{scheme}: recovered payload differs"
            )
    return CheckResult("codec-roundtrip", True, "xor and rlc recover 3/3 layers")


def run_selftest(inject_gf_fault: bool = False) -> list[CheckResult]:
    """Runs every check; ``inject_gf_fault`` corrupts a copy of the product
    table first, to prove the gf checks can actually fail."""
    mul_table = None
    if inject_gf_fault:
        mul_table = MUL_TABLE.copy()
        mul_table[1, 1] ^= 0xFF
    return [
        check_gf256_mul_table(mul_table),
        check_gf256_inverses(mul_table),
        check_strategy_enumeration(),
        check_oracle_equivalence(),
        check_codec_roundtrip(),
    ]
