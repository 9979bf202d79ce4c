import pytest

from nclayer.config import (
    KEY_REGISTRY,
    ConfigError,
    apply_overrides,
    load_config,
    parse_config_text,
)
from nclayer.simulator import ChainConfig

FULL_TEXT = """
# three hops, middle relay re-encodes
chain.links = 0.9, 0.8, 0.7
chain.relays = forward, nc
chain.link_delays = 0.001, 0.002, 0.003
media.layers = 4
media.packets = 8
media.payload = 32
coding.budget = 64
coding.granularity = 4
coding.scheme = xor
select.method = heuristic
select.heuristic_set = 2
run.gops = 10          # inline comment
run.probes = 50
run.update_period = 2
run.seed = 123
run.verify_payloads = yes
run.label = demo
delay.transmit = 0.002
delay.forward = 0.01
delay.recode = 30
delay.table_build = 45
delay.table_charging = per-node
schedule.1 = 5, 0, 0.5
schedule.0 = 2, 2, 0.1
"""


def test_full_document_parses():
    kwargs = parse_config_text(FULL_TEXT)
    config = ChainConfig(**kwargs)
    assert config.link_pdrs == (0.9, 0.8, 0.7)
    assert config.relay_modes == ("forward", "nc")
    assert config.link_delays == (0.001, 0.002, 0.003)
    assert config.scheme == "xor"
    assert config.selection == "heuristic"
    assert config.heuristic_set == 2
    assert config.gop_count == 10
    assert config.verify_payloads is True
    assert config.label == "demo"
    assert config.table_charging == "per-node"
    # schedule entries come back sorted by their key suffix
    assert config.pdr_schedule == ((2, 2, 0.1), (5, 0, 0.5))


def test_every_registry_key_is_a_chainconfig_field():
    from dataclasses import fields

    names = {f.name for f in fields(ChainConfig)}
    for key, (field_name, _) in KEY_REGISTRY.items():
        assert field_name in names, key


def test_unknown_key_reports_line_number():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config_text("run.gops = 5\n\nchain.pdrs = 0.5\n")


def test_bad_value_reports_line_number():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("run.gops = many\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("run.gops = 5\nrun.gops = 6\n")


def test_missing_equals_rejected():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("run.gops = 5\nrun.seed 4\n")


def test_schedule_entry_shape_checked():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("schedule.0 = 5, 0.5\n")
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("schedule.0 = 1,0,0.5\nschedule.0 = 2,0,0.5\n")


def test_defaults_when_empty():
    config = ChainConfig(**parse_config_text("# nothing but comments\n"))
    assert config.link_pdrs == (1.0,)
    assert config.gop_count == 100


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(FULL_TEXT)
    config = load_config(path)
    assert config.seed == 123


def test_load_config_wraps_validation_errors(tmp_path):
    path = tmp_path / "run.cfg"
    # two links but no relay mode for the middle node
    path.write_text("chain.links = 0.9, 0.9\nchain.relays = nc, nc\n")
    with pytest.raises(ConfigError, match="relay"):
        load_config(path)


def test_overrides_win():
    base = ChainConfig(gop_count=10, seed=1)
    updated = apply_overrides(base, ["run.gops=99", "run.seed=7"])
    assert updated.gop_count == 99
    assert updated.seed == 7
    assert base.gop_count == 10


def test_override_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        apply_overrides(ChainConfig(), ["coding.bugdet=64"])
    with pytest.raises(ConfigError, match="key=value"):
        apply_overrides(ChainConfig(), ["coding.budget"])


def test_override_appends_schedule():
    base = ChainConfig(pdr_schedule=((1, 0, 0.5),))
    updated = apply_overrides(base, ["schedule.0=3,0,0.9"])
    assert updated.pdr_schedule == ((1, 0, 0.5), (3, 0, 0.9))
