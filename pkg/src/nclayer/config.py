"""Plain-text run configuration.

One `key = value` pair per line, `#` starts a comment. Keys are dotted and
must come from the registry below; anything else is rejected with the line
number so typos surface instead of silently keeping a default.
"""

from __future__ import annotations

from dataclasses import fields
from typing import Callable, Iterable

from .simulator import ChainConfig


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_float_tuple(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected at least one number")
    return tuple(float(p) for p in parts)


def _parse_str_tuple(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _parse_schedule_entry(text: str) -> tuple[int, int, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected gop,link,pdr, got {text!r}")
    return (int(parts[0]), int(parts[1]), float(parts[2]))


# config key -> (ChainConfig field, converter)
KEY_REGISTRY: dict[str, tuple[str, Callable]] = {
    "chain.links": ("link_pdrs", _parse_float_tuple),
    "chain.relays": ("relay_modes", _parse_str_tuple),
    "chain.link_delays": ("link_delays", _parse_float_tuple),
    "media.layers": ("layer_count", int),
    "media.packets": ("packets_per_layer", int),
    "media.payload": ("payload_size", int),
    "coding.budget": ("budget", int),
    "coding.granularity": ("granularity", int),
    "coding.scheme": ("scheme", str),
    "select.method": ("selection", str),
    "select.heuristic_set": ("heuristic_set", int),
    "run.gops": ("gop_count", int),
    "run.probes": ("probe_count", int),
    "run.update_period": ("update_period", int),
    "run.seed": ("seed", int),
    "run.verify_payloads": ("verify_payloads", _parse_bool),
    "run.label": ("label", str),
    "delay.transmit": ("transmit_delay", float),
    "delay.forward": ("forward_delay", float),
    "delay.recode": ("recode_delay", float),
    "delay.table_build": ("table_build_charge", float),
    "delay.table_charging": ("table_charging", str),
}

_SCHEDULE_PREFIX = "schedule."


def parse_config_text(text: str) -> dict:
    """Returns ChainConfig keyword arguments. Raises ConfigError with the
    offending line number on unknown keys or malformed values."""
    kwargs: dict = {}
    schedule: list[tuple[int, tuple[int, int, float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith(_SCHEDULE_PREFIX):
            suffix = key[len(_SCHEDULE_PREFIX) :]
            try:
                order = int(suffix)
                schedule.append((order, _parse_schedule_entry(value)))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from exc
            continue
        if key not in KEY_REGISTRY:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        field_name, convert = KEY_REGISTRY[key]
        if field_name in kwargs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            kwargs[field_name] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if schedule:
        orders = [o for o, _ in schedule]
        if len(set(orders)) != len(orders):
            raise ConfigError("duplicate schedule indices")
        kwargs["pdr_schedule"] = tuple(e for _, e in sorted(schedule))
    return kwargs


def load_config(path) -> ChainConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    kwargs = parse_config_text(text)
    try:
        return ChainConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(config: ChainConfig, pairs: Iterable[str]) -> ChainConfig:
    """Applies command-line `key=value` overrides on top of a parsed config."""
    kwargs: dict = {}
    schedule: list[tuple[int, tuple[int, int, float]]] = []
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r}: expected key=value")
        key, _, value = pair.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith(_SCHEDULE_PREFIX):
            try:
                schedule.append((int(key[len(_SCHEDULE_PREFIX) :]), _parse_schedule_entry(value)))
            except ValueError as exc:
                raise ConfigError(f"override {pair!r}: {exc}") from exc
            continue
        if key not in KEY_REGISTRY:
            raise ConfigError(f"override {pair!r}: unknown key {key!r}")
        field_name, convert = KEY_REGISTRY[key]
        try:
            kwargs[field_name] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"override {pair!r}: {exc}") from exc
    if schedule:
        kwargs["pdr_schedule"] = config.pdr_schedule + tuple(e for _, e in sorted(schedule))
    current = {f.name: getattr(config, f.name) for f in fields(ChainConfig)}
    current.update(kwargs)
    try:
        return ChainConfig(**current)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
