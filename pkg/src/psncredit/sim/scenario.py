"""Scenario configuration for simulation runs.

A scenario comes from a JSON file, a comma-separated key=value string, or
the name of a built-in preset.  Unknown keys are rejected rather than
ignored so a typo cannot silently run the wrong experiment.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields, replace

from ..errors import ScenarioError

ATTACKS = ("replay", "theft", "forgery", "linkage")

_NONE_WORDS = ("none", "null", "")


@dataclass(frozen=True)
class Scenario:
    M: int = 1
    c_min: int = 1
    c_max: int = 10
    policy_c: int | None = None
    n_participants: int = 1
    key_bits: int = 256
    gap_min: int = 1
    gap_max: int = 5
    horizon: int | None = None
    attack: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.M < 1:
            raise ScenarioError("M must be at least 1")
        if not 1 <= self.c_min <= self.c_max:
            raise ScenarioError("need 1 <= c_min <= c_max")
        if self.policy_c is not None and self.policy_c < 0:
            raise ScenarioError("policy_c cannot be negative")
        if self.n_participants < 1:
            raise ScenarioError("need at least one participant")
        if not 1 <= self.gap_min <= self.gap_max:
            raise ScenarioError("need 1 <= gap_min <= gap_max")
        if self.horizon is not None and self.horizon < 1:
            raise ScenarioError("horizon must be positive when given")
        if self.attack is not None and self.attack not in ATTACKS:
            raise ScenarioError(f"unknown attack {self.attack!r}, expected one of {ATTACKS}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ScenarioError("seed must fit in 64 bits")

    def granted_credits(self) -> int:
        if self.policy_c is None:
            return self.c_max
        return max(self.c_min, min(self.policy_c, self.c_max))

    def resolved_horizon(self) -> int:
        """Explicit horizon, or one that provably fits every deposit chain."""
        if self.horizon is not None:
            return self.horizon
        c = self.granted_credits()
        return self.n_participants + self.M * (c * self.gap_max + 2)

    def to_mapping(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f for f in fields(Scenario)}
_OPTIONAL = {"policy_c", "horizon", "seed", "attack"}

PRESETS = {
    "default": Scenario(),
    "honest": Scenario(),
    "small": Scenario(M=2, c_max=3, n_participants=2, key_bits=128, gap_max=3),
}


def _coerce(key: str, value) -> int | str | None:
    if value is None:
        if key in _OPTIONAL:
            return None
        raise ScenarioError(f"{key} cannot be null")
    if key == "attack":
        if isinstance(value, str):
            return value.lower() or None
        raise ScenarioError("attack must be a string or null")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{key} must be an integer, got {value!r}")
    return value


def scenario_from_mapping(data: dict) -> Scenario:
    unknown = set(data) - set(_FIELD_TYPES)
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    return Scenario(**{k: _coerce(k, v) for k, v in data.items()})


def _parse_pairs(text: str) -> Scenario:
    data: dict = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ScenarioError(f"expected key=value, got {part!r}")
        key, _, raw = part.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key == "attack":
            data[key] = None if raw.lower() in _NONE_WORDS else raw
        elif raw.lower() in _NONE_WORDS:
            data[key] = None
        else:
            try:
                data[key] = int(raw)
            except ValueError:
                raise ScenarioError(f"{key} must be an integer, got {raw!r}") from None
    return scenario_from_mapping(data)


def load_scenario(source: str) -> Scenario:
    """Resolve a scenario argument: preset name, JSON file path, or
    comma-separated key=value pairs."""
    if source in PRESETS:
        return PRESETS[source]
    if os.path.exists(source):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario file {source} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ScenarioError("scenario file must hold a JSON object")
        return scenario_from_mapping(data)
    if "=" in source:
        return _parse_pairs(source)
    raise ScenarioError(
        f"{source!r} is not a preset ({', '.join(sorted(PRESETS))}), "
        "an existing file, or key=value pairs"
    )


def with_attack(scenario: Scenario, attack: str | None) -> Scenario:
    return replace(scenario, attack=attack)
