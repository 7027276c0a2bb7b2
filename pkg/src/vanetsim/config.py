"""Run and sweep configuration: JSON schema, defaults, validation."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .mac import MAC_NAMES
from .mobility import NODE_COUNTS, SPEEDS, HighwayScenario, ScenarioError
from .radio import RadioDomainError, RadioParams
from .routing.timers import PROTOCOLS, ProtocolTimers

PACKET_SIZE = 512
PACKET_INTERVAL = 0.03
DURATION = 900.0
SCALED_DURATION = 100.0
SWEEP_WARN_RUNS = 500


class ConfigError(ValueError):
    pass


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrafficSpec:
    """UDP constant-bit-rate flows between distinct random node pairs."""

    flows: int = 5
    packet_size: int = PACKET_SIZE
    interval: float = PACKET_INTERVAL
    start: float = 20.0  # warm-up so proactive tables exist before the first packet

    def __post_init__(self):
        if self.flows < 1:
            raise ConfigError("traffic.flows: expected an integer >= 1")
        if not 0 < self.packet_size <= 2048:
            raise ConfigError("traffic.packet_size: expected bytes in (0, 2048]")
        if not self.interval > 0:
            raise ConfigError("traffic.interval: expected seconds > 0")
        if not self.start >= 0:
            raise ConfigError("traffic.start: expected seconds >= 0")


@dataclass(frozen=True)
class ChannelSpec:
    fading: bool = True
    collisions: bool = True


@dataclass(frozen=True)
class RunConfig:
    protocol: str = "dsdv"
    mac: str = "802.11p"
    duration: float = DURATION
    seed: int = 1
    mobility_step: float = 0.1
    queue_depth: int = 50
    bitrate: float | None = None
    scenario: HighwayScenario = field(default_factory=HighwayScenario)
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    radio: RadioParams = field(default_factory=RadioParams)
    timers: ProtocolTimers = field(default_factory=ProtocolTimers)

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol: got {self.protocol!r}, expected one of {list(PROTOCOLS)}")
        if self.mac not in MAC_NAMES:
            raise ConfigError(f"mac: got {self.mac!r}, expected one of {list(MAC_NAMES)}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigError("duration: expected seconds > 0")
        if not self.mobility_step > 0:
            raise ConfigError("mobility_step: expected seconds > 0")
        if self.queue_depth < 1:
            raise ConfigError("queue_depth: expected an integer >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed: expected an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepSpec:
    protocols: tuple[str, ...] = PROTOCOLS
    macs: tuple[str, ...] = MAC_NAMES
    node_counts: tuple[int, ...] = NODE_COUNTS
    speeds: tuple[float, ...] = SPEEDS
    seeds: tuple[int, ...] = (1,)
    scaled_duration: float | None = SCALED_DURATION
    base: RunConfig = field(default_factory=RunConfig)

    def __post_init__(self):
        for name in ("protocols", "macs", "node_counts", "speeds", "seeds"):
            if not getattr(self, name):
                raise ConfigError(f"{name}: axis must not be empty")
        if self.size > SWEEP_WARN_RUNS:
            warnings.warn(f"sweep expands to {self.size} runs", ConfigWarning, stacklevel=3)

    @property
    def size(self) -> int:
        return (len(self.protocols) * len(self.macs) * len(self.node_counts)
                * len(self.speeds) * len(self.seeds))

    def runs(self):
        """Cartesian product of the axes as concrete :class:`RunConfig` objects."""
        base = self.base
        if self.scaled_duration is not None:
            base = replace(base, duration=float(self.scaled_duration))
        for protocol in self.protocols:
            for mac in self.macs:
                for nodes in self.node_counts:
                    for speed in self.speeds:
                        for seed in self.seeds:
                            scen = replace(base.scenario, node_count=nodes, speed=float(speed))
                            yield replace(base, protocol=protocol, mac=mac, seed=seed,
                                          scenario=scen)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("protocols", "macs", "node_counts", "speeds", "seeds"):
            d[name] = list(d[name])
        return d


# ---------------------------------------------------------------------------
# parsing

_SECTIONS = {
    "scenario": HighwayScenario,
    "traffic": TrafficSpec,
    "channel": ChannelSpec,
    "radio": RadioParams,
    "timers": ProtocolTimers,
}
_ALIASES = {"speed": ("scenario", "speed"), "node_count": ("scenario", "node_count"),
            "nodes": ("scenario", "node_count")}
_SWEEP_AXES = ("protocols", "macs", "node_counts", "speeds", "seeds", "scaled_duration", "base")


def _names(cls) -> list[str]:
    return [f.name for f in fields(cls)]


def _complain(msg: str, strict: bool):
    if strict:
        raise ConfigError(msg)
    warnings.warn(msg, ConfigWarning, stacklevel=4)


def _section(cls, name: str, raw: Any, strict: bool):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object with keys {_names(cls)}")
    known = set(_names(cls))
    unknown = sorted(set(raw) - known)
    if unknown:
        _complain(f"{name}: unknown key(s) {unknown}; expected a subset of {sorted(known)}", strict)
    kwargs = {k: v for k, v in raw.items() if k in known}
    try:
        return cls(**kwargs)
    except (TypeError, ScenarioError, RadioDomainError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{name}: {exc}") from None


def run_config_from_dict(doc: dict, strict: bool = True) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    doc = dict(doc)
    nested: dict[str, dict] = {}
    for alias, (section, key) in _ALIASES.items():
        if alias in doc:
            nested.setdefault(section, {})[key] = doc.pop(alias)
    known = set(_names(RunConfig))
    unknown = sorted(set(doc) - known)
    if unknown:
        _complain(f"unknown key(s) {unknown}; expected a subset of {sorted(known)}", strict)
    kwargs: dict[str, Any] = {}
    for name in known & set(doc) - set(_SECTIONS):
        kwargs[name] = doc[name]
    for name, cls in _SECTIONS.items():
        raw = dict(doc.get(name) or {})
        raw.update(nested.get(name, {}))
        kwargs[name] = _section(cls, name, raw, strict)
    for name in ("duration", "mobility_step"):
        if name in kwargs and not isinstance(kwargs[name], (int, float)):
            raise ConfigError(f"{name}: expected a number of seconds")
    if "seed" in kwargs and (not isinstance(kwargs["seed"], int) or isinstance(kwargs["seed"], bool)):
        raise ConfigError("seed: expected a non-negative integer")
    cfg = RunConfig(**kwargs)
    check_axes(cfg.scenario.node_count, cfg.scenario.speed, strict)
    return cfg


def check_axes(node_count: int, speed: float, strict: bool):
    if node_count not in NODE_COUNTS:
        _complain(f"scenario.node_count: got {node_count!r}, expected one of {list(NODE_COUNTS)}", strict)
    if float(speed) not in SPEEDS:
        _complain(f"scenario.speed: got {speed!r}, expected one of {[int(s) for s in SPEEDS]}", strict)


def sweep_from_dict(doc: dict, strict: bool = True) -> SweepSpec:
    unknown = sorted(set(doc) - set(_SWEEP_AXES))
    if unknown:
        _complain(f"unknown sweep key(s) {unknown}; expected a subset of {list(_SWEEP_AXES)}", strict)
    base = run_config_from_dict(doc.get("base", {}), strict)
    kwargs: dict[str, Any] = {"base": base}
    domains = {"protocols": PROTOCOLS, "macs": MAC_NAMES, "node_counts": NODE_COUNTS,
               "speeds": SPEEDS}
    for name in ("protocols", "macs", "node_counts", "speeds", "seeds"):
        if name not in doc:
            continue
        values = doc[name]
        if not isinstance(values, list):
            raise ConfigError(f"{name}: expected a list")
        if name in ("protocols", "macs"):
            bad = [v for v in values if v not in domains[name]]
            if bad:
                raise ConfigError(f"{name}: {bad} not in {list(domains[name])}")
        elif name in domains:
            bad = [v for v in values if v not in domains[name]]
            if bad:
                _complain(f"{name}: {bad} not in {list(domains[name])}", strict)
        elif any(not isinstance(v, int) or v < 0 for v in values):
            raise ConfigError("seeds: expected non-negative integers")
        kwargs[name] = tuple(float(v) if name == "speeds" else v for v in values)
    if "scaled_duration" in doc:
        sd = doc["scaled_duration"]
        if sd is not None and not (isinstance(sd, (int, float)) and sd > 0):
            raise ConfigError("scaled_duration: expected seconds > 0 or null")
        kwargs["scaled_duration"] = sd
    return SweepSpec(**kwargs)


def is_sweep(doc: dict) -> bool:
    return isinstance(doc, dict) and any(k in doc for k in _SWEEP_AXES)


def parse_config(path, strict: bool = True) -> RunConfig | SweepSpec:
    """Load a JSON run or sweep document; defaults fill every absent key."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return sweep_from_dict(doc, strict) if is_sweep(doc) else run_config_from_dict(doc, strict)


def dump_config(cfg: RunConfig | SweepSpec) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
