"""Protocol timer sets and the MOD presets."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

PROTOCOLS = ("dsdv", "olsr", "dymo", "mod-dsdv", "mod-olsr", "mod-dymo")

# preset -> (timer fields, multiplier)
MOD_PRESETS = {
    "MOD_DSDV": (("dsdv_periodic", "dsdv_trigger_min_gap", "dsdv_settling"), 2.0),
    "MOD_OLSR": (("olsr_hello", "olsr_tc"), 0.5),
    "MOD_DYMO": (("dymo_route_timeout", "dymo_rreq_wait"), 0.5),
}


@dataclass(frozen=True)
class ProtocolTimers:
    dsdv_periodic: float = 15.0
    dsdv_trigger_min_gap: float = 1.0
    dsdv_settling: float = 6.0
    olsr_hello: float = 2.0
    olsr_tc: float = 5.0
    dymo_route_timeout: float = 5.0
    dymo_rreq_wait: float = 1.0
    dymo_rreq_tries: int = 3

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"timer {f.name} must be > 0")


def apply_mod_preset(timers: ProtocolTimers, preset: str) -> ProtocolTimers:
    """Scale the timers a MOD variant changes; every other field is left as is."""
    key = preset.upper().replace("-", "_")
    if key not in MOD_PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    names, factor = MOD_PRESETS[key]
    return replace(timers, **{n: getattr(timers, n) * factor for n in names})


def resolve_protocol(protocol: str, timers: ProtocolTimers) -> tuple[str, ProtocolTimers]:
    """Map ``"mod-olsr"`` etc. to the base protocol and its adjusted timers."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")
    if protocol.startswith("mod-"):
        return protocol[4:], apply_mod_preset(timers, protocol)
    return protocol, timers
