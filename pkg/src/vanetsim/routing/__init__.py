"""Routing control planes: DSDV, OLSR and DYMO."""

from .base import ControlMessage, RouteEntry, RoutingAgent
from .dsdv import DsdvAgent
from .dymo import DymoAgent
from .olsr import OlsrAgent, olsr_select_mprs
from .timers import MOD_PRESETS, PROTOCOLS, ProtocolTimers, apply_mod_preset, resolve_protocol

AGENTS = {"dsdv": DsdvAgent, "olsr": OlsrAgent, "dymo": DymoAgent}

__all__ = [
    "AGENTS", "ControlMessage", "DsdvAgent", "DymoAgent", "MOD_PRESETS", "OlsrAgent",
    "PROTOCOLS", "ProtocolTimers", "RouteEntry", "RoutingAgent", "apply_mod_preset",
    "olsr_select_mprs", "resolve_protocol",
]
