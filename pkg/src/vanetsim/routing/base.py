from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any

from ..mac import BROADCAST
from .timers import ProtocolTimers

if TYPE_CHECKING:  # pragma: no cover
    from ..engine import DataPacket, Simulation

IP_UDP_BYTES = 28
BROADCAST_JITTER = 0.01
INF = math.inf

# bytes per advertised element, per message kind
_ENTRY_BYTES = {"dsdv-update": 12, "hello": 8, "tc": 4, "rreq": 0, "rrep": 0, "rerr": 4}
_HEADER_BYTES = {"dsdv-update": 4, "hello": 8, "tc": 12, "rreq": 24, "rrep": 20, "rerr": 8}


@dataclass
class RouteEntry:
    dest: int
    next_hop: int
    metric: float
    seq: int
    installed_at: float
    expires_at: float
    valid: bool = True


@dataclass(frozen=True)
class ControlMessage:
    kind: str
    origin: int
    seq: int
    payload: Any = ()
    hop_limit: int = 1
    n_entries: int = 0

    @property
    def size(self) -> int:
        return (IP_UDP_BYTES + _HEADER_BYTES[self.kind]
                + _ENTRY_BYTES[self.kind] * self.n_entries)

    def forwarded(self, **changes) -> "ControlMessage":
        return replace(self, hop_limit=self.hop_limit - 1, **changes)


class RoutingAgent:
    """Control plane of one node.  Subclasses implement the protocol logic."""

    protocol = "base"

    def __init__(self, node: int, sim: "Simulation", timers: ProtocolTimers, rng):
        self.id = node
        self.sim = sim
        self.timers = timers
        self.rng = rng
        self._counters: dict[str, int] = {}

    # -- hooks -----------------------------------------------------------
    def start(self):
        pass

    def originate(self, pkt: "DataPacket"):
        self.forward(pkt, None)

    def forward(self, pkt: "DataPacket", prev_hop: int | None):
        raise NotImplementedError

    def on_control(self, msg: ControlMessage, sender: int):
        raise NotImplementedError

    def on_link_failure(self, next_hop: int, frame):
        pass

    def routes(self) -> dict[int, RouteEntry]:
        """Currently usable routes, keyed by destination (self excluded)."""
        raise NotImplementedError

    def next_hop(self, dest: int) -> int | None:
        e = self.routes().get(dest)
        return None if e is None else e.next_hop

    # -- helpers ---------------------------------------------------------
    @property
    def now(self) -> float:
        return self.sim.now

    def next_seq(self, kind: str) -> int:
        self._counters[kind] = self._counters.get(kind, 0) + 1
        return self._counters[kind]

    def after(self, delay: float, fn, *args):
        self.sim.at(self.sim.now + delay, fn, *args)

    def send(self, msg: ControlMessage, dst: int = BROADCAST, jitter: bool = True):
        if dst == BROADCAST and jitter:
            self.after(self.rng.uniform(0.0, BROADCAST_JITTER), self.sim.send_control,
                       self.id, msg, dst)
        else:
            self.sim.send_control(self.id, msg, dst)

    def originated(self, msg: ControlMessage):
        self.sim.record("ctrl-orig", self.id, kind=msg.kind, seq=msg.seq)

    def send_data(self, pkt: "DataPacket", next_hop: int):
        self.sim.send_data(self.id, pkt, next_hop)

    def drop(self, pkt: "DataPacket", reason: str):
        self.sim.drop(pkt, reason)
