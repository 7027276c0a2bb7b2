"""Simplified CSMA/CA MAC with "802.11" and "802.11p" parameter profiles.

Carrier sensing is a per-node busy horizon maintained by the engine; a frame
is sent after DIFS plus a uniform backoff once the medium is idle.  Unicast
frames wait for an (idealised, never lost) ACK and retry with a doubled
contention window.  Reception uses a threshold plus a 10 dB capture rule.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Simulation

BROADCAST = -1
MAX_PAYLOAD = 2304
MAC_HEADER_BYTES = 28
ACK_BYTES = 14
ASSOC_FRAME_BYTES = 30
CAPTURE_RATIO = 10.0  # 10 dB

DATA, CONTROL, ACK = "data", "routing-control", "ack"


class MacConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MacProfile:
    name: str
    bitrate: float
    slot: float
    sifs: float
    difs: float
    cw_min: int
    cw_max: int
    retry_limit: int
    preamble_overhead: float
    association_required: bool

    def __post_init__(self):
        if self.cw_min > self.cw_max:
            raise MacConfigError("cw_min must not exceed cw_max")
        if not self.bitrate > 0:
            raise MacConfigError("bitrate must be > 0")

    def airtime(self, payload_bytes: int) -> float:
        return self.preamble_overhead + (payload_bytes + MAC_HEADER_BYTES) * 8.0 / self.bitrate

    @property
    def ack_time(self) -> float:
        return self.preamble_overhead + ACK_BYTES * 8.0 / self.bitrate

    @property
    def association_time(self) -> float:
        # request + response, each preceded by SIFS
        return 2.0 * (self.sifs + self.preamble_overhead + ASSOC_FRAME_BYTES * 8.0 / self.bitrate)


MAC_NAMES = ("802.11", "802.11p")


def profile_for(standard: str, bitrate: float | None = None) -> MacProfile:
    """Parameter profile for ``"802.11"`` or ``"802.11p"``; ``bitrate`` overrides the rate."""
    if standard == "802.11":
        slot, sifs = 20e-6, 10e-6
        return MacProfile("802.11", bitrate or 2e6, slot, sifs, sifs + 2 * slot,
                          31, 1023, 7, 192e-6, True)
    if standard == "802.11p":
        slot, sifs = 13e-6, 32e-6
        return MacProfile("802.11p", bitrate or 6e6, slot, sifs, sifs + 2 * slot,
                          15, 1023, 7, 40e-6, False)
    raise MacConfigError(f"unknown MAC {standard!r}; expected one of {MAC_NAMES}")


_uids = itertools.count()


@dataclass
class Frame:
    kind: str
    src: int
    dst: int
    payload_bytes: int
    born_at: float
    payload: Any = None
    uid: int = field(default_factory=lambda: next(_uids))

    def __post_init__(self):
        if self.payload_bytes > MAX_PAYLOAD:
            raise MacConfigError(f"payload {self.payload_bytes} B exceeds {MAX_PAYLOAD} B")

    @property
    def broadcast(self) -> bool:
        return self.dst == BROADCAST


def decodes(rx_power: float, interferer_powers, rx_threshold: float,
            sender: int | None = None, receiver: int | None = None) -> bool:
    """Threshold plus capture: the frame must beat every overlapping one by 10 dB."""
    if sender is not None and sender == receiver:
        return False
    if rx_power < rx_threshold:
        return False
    return all(rx_power >= CAPTURE_RATIO * p for p in interferer_powers)


def backoff_slots(cw: int, rng) -> int:
    """Uniform integer backoff in ``[0, cw]`` slots (mean ``cw/2``)."""
    return rng.randint(0, cw)


class Mac:
    """Per-node MAC state.  ``rng`` is a :class:`random.Random`."""

    def __init__(self, node: int, profile: MacProfile, sim: "Simulation", rng,
                 queue_depth: int = 50):
        self.node = node
        self.profile = profile
        self.sim = sim
        self.rng = rng
        self.queue_depth = queue_depth
        self.ctrl: deque[Frame] = deque()
        self.data: deque[Frame] = deque()
        self.current: Frame | None = None
        self.attempts = 0
        self.cw = profile.cw_min
        self.slots = 0
        self.associated: set[int] = set()
        self.tx_count = 0

    def __len__(self):
        return len(self.ctrl) + len(self.data)

    def enqueue(self, frame: Frame) -> bool:
        """Queue a frame (drop-tail, control first).  Returns False if dropped."""
        if len(self) >= self.queue_depth:
            if frame.kind == CONTROL and self.data:
                self.sim.mac_dropped(self.node, self.data.pop(), "queue-full")
            else:
                self.sim.mac_dropped(self.node, frame, "queue-full")
                return False
        (self.ctrl if frame.kind == CONTROL else self.data).append(frame)
        if self.current is None:
            self._next()
        return True

    def _next(self):
        if self.ctrl:
            self.current = self.ctrl.popleft()
        elif self.data:
            self.current = self.data.popleft()
        else:
            self.current = None
            return
        self.attempts = 0
        self.cw = self.profile.cw_min
        self._contend()

    def _contend(self):
        self.slots = backoff_slots(self.cw, self.rng)
        self._arm(max(self.sim.now, self.sim.busy_until[self.node]))

    def _arm(self, idle_from: float):
        at = idle_from + self.profile.difs + self.slots * self.profile.slot
        self.sim.at(at, self._attempt)

    def _attempt(self):
        busy = self.sim.busy_until[self.node]
        if busy > self.sim.now:
            # medium taken during our countdown: defer, keep the drawn slots
            self._arm(busy)
            return
        frame = self.current
        if (self.profile.association_required and not frame.broadcast
                and frame.dst not in self.associated):
            self.associated.add(frame.dst)
            self.sim.peer_mac(frame.dst).associated.add(self.node)
            done = self.sim.now + self.profile.association_time
            self.sim.occupy(self.node, frame.dst, done)
            self.sim.record("assoc", self.node, peer=frame.dst)
            self.sim.at(done, self._transmit)
            return
        self._transmit()

    def _transmit(self):
        self.tx_count += 1
        self.sim.start_tx(self.node, self.current, self.profile.airtime(self.current.payload_bytes),
                          self.attempts)

    def tx_done(self, acked: bool):
        """Called by the engine at the end of our transmission."""
        frame = self.current
        if frame.broadcast:
            self._finish()
        elif acked:
            self.sim.at(self.sim.now + self.profile.sifs + self.profile.ack_time, self._finish)
        else:
            timeout = self.profile.sifs + self.profile.ack_time + self.profile.slot
            self.sim.at(self.sim.now + timeout, self._retry)

    def _retry(self):
        self.attempts += 1
        if self.attempts > self.profile.retry_limit:
            frame = self.current
            self.sim.record("mac-fail", self.node, dst=frame.dst, uid=frame.uid)
            self.current = None
            self.sim.link_failure(self.node, frame)
            if self.current is None:
                self._next()
            return
        self.cw = min(2 * self.cw + 1, self.profile.cw_max)
        self._contend()

    def _finish(self):
        self.current = None
        self._next()
