"""Dynamic MANET On-demand routing (reactive RREQ/RREP/RERR)."""

from __future__ import annotations

from collections import deque

from .base import ControlMessage, RouteEntry, RoutingAgent

RREQ_HOP_LIMIT = 10
BUFFER_CAP = 64
# A node holds a first-seen RREQ this long and relays the best copy it heard,
# so the single rebroadcast per (origin, seq) still yields shortest paths.
RREQ_COLLECT = 0.02
SEEN_TTL = 30.0
RERR_RATE_LIMIT = 10  # originated RERRs per second


class DymoAgent(RoutingAgent):
    protocol = "dymo"

    def start(self):
        self.own_seq = 0
        self.table: dict[int, RouteEntry] = {}
        self.buffers: dict[int, deque] = {}
        self.discovery: dict[int, tuple[int, int]] = {}   # dest -> (attempts, rreq seq)
        self.seen: dict[tuple[int, int], float] = {}
        self.rebroadcasts: dict[tuple[int, int], int] = {}
        self.rerr_times: deque = deque()

    # -- route table -------------------------------------------------------
    def _valid(self, dest: int) -> RouteEntry | None:
        e = self.table.get(dest)
        if e is not None and e.valid and e.expires_at > self.now:
            return e
        return None

    def _update_route(self, dest: int, next_hop: int, metric: int, seq: int) -> bool:
        if dest == self.id:
            return False
        cur = self.table.get(dest)
        live = cur is not None and cur.valid and cur.expires_at > self.now
        if cur is None or seq > cur.seq or (seq == cur.seq and (not live or metric < cur.metric)):
            self.table[dest] = RouteEntry(dest, next_hop, metric, seq, self.now,
                                          self.now + self.timers.dymo_route_timeout)
            return True
        return False

    def _use(self, e: RouteEntry):
        e.expires_at = self.now + self.timers.dymo_route_timeout

    def routes(self):
        return {d: e for d in list(self.table) if (e := self._valid(d)) is not None}

    # -- data --------------------------------------------------------------
    def originate(self, pkt):
        e = self._valid(pkt.dst)
        if e is not None:
            self._use(e)
            self.send_data(pkt, e.next_hop)
            return
        self._buffer(pkt)
        if pkt.dst not in self.discovery:
            self.discovery[pkt.dst] = (0, 0)
            self._send_rreq(pkt.dst)

    def forward(self, pkt, prev_hop):
        if prev_hop is None:
            self.originate(pkt)
            return
        e = self._valid(pkt.dst)
        if e is None:
            self.drop(pkt, "no-route")
            self._send_rerr([pkt.dst])
            return
        self._use(e)
        back = self._valid(pkt.src)
        if back is not None and back.next_hop == prev_hop:
            self._use(back)
        self.send_data(pkt, e.next_hop)

    def _buffer(self, pkt):
        q = self.buffers.setdefault(pkt.dst, deque())
        if len(q) >= BUFFER_CAP:
            self.drop(q.popleft(), "buffer-overflow")
        q.append(pkt)

    def _flush(self, dest: int):
        self.discovery.pop(dest, None)
        for pkt in self.buffers.pop(dest, ()):
            self.originate(pkt)

    # -- discovery ---------------------------------------------------------
    def _send_rreq(self, dest: int):
        attempts, _ = self.discovery[dest]
        self.own_seq += 1
        self.discovery[dest] = (attempts + 1, self.own_seq)
        msg = ControlMessage("rreq", self.id, self.own_seq, (dest, 0), RREQ_HOP_LIMIT)
        self.seen[(self.id, msg.seq)] = self.now + SEEN_TTL
        self.originated(msg)
        self.send(msg)
        # binary exponential backoff between attempts
        self.after(self.timers.dymo_rreq_wait * 2 ** attempts, self._rreq_timeout, dest, self.own_seq)

    def _rreq_timeout(self, dest: int, seq: int):
        state = self.discovery.get(dest)
        if state is None or state[1] != seq:
            return
        if self._valid(dest) is not None:
            self._flush(dest)
        elif state[0] < self.timers.dymo_rreq_tries:
            self._send_rreq(dest)
        else:
            del self.discovery[dest]
            for pkt in self.buffers.pop(dest, ()):
                self.drop(pkt, "unreachable")

    def on_control(self, msg: ControlMessage, sender: int):
        if msg.kind == "rreq":
            self._on_rreq(msg, sender)
        elif msg.kind == "rrep":
            self._on_rrep(msg, sender)
        elif msg.kind == "rerr":
            self._on_rerr(msg, sender)

    def _on_rreq(self, msg, sender):
        if msg.origin == self.id:
            return
        _, hops = msg.payload
        self._update_route(msg.origin, sender, hops + 1, msg.seq)
        key = (msg.origin, msg.seq)
        if key in self.seen:
            return
        self.seen[key] = self.now + SEEN_TTL
        if len(self.seen) > 4096:
            self.seen = {k: v for k, v in self.seen.items() if v > self.now}
        self.after(RREQ_COLLECT, self._release_rreq, msg)

    def _release_rreq(self, msg):
        target, _ = msg.payload
        back = self._valid(msg.origin)
        if back is None:
            return
        if target == self.id:
            self.own_seq += 1
            rrep = ControlMessage("rrep", self.id, self.own_seq, (msg.origin, 0), RREQ_HOP_LIMIT)
            self.originated(rrep)
            self.send(rrep, back.next_hop)
        elif msg.hop_limit > 1:
            key = (msg.origin, msg.seq)
            self.rebroadcasts[key] = self.rebroadcasts.get(key, 0) + 1
            self.sim.record("rreq-fwd", self.id, origin=msg.origin, seq=msg.seq)
            self.send(msg.forwarded(payload=(target, back.metric)))

    def _on_rrep(self, msg, sender):
        dest, hops = msg.payload
        self._update_route(msg.origin, sender, hops + 1, msg.seq)
        if dest == self.id:
            if self._valid(msg.origin) is not None:
                self._flush(msg.origin)
            return
        back = self._valid(dest)
        fwd = self._valid(msg.origin)
        if back is None or fwd is None or msg.hop_limit <= 1:
            return
        self._use(back)
        self.send(msg.forwarded(payload=(dest, fwd.metric)), back.next_hop)

    def _on_rerr(self, msg, sender):
        lost = [d for d in msg.payload
                if (e := self._valid(d)) is not None and e.next_hop == sender]
        for d in lost:
            self.table[d].valid = False
        if lost and msg.hop_limit > 1:
            self.send(msg.forwarded(payload=tuple(lost), n_entries=len(lost)))

    def _send_rerr(self, dests):
        times = self.rerr_times
        while times and times[0] <= self.now - 1.0:
            times.popleft()
        if len(times) >= RERR_RATE_LIMIT:
            return
        times.append(self.now)
        msg = ControlMessage("rerr", self.id, self.next_seq("rerr"), tuple(dests),
                             RREQ_HOP_LIMIT, len(dests))
        self.originated(msg)
        self.send(msg)

    # -- link layer feedback ------------------------------------------------
    def on_link_failure(self, next_hop: int, frame):
        broken = [d for d, e in self.table.items() if e.valid and e.next_hop == next_hop]
        for d in broken:
            self.table[d].valid = False
        if broken:
            self._send_rerr(broken)
        if frame.kind != "data":
            return
        pkt = frame.payload
        if pkt.src == self.id:
            self.originate(pkt)
        else:
            self.drop(pkt, "link-break")
