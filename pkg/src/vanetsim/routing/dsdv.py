"""Destination-Sequenced Distance Vector."""

from __future__ import annotations

from .base import INF, ControlMessage, RouteEntry, RoutingAgent

HOLD_PERIODS = 3
MAX_START_PHASE = 1.0


class DsdvAgent(RoutingAgent):
    """Periodic full dumps plus rate-limited incremental (triggered) updates.

    Own sequence numbers are even and grow by 2 per full dump.  A broken
    route is advertised with the next odd number and an infinite metric.
    Routes that got worse are held back from incremental updates for the
    settling time in case a better one with the same number follows.
    """

    protocol = "dsdv"

    def start(self):
        self.own_seq = 0
        self.table: dict[int, RouteEntry] = {
            self.id: RouteEntry(self.id, self.id, 0, 0, self.now, INF)}
        self.pending: dict[int, float] = {}
        self.last_update = -INF
        self.trigger_at: float | None = None
        self.malformed = 0
        self.anchor = self.now + self.rng.uniform(0.0, min(MAX_START_PHASE, self.timers.dsdv_periodic))
        self.sim.at(self.anchor, self._periodic)

    @property
    def hold(self) -> float:
        return HOLD_PERIODS * self.timers.dsdv_periodic

    # -- advertisement ---------------------------------------------------
    def _periodic(self):
        self._expire()
        self.own_seq += 2
        self.table[self.id].seq = self.own_seq
        self._advertise(sorted(self.table), full=True)
        self.pending.clear()
        self.anchor += self.timers.dsdv_periodic
        self.sim.at(self.anchor, self._periodic)

    def _advertise(self, dests, full: bool):
        entries = tuple((d, self.table[d].seq, self.table[d].metric) for d in dests)
        msg = ControlMessage("dsdv-update", self.id, self.next_seq("dsdv-update"),
                             (full, entries), 1, len(entries))
        self.originated(msg)
        self.send(msg)
        self.last_update = self.now

    def _changed(self, dest: int, ready: float):
        self.pending[dest] = ready
        self._arm_trigger()

    def _arm_trigger(self):
        if not self.pending:
            return
        when = max(min(self.pending.values()),
                   self.last_update + self.timers.dsdv_trigger_min_gap, self.now)
        if self.trigger_at is not None and self.trigger_at <= when:
            return
        self.trigger_at = when
        self.sim.at(when, self._trigger, when)

    def _trigger(self, token: float):
        if token != self.trigger_at:
            return
        self.trigger_at = None
        due = sorted(d for d, t in self.pending.items() if t <= self.now and d in self.table)
        if due:
            self._advertise(due, full=False)
            for d in due:
                del self.pending[d]
        for d in [d for d in self.pending if d not in self.table]:
            del self.pending[d]
        self._arm_trigger()

    # -- table maintenance -----------------------------------------------
    def _expire(self):
        now = self.now
        for d in list(self.table):
            e = self.table[d]
            if d == self.id or e.expires_at > now:
                continue
            if e.metric == INF:
                del self.table[d]
                self.pending.pop(d, None)
            else:
                self._break(e)

    def _break(self, e: RouteEntry):
        e.seq += 1
        e.metric = INF
        e.installed_at = self.now
        e.expires_at = self.now + self.hold
        self._changed(e.dest, self.now)

    def on_control(self, msg: ControlMessage, sender: int):
        if msg.kind != "dsdv-update":
            return
        now = self.now
        _, entries = msg.payload
        for item in entries:
            try:
                dest, seq, metric = item
                seq = int(seq)
                metric = float(metric)
            except (TypeError, ValueError):
                self.malformed += 1
                continue
            if dest == self.id:
                if seq > self.own_seq:
                    self.own_seq = seq + 1 if seq % 2 else seq + 2
                    self.table[self.id].seq = self.own_seq
                    self._changed(self.id, now)
                continue
            new_metric = metric + 1
            cur = self.table.get(dest)
            if cur is None:
                if new_metric == INF:
                    continue
                self.table[dest] = RouteEntry(dest, sender, new_metric, seq, now, now + self.hold)
                self._changed(dest, now)
            elif seq > cur.seq or (seq == cur.seq and new_metric < cur.metric):
                worse = new_metric > cur.metric and new_metric != INF
                cur.next_hop, cur.metric, cur.seq = sender, new_metric, seq
                cur.installed_at, cur.expires_at = now, now + self.hold
                self._changed(dest, now + self.timers.dsdv_settling if worse else now)
            elif seq == cur.seq and cur.next_hop == sender and new_metric == cur.metric:
                cur.expires_at = now + self.hold

    def on_link_failure(self, next_hop: int, frame):
        for e in list(self.table.values()):
            if e.dest != self.id and e.next_hop == next_hop and e.metric != INF:
                self._break(e)
        pkt = frame.payload
        if frame.kind == "data":
            self.drop(pkt, "link-break")

    # -- data ------------------------------------------------------------
    def forward(self, pkt, prev_hop):
        e = self.table.get(pkt.dst)
        if e is None or e.metric == INF or pkt.dst == self.id:
            self.drop(pkt, "no-route")
        else:
            self.send_data(pkt, e.next_hop)

    def routes(self):
        return {d: e for d, e in self.table.items() if d != self.id and e.metric != INF}
