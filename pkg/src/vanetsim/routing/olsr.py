"""Optimized Link State Routing: HELLO link sensing, MPR flooding of TC."""

from __future__ import annotations

from collections import deque

from .base import INF, ControlMessage, RouteEntry, RoutingAgent

VALIDITY_FACTOR = 3
TC_HOP_LIMIT = 255


def olsr_select_mprs(one_hop, two_hop, self_id=None) -> frozenset:
    """Greedy MPR selection.

    ``two_hop`` maps each one-hop neighbor to the set of its neighbors.
    Neighbors that are the only cover of some strict two-hop node are taken
    first; then the neighbor covering the most still-uncovered nodes, ties
    going to the lower id.
    """
    one_hop = set(one_hop)
    reach = {n: set(two_hop.get(n, ())) - one_hop - {self_id} for n in one_hop}
    targets = set().union(*reach.values()) if reach else set()
    mprs: set = set()
    covered: set = set()
    for node in sorted(targets):
        covers = [n for n in one_hop if node in reach[n]]
        if len(covers) == 1:
            mprs.add(covers[0])
    for n in mprs:
        covered |= reach[n]
    while covered != targets:
        best = min(one_hop - mprs, key=lambda n: (-len(reach[n] - covered), n))
        mprs.add(best)
        covered |= reach[best]
    return frozenset(mprs)


class OlsrAgent(RoutingAgent):
    protocol = "olsr"

    def start(self):
        self.links: dict[int, list[float]] = {}      # nb -> [heard_until, sym_until]
        self.two_hop: dict[int, tuple[frozenset, float]] = {}
        self.selectors: dict[int, float] = {}
        self.topology: dict[int, tuple[int, frozenset, float]] = {}
        self.seen: dict[tuple[int, int], float] = {}
        self.mprs: frozenset = frozenset()
        self.table: dict[int, RouteEntry] = {}
        self.after(self.rng.uniform(0.0, self.timers.olsr_hello), self._hello_tick)
        self.after(self.rng.uniform(0.0, self.timers.olsr_tc), self._tc_tick)

    # -- views -------------------------------------------------------------
    def sym_neighbors(self) -> set[int]:
        now = self.now
        return {n for n, (_, s) in self.links.items() if s > now}

    def mpr_selectors(self) -> set[int]:
        now = self.now
        return {n for n, until in self.selectors.items() if until > now}

    def _purge(self):
        now = self.now
        for d in (self.two_hop, self.topology):
            for k in [k for k, v in d.items() if v[-1] <= now]:
                del d[k]
        for d in (self.selectors, self.seen):
            for k in [k for k, v in d.items() if v <= now]:
                del d[k]
        for k in [k for k, v in self.links.items() if v[0] <= now]:
            del self.links[k]

    # -- periodic messages --------------------------------------------------
    def _hello_tick(self):
        self._purge()
        self._recompute()
        now = self.now
        sym = tuple(sorted(self.sym_neighbors()))
        asym = tuple(sorted(n for n, (h, s) in self.links.items() if h > now and s <= now))
        vtime = VALIDITY_FACTOR * self.timers.olsr_hello
        msg = ControlMessage("hello", self.id, self.next_seq("hello"),
                             (sym, asym, tuple(sorted(self.mprs)), vtime), 1,
                             len(sym) + len(asym))
        self.originated(msg)
        self.send(msg)
        self.after(self.timers.olsr_hello, self._hello_tick)

    def _tc_tick(self):
        self._purge()
        selectors = tuple(sorted(self.mpr_selectors()))
        if selectors:
            vtime = VALIDITY_FACTOR * self.timers.olsr_tc
            msg = ControlMessage("tc", self.id, self.next_seq("tc"), (selectors, vtime),
                                 TC_HOP_LIMIT, len(selectors))
            self.seen[(self.id, msg.seq)] = self.now + vtime
            self.originated(msg)
            self.send(msg)
        self.after(self.timers.olsr_tc, self._tc_tick)

    # -- reception ----------------------------------------------------------
    def on_control(self, msg: ControlMessage, sender: int):
        if msg.kind == "hello":
            self._on_hello(msg, sender)
        elif msg.kind == "tc":
            self._on_tc(msg, sender)

    def _on_hello(self, msg, sender):
        sym, asym, mprs, vtime = msg.payload
        now = self.now
        link = self.links.setdefault(sender, [0.0, 0.0])
        link[0] = now + vtime
        if self.id in sym or self.id in asym:
            link[1] = now + vtime
        if link[1] > now:
            self.two_hop[sender] = (frozenset(n for n in sym if n != self.id), now + vtime)
        else:
            self.two_hop.pop(sender, None)
        if self.id in mprs and link[1] > now:
            self.selectors[sender] = now + vtime
        else:
            self.selectors.pop(sender, None)
        self._recompute()

    def _on_tc(self, msg, sender):
        if msg.origin == self.id:
            return
        key = (msg.origin, msg.seq)
        if key in self.seen:
            return
        advertised, vtime = msg.payload
        self.seen[key] = self.now + vtime
        if sender not in self.sym_neighbors():
            return
        cur = self.topology.get(msg.origin)
        if cur is not None and msg.seq < cur[0]:
            return
        self.topology[msg.origin] = (msg.seq, frozenset(advertised), self.now + vtime)
        self._recompute_routes()
        if sender in self.mpr_selectors() and msg.hop_limit > 1:
            self.sim.record("tc-fwd", self.id, origin=msg.origin, seq=msg.seq)
            self.send(msg.forwarded())

    # -- state derivation ---------------------------------------------------
    def _recompute(self):
        now = self.now
        sym = self.sym_neighbors()
        two = {n: s for n, (s, until) in self.two_hop.items() if n in sym and until > now}
        self.mprs = olsr_select_mprs(sym, two, self.id)
        self._recompute_routes()

    def adjacency(self) -> dict[int, set[int]]:
        """Directed reachability: ``v in adj[u]`` means ``v`` is reachable via ``u``.

        TC edges point from the originator to what it advertises; an undirected
        reading would keep a dead link alive through our own selector's TC.
        """
        now = self.now
        sym = self.sym_neighbors()
        adj: dict[int, set[int]] = {self.id: set(sym)}
        for n in sym:
            entry = self.two_hop.get(n)
            if entry and entry[1] > now:
                adj.setdefault(n, set()).update(entry[0])
        for origin, (_, advertised, until) in self.topology.items():
            if until > now:
                adj.setdefault(origin, set()).update(advertised)
        return adj

    def _recompute_routes(self):
        now = self.now
        adj = self.adjacency()
        first: dict[int, int] = {}
        dist = {self.id: 0}
        queue = deque([self.id])
        while queue:
            u = queue.popleft()
            for v in sorted(adj.get(u, ())):
                if v in dist:
                    continue
                dist[v] = dist[u] + 1
                first[v] = v if u == self.id else first[u]
                queue.append(v)
        self.table = {d: RouteEntry(d, first[d], dist[d], 0, now, INF)
                      for d in first}

    def on_link_failure(self, next_hop: int, frame):
        link = self.links.get(next_hop)
        if link is not None:
            link[1] = self.now
        self.two_hop.pop(next_hop, None)
        self.selectors.pop(next_hop, None)
        self._recompute()
        if frame.kind == "data":
            self.drop(frame.payload, "link-break")

    # -- data ---------------------------------------------------------------
    def forward(self, pkt, prev_hop):
        e = self.table.get(pkt.dst)
        if e is None:
            self.drop(pkt, "no-route")
        else:
            self.send_data(pkt, e.next_hop)

    def routes(self):
        return dict(self.table)
