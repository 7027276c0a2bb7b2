"""Discrete-event core: one run binds mobility, radio, MAC, routing and CBR traffic."""

from __future__ import annotations

import hashlib
import heapq
import itertools
import math
import random
import struct
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .mac import CONTROL, DATA, Frame, Mac, decodes, profile_for
from .mobility import highway_step, initial_placement
from .radio import NakagamiSchedule, RadioParams, link_gain
from .routing import AGENTS, resolve_protocol
from .routing.base import IP_UDP_BYTES

DEFAULT_TTL = 64


@dataclass
class DataPacket:
    uid: int
    flow: int
    src: int
    dst: int
    born_at: float
    size: int
    ttl: int = DEFAULT_TTL
    hops: int = 0


@dataclass(frozen=True)
class Flow:
    fid: int
    src: int
    dst: int


@dataclass
class RunMetrics:
    duration: float
    data_sent: int = 0
    data_delivered: int = 0
    bytes_delivered: int = 0
    routing_pkts_tx: int = 0
    delay_sum: float = 0.0
    delay_count: int = 0
    drops: Counter = field(default_factory=Counter)
    per_flow: dict = field(default_factory=dict)   # fid -> [sent, delivered, bytes, delay_sum]
    events: int = 0
    digest: str = ""
    warnings: list = field(default_factory=list)


@dataclass(frozen=True)
class MetricsReport:
    throughput_bps: float
    throughput_Bps: float
    e2ed_s: float | None
    nrl: float | None
    delivery_ratio: float | None


def compute_metrics(m: RunMetrics, duration: float | None = None) -> MetricsReport:
    """Throughput over the whole run (bits/s headline, bytes/s alongside), mean delay, NRL."""
    duration = m.duration if duration is None else duration
    if not duration > 0:
        raise ValueError("duration must be > 0")
    bps = m.bytes_delivered * 8.0 / duration
    return MetricsReport(
        bps, m.bytes_delivered / duration,
        m.delay_sum / m.delay_count if m.delay_count else None,
        m.routing_pkts_tx / m.data_delivered if m.data_delivered else None,
        m.data_delivered / m.data_sent if m.data_sent else None,
    )


# ---------------------------------------------------------------------------
# channels


class GeometricChannel:
    """Friis mean power times alpha, optional Nakagami fading; neighbors within range_R."""

    def __init__(self, radio: RadioParams, fading: bool,
                 schedule: NakagamiSchedule | None = None):
        self.radio = radio
        self.fading = fading
        self.schedule = schedule or NakagamiSchedule()
        self.rx_threshold = radio.rx_threshold
        self._k = radio.alpha * radio.p_tx * link_gain(radio)

    def refresh(self, xy: np.ndarray):
        diff = xy[:, None, :] - xy[None, :, :]
        d = np.sqrt((diff ** 2).sum(axis=-1))
        n = len(xy)
        self.dist = d
        in_range = (d <= self.radio.range_R) & ~np.eye(n, dtype=bool)
        self.nbrs = [np.flatnonzero(in_range[i]) for i in range(n)]
        self.mean = self._k / np.maximum(d, self.radio.d_min) ** 2
        self.shapes = self.schedule.shape_at(d) if self.fading else None

    def neighbors(self, i: int) -> np.ndarray:
        return self.nbrs[i]

    def powers(self, i: int, rng: np.random.Generator) -> np.ndarray:
        js = self.nbrs[i]
        mean = self.mean[i, js]
        if not self.fading or js.size == 0:
            return mean
        m = self.shapes[i, js]
        return rng.gamma(m, mean / m)


class GraphChannel:
    """Loss-free channel over a fixed adjacency; used for protocol-level checks."""

    rx_threshold = 1.0

    def __init__(self, adjacency: dict[int, set[int]], n: int):
        self.nbrs = [np.array(sorted(adjacency.get(i, ())), dtype=int) for i in range(n)]

    def refresh(self, xy):
        pass

    def neighbors(self, i: int) -> np.ndarray:
        return self.nbrs[i]

    def powers(self, i: int, rng) -> np.ndarray:
        return np.full(self.nbrs[i].size, 100.0)


# ---------------------------------------------------------------------------
# transmissions


class _Tx:
    __slots__ = ("node", "frame", "end", "receivers", "powers", "interf")

    def __init__(self, node, frame, end, receivers, powers):
        self.node = node
        self.frame = frame
        self.end = end
        self.receivers = receivers
        self.powers = powers
        self.interf = [0.0] * len(receivers)


def edges_to_adjacency(edges, n: int) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def choose_flows(n: int, count: int, rng: np.random.Generator) -> list[Flow]:
    """Distinct ordered (src, dst) pairs with src != dst, drawn without replacement."""
    pairs = [(s, d) for s in range(n) for d in range(n) if s != d]
    idx = rng.choice(len(pairs), size=min(count, len(pairs)), replace=False)
    return [Flow(k, *pairs[i]) for k, i in enumerate(idx)]


class Simulation:
    """One run.  Pass ``positions`` (static coordinates) or ``graph`` (edge list
    over nodes ``0..n-1``) to replace the highway scenario."""

    def __init__(self, config: RunConfig, positions=None, graph=None, flows=None,
                 record_log: bool = False, n_nodes: int | None = None):
        self.config = config
        self.now = 0.0
        self._queue: list = []
        self._seq = itertools.count()
        self._hash = hashlib.blake2b(digest_size=16)
        self.log: list | None = [] if record_log else None
        self.counters: Counter = Counter()
        self.metrics = RunMetrics(config.duration)

        ss = np.random.SeedSequence(config.seed)
        s_place, s_fade, s_traffic, s_mac, s_route = ss.spawn(5)
        self.rng_place = np.random.default_rng(s_place)
        self.rng_fading = np.random.default_rng(s_fade)
        self.rng_traffic = np.random.default_rng(s_traffic)

        self.scenario = config.scenario
        self.state = None
        if graph is not None:
            n = n_nodes if n_nodes is not None else 1 + max(max(e) for e in graph)
            self.channel = GraphChannel(edges_to_adjacency(graph, n), n)
            self.mobile = False
        elif positions is not None:
            xy = np.asarray(positions, dtype=float)
            n = len(xy)
            self.channel = GeometricChannel(config.radio, config.channel.fading)
            self.channel.refresh(xy)
            self.mobile = False
        else:
            self.state = initial_placement(self.scenario, self.rng_place)
            n = self.scenario.node_count
            self.channel = GeometricChannel(config.radio, config.channel.fading)
            self.channel.refresh(self.state.coords(self.scenario))
            self.mobile = self.scenario.speed > 0
        self.n = n
        self.collisions = config.channel.collisions

        profile = profile_for(config.mac, config.bitrate)
        self.profile = profile
        base, timers = resolve_protocol(config.protocol, config.timers)
        mac_seeds = s_mac.generate_state(n, dtype=np.uint64)
        route_seeds = s_route.generate_state(n, dtype=np.uint64)
        self.busy_until = [0.0] * n
        self.macs = [Mac(i, profile, self, random.Random(int(mac_seeds[i])), config.queue_depth)
                     for i in range(n)]
        self.agents = [AGENTS[base](i, self, timers, random.Random(int(route_seeds[i])))
                       for i in range(n)]
        self.transmitting = [0] * n
        self.receiving: list[dict[int, tuple[_Tx, int]]] = [{} for _ in range(n)]
        self.outstanding: dict[int, DataPacket] = {}
        self._uids = itertools.count()

        if flows is None:
            wanted = config.traffic.flows
            if wanted > n * (n - 1):
                self.metrics.warnings.append(f"flow count clamped from {wanted} to {n * (n - 1)}")
            flows = choose_flows(n, wanted, self.rng_traffic)
        self.flows = [f if isinstance(f, Flow) else Flow(k, *f) for k, f in enumerate(flows)]
        for f in self.flows:
            self.metrics.per_flow[f.fid] = [0, 0, 0, 0.0]

        for agent in self.agents:
            agent.start()
        if self.mobile:
            self.at(config.mobility_step, self._mobility)
        t = config.traffic
        for f in self.flows:
            phase = float(self.rng_traffic.uniform(0.0, t.interval))
            self.at(t.start + phase, self._generate, f, t.start + phase, 0)

    # -- event queue -------------------------------------------------------
    def at(self, time: float, fn, *args):
        if time < self.now:
            time = self.now
        heapq.heappush(self._queue, (time, next(self._seq), fn, args))

    def run_until(self, t_end: float):
        q = self._queue
        h = self._hash
        pop = heapq.heappop
        while q and q[0][0] <= t_end:
            time, seq, fn, args = pop(q)
            self.now = time
            self.metrics.events += 1
            h.update(struct.pack("<d", time))
            h.update(fn.__name__.encode())
            fn(*args)
        self.now = max(self.now, t_end)

    def finish(self) -> RunMetrics:
        self.run_until(self.config.duration)
        for pkt in list(self.outstanding.values()):
            self.drop(pkt, "in-flight")
        self.metrics.digest = self._hash.hexdigest()
        return self.metrics

    # -- bookkeeping -------------------------------------------------------
    def record(self, event: str, node: int, **detail):
        self.counters[event] += 1
        if self.log is not None:
            self.log.append((self.now, event, node, detail))

    def drop(self, pkt: DataPacket, reason: str):
        if self.outstanding.pop(pkt.uid, None) is None:
            return
        self.metrics.drops[reason] += 1
        self.record("drop", pkt.src, uid=pkt.uid, reason=reason)

    def mac_dropped(self, node: int, frame: Frame, reason: str):
        if frame.kind == DATA:
            self.drop(frame.payload, reason)
        else:
            self.record("ctrl-drop", node, reason=reason)

    def peer_mac(self, node: int) -> Mac:
        return self.macs[node]

    def occupy(self, a: int, b: int, until: float):
        bu = self.busy_until
        for i in (a, b):
            if bu[i] < until:
                bu[i] = until
            for j in self.channel.neighbors(i):
                if bu[j] < until:
                    bu[j] = until

    # -- traffic -----------------------------------------------------------
    def _generate(self, flow: Flow, t0: float, k: int):
        t = self.config.traffic
        pkt = DataPacket(next(self._uids), flow.fid, flow.src, flow.dst, self.now, t.packet_size)
        self.metrics.data_sent += 1
        self.metrics.per_flow[flow.fid][0] += 1
        self.outstanding[pkt.uid] = pkt
        self.agents[flow.src].originate(pkt)
        nxt = t0 + (k + 1) * t.interval
        if nxt < self.config.duration:
            self.at(nxt, self._generate, flow, t0, k + 1)

    def inject(self, src: int, dst: int, size: int = 512) -> DataPacket:
        """Hand one data packet to ``src`` now (outside any CBR flow)."""
        pkt = DataPacket(next(self._uids), -1, src, dst, self.now, size)
        self.metrics.data_sent += 1
        self.outstanding[pkt.uid] = pkt
        self.agents[src].originate(pkt)
        return pkt

    def _mobility(self):
        self.state = highway_step(self.scenario, self.state, self.config.mobility_step)
        self.channel.refresh(self.state.coords(self.scenario))
        nxt = self.now + self.config.mobility_step
        if nxt <= self.config.duration:
            self.at(nxt, self._mobility)

    # -- routing -> MAC ----------------------------------------------------
    def send_control(self, node: int, msg, dst: int):
        self.macs[node].enqueue(Frame(CONTROL, node, dst, msg.size, self.now, msg))

    def send_data(self, node: int, pkt: DataPacket, next_hop: int):
        self.macs[node].enqueue(Frame(DATA, node, next_hop, pkt.size + IP_UDP_BYTES, self.now, pkt))

    def link_failure(self, node: int, frame: Frame):
        self.agents[node].on_link_failure(frame.dst, frame)

    # -- PHY ---------------------------------------------------------------
    def start_tx(self, node: int, frame: Frame, airtime: float, attempts: int):
        end = self.now + airtime
        receivers = self.channel.neighbors(node)
        powers = self.channel.powers(node, self.rng_fading)
        tx = _Tx(node, frame, end, receivers.tolist(), powers.tolist())
        if frame.kind == CONTROL and attempts == 0:
            self.metrics.routing_pkts_tx += 1
        bu = self.busy_until
        if bu[node] < end:
            bu[node] = end
        for j in tx.receivers:
            if bu[j] < end:
                bu[j] = end
        if self.collisions:
            # our own ongoing receptions are lost (half duplex)
            for other, k in self.receiving[node].values():
                other.interf[k] = math.inf
            self.transmitting[node] += 1
            for k, (j, p) in enumerate(zip(tx.receivers, tx.powers)):
                rx = self.receiving[j]
                worst = math.inf if self.transmitting[j] else 0.0
                for other, kk in rx.values():
                    if other.interf[kk] < p:
                        other.interf[kk] = p
                    if other.powers[kk] > worst:
                        worst = other.powers[kk]
                tx.interf[k] = worst
                rx[id(tx)] = (tx, k)
        self.at(end, self._end_tx, tx)

    def _end_tx(self, tx: _Tx):
        frame = tx.frame
        threshold = self.channel.rx_threshold
        ok = []
        for k, (j, p) in enumerate(zip(tx.receivers, tx.powers)):
            if self.collisions:
                del self.receiving[j][id(tx)]
            interf = (tx.interf[k],) if tx.interf[k] > 0 else ()
            if decodes(p, interf, threshold):
                ok.append(j)
        if self.collisions:
            self.transmitting[tx.node] -= 1
        acked = False
        if frame.broadcast:
            for j in ok:
                self._deliver(j, tx.node, frame)
        elif frame.dst in ok:
            acked = True
            self.occupy(tx.node, frame.dst,
                        self.now + self.profile.sifs + self.profile.ack_time)
            self._deliver(frame.dst, tx.node, frame)
        self.macs[tx.node].tx_done(acked)

    def _deliver(self, node: int, sender: int, frame: Frame):
        if frame.kind == CONTROL:
            self.agents[node].on_control(frame.payload, sender)
            return
        pkt: DataPacket = frame.payload
        if pkt.uid not in self.outstanding:
            return
        pkt.hops += 1
        if node == pkt.dst:
            m = self.metrics
            delay = self.now - pkt.born_at
            del self.outstanding[pkt.uid]
            m.data_delivered += 1
            m.bytes_delivered += pkt.size
            m.delay_sum += delay
            m.delay_count += 1
            if pkt.flow in m.per_flow:
                pf = m.per_flow[pkt.flow]
                pf[1] += 1
                pf[2] += pkt.size
                pf[3] += delay
            self.record("deliver", node, uid=pkt.uid, delay=delay, hops=pkt.hops)
            return
        pkt.ttl -= 1
        if pkt.ttl <= 0:
            self.drop(pkt, "ttl")
            return
        self.agents[node].forward(pkt, sender)


def run(config: RunConfig, **kwargs) -> RunMetrics:
    """Execute one run to ``config.duration`` and return its metrics."""
    return Simulation(config, **kwargs).finish()


__all__ = [
    "DataPacket", "Flow", "GeometricChannel", "GraphChannel", "MetricsReport",
    "RunMetrics", "Simulation", "choose_flows", "compute_metrics", "edges_to_adjacency", "run",
]
