import itertools
import math

import networkx as nx
import numpy as np
import pytest

from vanetsim.config import ChannelSpec, RunConfig, TrafficSpec
from vanetsim.engine import Simulation
from vanetsim.routing import dymo
from vanetsim.routing.base import INF, ControlMessage
from vanetsim.routing.olsr import olsr_select_mprs
from vanetsim.routing.timers import ProtocolTimers, apply_mod_preset, resolve_protocol

IDEAL = ChannelSpec(fading=False, collisions=False)


def graph_sim(protocol, edges, n=None, seed=1, duration=120.0, log=False):
    cfg = RunConfig(protocol=protocol, duration=duration, seed=seed, channel=IDEAL,
                    traffic=TrafficSpec(start=0.0))
    return Simulation(cfg, graph=edges, flows=[], n_nodes=n, record_log=log)


def cut(sim, a, b):
    nb = sim.channel.nbrs
    nb[a] = nb[a][nb[a] != b]
    nb[b] = nb[b][nb[b] != a]


def bfs_check(sim, g):
    """Every node's table matches BFS hop counts and uses a shortest first hop."""
    dist = dict(nx.all_pairs_shortest_path_length(g))
    for u in g:
        table = sim.agents[u].routes()
        assert set(table) == set(dist[u]) - {u}
        for d, e in table.items():
            assert e.metric == dist[u][d]
            assert g.has_edge(u, e.next_hop) and dist[e.next_hop][d] == dist[u][d] - 1


def spy_control(sim):
    sent = []
    orig = sim.send_control

    def spy(node, msg, dst):
        sent.append((sim.now, node, msg, dst))
        orig(node, msg, dst)

    sim.send_control = spy
    return sent


# -- timers -------------------------------------------------------------------

def test_mod_presets():
    t = ProtocolTimers()
    d = apply_mod_preset(t, "MOD_DSDV")
    assert (d.dsdv_periodic, d.dsdv_trigger_min_gap, d.dsdv_settling) == (30.0, 2.0, 12.0)
    o = apply_mod_preset(t, "mod-olsr")
    assert (o.olsr_hello, o.olsr_tc) == (1.0, 2.5)
    y = apply_mod_preset(t, "MOD_DYMO")
    assert (y.dymo_route_timeout, y.dymo_rreq_wait) == (2.5, 0.5)
    assert y.dymo_rreq_tries == t.dymo_rreq_tries and y.olsr_hello == t.olsr_hello
    assert resolve_protocol("mod-olsr", t) == ("olsr", o)
    assert resolve_protocol("dsdv", t) == ("dsdv", t)
    with pytest.raises(ValueError):
        apply_mod_preset(t, "MOD_AODV")
    with pytest.raises(ValueError):
        ProtocolTimers(olsr_hello=0.0)


# -- DSDV ---------------------------------------------------------------------

def test_dsdv_isolated_node_dumps_only_itself():
    sim = graph_sim("dsdv", [(1, 2)], n=3, duration=50.0)
    sent = spy_control(sim)
    sim.finish()
    dumps = [m for _, node, m, _ in sent if node == 0]
    assert len(dumps) >= 3
    for m in dumps:
        full, entries = m.payload
        assert full and len(entries) == 1
        dest, seq, metric = entries[0]
        assert dest == 0 and metric == 0 and seq % 2 == 0
    seqs = [m.payload[1][0][1] for m in dumps]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)


def offer(agent, sender, dest, seq, metric):
    agent.on_control(ControlMessage("dsdv-update", sender, 1, (False, ((dest, seq, metric),)), 1, 1),
                     sender)


def test_dsdv_adoption_rules():
    sim = graph_sim("dsdv", [(0, 1), (0, 2), (0, 3)])
    a = sim.agents[0]
    offer(a, 1, 9, 10, 2)
    assert (a.table[9].seq, a.table[9].metric) == (10, 3)
    offer(a, 2, 9, 12, 4)                   # newer seq wins despite worse metric
    assert (a.table[9].seq, a.table[9].metric, a.table[9].next_hop) == (12, 5, 2)
    offer(a, 3, 9, 12, 0)                   # equal seq, better metric
    assert (a.table[9].metric, a.table[9].next_hop) == (1, 3)
    offer(a, 1, 9, 12, 0)                   # equal seq, equal metric: keep
    assert a.table[9].next_hop == 3
    offer(a, 1, 9, 11, 0)                   # stale seq
    assert a.table[9].seq == 12
    a.on_control(ControlMessage("dsdv-update", 1, 2, (False, (("x", None, 1), (5,))), 1, 2), 1)
    assert a.malformed == 2


def test_dsdv_three_node_line():
    sim = graph_sim("dsdv", [(0, 1), (1, 2)], duration=40.0)
    sim.run_until(32.0)
    e = sim.agents[0].routes()[2]
    assert (e.next_hop, e.metric) == (1, 2)
    assert sim.agents[2].routes()[0].next_hop == 1


def test_dsdv_broken_link_advertised_odd_infinite():
    sim = graph_sim("dsdv", [(0, 1), (1, 2)], duration=60.0)
    sim.run_until(32.0)
    sent = spy_control(sim)
    a = sim.agents[0]
    before = a.table[2].seq
    frame = type("F", (), {"kind": "routing-control", "payload": None})()
    a.on_link_failure(1, frame)
    assert a.table[2].metric == INF and a.table[2].seq == before + 1
    sim.run_until(34.0)
    adverts = [entry for _, node, m, _ in sent if node == 0 for entry in m.payload[1] if entry[0] == 2]
    assert adverts and adverts[0][1] % 2 == 1 and adverts[0][2] == INF


def test_dsdv_neighbor_appearing_triggers_update():
    sim = graph_sim("dsdv", [(0, 1)], n=3, duration=60.0)
    sim.run_until(20.0)
    sim.channel.nbrs[1] = np.array([0, 2])
    sim.channel.nbrs[2] = np.array([1])
    sent = spy_control(sim)
    sim.run_until(40.0)
    # node 2's next dump reaches 1, which advertises the new route incrementally
    first_dump = min(t for t, node, _, _ in sent if node == 2)
    incr = [t for t, node, m, _ in sent if node == 1 and not m.payload[0]
            and any(e[0] == 2 for e in m.payload[1])]
    assert incr and incr[0] - first_dump <= ProtocolTimers().dsdv_trigger_min_gap + 0.05
    assert sim.agents[0].routes()[2].metric == 2


@pytest.mark.parametrize("seed", range(8))
def test_dsdv_matches_bfs_on_random_graphs(seed):
    g = connected_graph(8, 0.35, seed)
    sim = graph_sim("dsdv", list(g.edges), n=8, seed=seed, duration=60.0)
    sim.run_until(44.0)
    bfs_check(sim, g)


# -- OLSR ---------------------------------------------------------------------

def connected_graph(n, p, seed):
    k = 0
    while True:
        g = nx.gnp_random_graph(n, p, seed=1000 * seed + k)
        if nx.is_connected(g):
            return g
        k += 1


def test_mpr_examples():
    assert olsr_select_mprs({"B"}, {"B": {"A", "C"}}, "A") == {"B"}
    # star: a leaf reaches the other leaves only through the hub
    assert olsr_select_mprs({0}, {0: {1, 2, 3, 4}}, 1) == {0}
    assert olsr_select_mprs(set(), {}, 0) == frozenset()
    assert olsr_select_mprs({1, 2}, {1: {0, 2}, 2: {0, 1}}, 0) == frozenset()


def brute_force_cover(one_hop, reach, targets):
    for k in range(len(one_hop) + 1):
        for combo in itertools.combinations(sorted(one_hop), k):
            if set().union(set(), *(reach[n] for n in combo)) >= targets:
                return k


@pytest.mark.parametrize("seed", range(40))
def test_mpr_cover_and_size_against_brute_force(seed):
    g = nx.gnp_random_graph(6, 0.5, seed=seed)
    for u in g:
        one = set(g[u])
        two = {n: set(g[n]) for n in one}
        mprs = olsr_select_mprs(one, two, u)
        reach = {n: two[n] - one - {u} for n in one}
        targets = set().union(set(), *reach.values())
        assert mprs <= one
        assert set().union(set(), *(reach[n] for n in mprs)) == targets
        assert len(mprs) <= brute_force_cover(one, reach, targets) + 1


def test_olsr_five_node_graph_matches_bfs():
    g = nx.Graph([(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)])
    sim = graph_sim("olsr", list(g.edges), duration=30.0)
    sim.run_until(3 * ProtocolTimers().olsr_tc)
    bfs_check(sim, g)


@pytest.mark.parametrize("seed", range(8))
def test_olsr_matches_bfs_on_random_graphs(seed):
    g = connected_graph(8, 0.35, seed)
    sim = graph_sim("olsr", list(g.edges), n=8, seed=seed, duration=30.0)
    sim.run_until(15.0)
    bfs_check(sim, g)


def test_olsr_only_mprs_forward_tc():
    # hub 0 with leaves 1..4 and a tail 4-5: only 0 and 4 are anybody's MPR
    sim = graph_sim("olsr", [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)], duration=40.0, log=True)
    sim.finish()
    fwd = {node for _, ev, node, _ in sim.log if ev == "tc-fwd"}
    assert fwd and fwd <= {0, 4}
    assert sim.agents[1].mprs == {0} and sim.agents[5].mprs == {4}


def test_olsr_silent_neighbor_expires():
    g = nx.Graph([(0, 1), (1, 2), (2, 3), (3, 0)])
    sim = graph_sim("olsr", list(g.edges), duration=60.0)
    sim.run_until(15.0)
    assert sim.agents[0].routes()[1].metric == 1
    cut(sim, 0, 1)
    t = ProtocolTimers()
    # link expiry, then a fresh MPR choice at 1 and a TC from 2 advertising it
    sim.run_until(15.0 + 3 * t.olsr_hello + 2 * t.olsr_tc + 3.0)
    e = sim.agents[0].routes()[1]
    assert (e.metric, e.next_hop) == (3, 3)


# -- DYMO ---------------------------------------------------------------------

def rreqs_by(sim, node):
    return sum(1 for _, ev, n, d in sim.log if ev == "ctrl-orig" and n == node and d["kind"] == "rreq")


def test_dymo_two_nodes():
    sim = graph_sim("dymo", [(0, 1)], duration=5.0, log=True)
    sim.inject(0, 1)
    sim.finish()
    kinds = [d["kind"] for _, ev, _, d in sim.log if ev == "ctrl-orig"]
    assert kinds == ["rreq", "rrep"]
    assert sim.metrics.data_delivered == 1
    assert sim.agents[0].table[1].metric == 1


def test_dymo_three_node_line():
    sim = graph_sim("dymo", [(0, 1), (1, 2)], duration=3.0, log=True)
    sim.inject(0, 2)
    sim.run_until(1.0)
    fwd = sim.agents[0].routes()[2]
    back = sim.agents[2].routes()[0]
    assert (fwd.next_hop, fwd.metric) == (1, 2)
    assert (back.next_hop, back.metric) == (1, 2)
    assert sim.metrics.data_delivered == 1


def test_dymo_partitioned_destination():
    sim = graph_sim("dymo", [(0, 1)], n=3, duration=20.0, log=True)
    sim.inject(0, 2)
    sim.finish()
    assert rreqs_by(sim, 0) == ProtocolTimers().dymo_rreq_tries
    assert sim.metrics.drops["unreachable"] == 1


def test_dymo_buffer_cap():
    sim = graph_sim("dymo", [(0, 1)], n=3, duration=20.0)
    for _ in range(dymo.BUFFER_CAP + 5):
        sim.inject(0, 2)
    sim.finish()
    assert sim.metrics.drops["buffer-overflow"] == 5
    assert sim.metrics.drops["unreachable"] == dymo.BUFFER_CAP


@pytest.mark.parametrize("seed", range(5))
def test_dymo_single_rebroadcast_per_request(seed):
    g = connected_graph(10, 0.4, seed)
    sim = graph_sim("dymo", list(g.edges), n=10, seed=seed, duration=10.0)
    for dst in range(1, 10):
        sim.inject(0, dst)
    sim.finish()
    counts = [c for a in sim.agents for c in a.rebroadcasts.values()]
    assert counts and max(counts) == 1
    assert sim.metrics.data_delivered == 9


def test_dymo_route_expires_and_rediscovers():
    sim = graph_sim("dymo", [(0, 1)], duration=20.0, log=True)
    sim.inject(0, 1)
    sim.run_until(1.0)
    assert 1 in sim.agents[0].routes()
    sim.run_until(1.0 + ProtocolTimers().dymo_route_timeout + 0.1)
    assert 1 not in sim.agents[0].routes()
    sim.inject(0, 1)
    sim.finish()
    assert rreqs_by(sim, 0) == 2 and sim.metrics.data_delivered == 2


def test_dymo_rerr_after_break():
    sim = graph_sim("dymo", [(0, 1), (1, 2)], duration=20.0, log=True)
    sim.inject(0, 2)
    sim.run_until(1.0)
    cut(sim, 1, 2)
    sim.inject(0, 2)
    sim.run_until(2.0)
    rerrs = [n for _, ev, n, d in sim.log if ev == "ctrl-orig" and d["kind"] == "rerr"]
    assert 1 in rerrs
    assert 2 not in sim.agents[0].routes()
    sim.inject(0, 2)
    sim.finish()
    # 2 is now partitioned away: one fresh discovery that runs out of tries
    assert rreqs_by(sim, 0) == 1 + ProtocolTimers().dymo_rreq_tries
    assert sim.metrics.drops["link-break"] == 1
    assert sim.metrics.drops["unreachable"] == 1


def test_dymo_rerr_rate_limit():
    sim = graph_sim("dymo", [(0, 1)], duration=5.0, log=True)
    a = sim.agents[0]
    for k in range(25):
        a._send_rerr([100 + k])
    rerrs = [n for _, ev, n, d in sim.log if ev == "ctrl-orig" and d["kind"] == "rerr"]
    assert len(rerrs) == dymo.RERR_RATE_LIMIT


def test_dymo_sequence_numbers_increase():
    sim = graph_sim("dymo", [(0, 1)], n=3, duration=20.0, log=True)
    sim.inject(0, 2)
    sim.finish()
    seqs = [d["seq"] for _, ev, n, d in sim.log if ev == "ctrl-orig" and n == 0]
    assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)
