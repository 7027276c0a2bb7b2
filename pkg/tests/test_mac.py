import random

import pytest

from vanetsim import mac
from vanetsim.config import ChannelSpec, RunConfig
from vanetsim.engine import Simulation
from vanetsim.mac import CONTROL, Frame, decodes, profile_for
from vanetsim.routing.base import ControlMessage


def graph_sim(edges, n, mac_name="802.11p", protocol="dymo", seed=3, duration=5.0):
    cfg = RunConfig(protocol=protocol, mac=mac_name, duration=duration, seed=seed,
                    channel=ChannelSpec(fading=False, collisions=True))
    return Simulation(cfg, graph=edges, flows=[], n_nodes=n, record_log=True)


def ctrl(sim, src, dst, size=200):
    msg = ControlMessage("rerr", src, 1, (), 1)
    return Frame(CONTROL, src, dst, size, sim.now, msg)


def test_profiles():
    a, p = profile_for("802.11"), profile_for("802.11p")
    assert a.bitrate == 2e6 and p.bitrate == 6e6
    assert (a.slot, a.sifs, a.cw_min, a.cw_max, a.retry_limit) == (20e-6, 10e-6, 31, 1023, 7)
    assert (p.slot, p.sifs, p.cw_min, p.cw_max, p.retry_limit) == (13e-6, 32e-6, 15, 1023, 7)
    assert a.association_required and not p.association_required
    for prof in (a, p):
        assert prof.difs == pytest.approx(prof.sifs + 2 * prof.slot)
    assert profile_for("802.11p", bitrate=12e6).bitrate == 12e6
    with pytest.raises(mac.MacConfigError):
        profile_for("802.3")


def test_airtime():
    p = profile_for("802.11p")
    assert p.airtime(100) == pytest.approx(p.preamble_overhead + 128 * 8 / 6e6)
    assert p.ack_time == pytest.approx(p.preamble_overhead + mac.ACK_BYTES * 8 / 6e6)


def test_oversized_payload_rejected():
    with pytest.raises(mac.MacConfigError):
        Frame(CONTROL, 0, 1, mac.MAX_PAYLOAD + 1, 0.0)


def test_decodes_rules():
    thr = 1.0
    assert not decodes(0.5, (), thr)
    assert decodes(100.0, (), thr)
    assert not decodes(100.0, (), thr, sender=2, receiver=2)
    # 3 dB apart: both lost
    assert not decodes(20.0, (10.0,), thr) and not decodes(10.0, (20.0,), thr)
    # 15 dB apart: the stronger is captured
    strong, weak = 10 ** 1.5 * 10.0, 10.0
    assert decodes(strong, (weak,), thr) and not decodes(weak, (strong,), thr)


def test_backoff_range_mean_and_reproducibility():
    rng = random.Random(8)
    draws = [mac.backoff_slots(15, rng) for _ in range(10_000)]
    assert min(draws) == 0 and max(draws) == 15
    assert sum(draws) / len(draws) == pytest.approx(7.5, rel=0.05)
    again = random.Random(8)
    assert draws[:100] == [mac.backoff_slots(15, again) for _ in range(100)]


def test_unicast_to_missing_receiver_retries_then_fails():
    sim = graph_sim([(0, 2)], 3)
    sim.macs[0].enqueue(ctrl(sim, 0, 1))
    sim.finish()
    assert sim.macs[0].tx_count == profile_for("802.11p").retry_limit + 1
    assert sim.counters["mac-fail"] == 1


def test_unicast_to_neighbor_needs_one_transmission():
    sim = graph_sim([(0, 1)], 2)
    sim.macs[0].enqueue(ctrl(sim, 0, 1))
    sim.finish()
    assert sim.macs[0].tx_count == 1 and sim.counters["mac-fail"] == 0


def test_broadcast_never_retries():
    sim = graph_sim([(0, 2)], 3)
    sim.macs[1].enqueue(ctrl(sim, 1, mac.BROADCAST))
    sim.finish()
    assert sim.macs[1].tx_count == 1 and sim.counters["mac-fail"] == 0


@pytest.mark.parametrize("name, expected", [("802.11", 1), ("802.11p", 0)])
def test_association_once_per_pair(name, expected):
    sim = graph_sim([(0, 1)], 2, mac_name=name)
    for _ in range(3):
        sim.macs[0].enqueue(ctrl(sim, 0, 1))
    sim.run_until(1.0)
    sim.macs[1].enqueue(ctrl(sim, 1, 0))
    sim.finish()
    assert sim.counters["assoc"] == expected
    assert sim.macs[0].tx_count == 3


def test_hidden_terminals_collide_at_common_receiver():
    sim = graph_sim([(0, 1), (1, 2)], 3)
    heard = []
    sim.agents[1].on_control = lambda msg, sender: heard.append(sender)
    sim.macs[0].enqueue(ctrl(sim, 0, mac.BROADCAST, 1000))
    sim.macs[2].enqueue(ctrl(sim, 2, mac.BROADCAST, 1000))
    sim.finish()
    assert heard == []
    sim = graph_sim([(0, 1), (1, 2)], 3)
    heard = []
    sim.agents[1].on_control = lambda msg, sender: heard.append(sender)
    sim.macs[0].enqueue(ctrl(sim, 0, mac.BROADCAST, 1000))
    sim.finish()
    assert heard == [0]


def test_own_transmissions_never_overlap():
    cfg = RunConfig(protocol="olsr", duration=40.0, seed=5)
    sim = Simulation(cfg)
    spans = {}
    orig = sim.start_tx

    def spy(node, frame, airtime, attempts):
        spans.setdefault(node, []).append((sim.now, sim.now + airtime))
        orig(node, frame, airtime, attempts)

    sim.start_tx = spy
    sim.finish()
    assert sum(len(v) for v in spans.values()) > 100
    for iv in spans.values():
        for (a0, a1), (b0, b1) in zip(iv, iv[1:]):
            assert b0 >= a1 - 1e-12
