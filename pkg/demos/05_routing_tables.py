"""Proactive and on-demand routing converge to shortest paths on a static graph."""
import networkx as nx

from vanetsim.config import ChannelSpec, RunConfig
from vanetsim.engine import Simulation
from vanetsim.routing.olsr import olsr_select_mprs

g = nx.Graph([(0, 1), (1, 2), (2, 3), (3, 4), (1, 3), (4, 5)])
ideal = ChannelSpec(fading=False, collisions=False)


def build(protocol):
    return Simulation(RunConfig(protocol=protocol, duration=60.0, channel=ideal),
                      graph=list(g.edges), flows=[])


for protocol, settle in (("dsdv", 44.0), ("olsr", 15.0)):
    sim = build(protocol)
    sim.run_until(settle)
    table = sim.agents[0].routes()
    print(protocol, {d: (e.next_hop, int(e.metric)) for d, e in sorted(table.items())})

print("BFS ", dict(sorted(nx.single_source_shortest_path_length(g, 0).items())))

# MPRs of node 1: a subset of neighbours reaching every two-hop node
print("MPRs of 1:", set(olsr_select_mprs(set(g[1]), {n: set(g[n]) for n in g[1]}, 1)))

# DYMO has no table until someone needs a route
sim = build("dymo")
sim.inject(0, 5)
sim.run_until(1.0)
print("dymo", {d: (e.next_hop, int(e.metric)) for d, e in sorted(sim.agents[0].routes().items())},
      "delivered:", sim.metrics.data_delivered)
