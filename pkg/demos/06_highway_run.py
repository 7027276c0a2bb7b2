"""One short highway run per protocol, with the three headline metrics."""
from vanetsim.config import RunConfig
from vanetsim.engine import compute_metrics, run
from vanetsim.mobility import HighwayScenario

scenario = HighwayScenario(node_count=25, speed=15.0)
print("protocol   thr [kb/s]  delay [ms]   NRL   delivered")
for protocol in ("dsdv", "olsr", "dymo", "mod-dsdv", "mod-olsr", "mod-dymo"):
    cfg = RunConfig(protocol=protocol, mac="802.11p", duration=60.0, seed=1, scenario=scenario)
    m = run(cfg)
    rep = compute_metrics(m)
    delay = f"{1e3 * rep.e2ed_s:10.1f}" if rep.e2ed_s is not None else "         -"
    nrl = f"{rep.nrl:6.2f}" if rep.nrl is not None else "     -"
    print(f"{protocol:9s} {rep.throughput_bps / 1e3:10.1f} {delay} {nrl} {rep.delivery_ratio:9.1%}")

# where the undelivered packets went
print("\ndrop reasons (dymo):", dict(run(RunConfig(protocol="dymo", duration=60.0,
                                                   scenario=scenario)).drops))
