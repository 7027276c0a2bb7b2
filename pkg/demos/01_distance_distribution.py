"""How far apart are two vehicles after t seconds, and how likely can they still talk?

Speeds change at random epochs, so the separation spreads out over time.
The closed-form density and a Monte-Carlo run over the same epoch process
should agree.
"""
import numpy as np

from vanetsim import analytic as an
from vanetsim.mobility import sample_distances

params = an.MobilityParams(mu=1.0, sigma=3.0, beta=1.0)
rng = np.random.default_rng(0)

print(" t   mean(model)  mean(MC)  var(model)  var(MC)")
for t in (1.0, 5.0, 10.0):
    mean, var = an.moments(t, params)
    d = sample_distances(t, params, 50_000, rng)
    print(f"{t:4.0f} {mean:10.3f} {d.mean():9.3f} {var:11.3f} {d.var():8.3f}")

# probability that the pair is still within r metres, at a few horizons
print("\n r [m]   P(t=1)   P(t=5)   P(t=10)")
for r in (10, 50, 100, 200):
    row = [an.comm_probability(r, t, params) for t in (1.0, 5.0, 10.0)]
    print(f"{r:5d} " + " ".join(f"{p:8.4f}" for p in row))

# the efficiency column is the same number expressed in percent
print("\nefficiency at r=200, t=10:", round(an.efficiency(200.0, 10.0), 4), "%")
