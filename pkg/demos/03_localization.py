"""Locating a sender from two signal-strength readings along the receiver's track."""
import random

from vanetsim import localization as lz

scene = lz.Scene(sender=(600.0, 450.0))
obs = lz.measure(scene)
res = lz.localize(scene)
print("readings x1, x2   :", round(obs.x1, 3), round(obs.x2, 3))
print("bearing phi [rad] :", round(res.phi, 5))
print("candidates        :", res.candidates)
print("probe [dB]        :", round(obs.trend_probe, 6), "-> candidate", res.chosen)
print("relative error    :", f"{lz.localization_error(scene, res):.4%}")

# a common calibration offset on both readings: distance scales, bearing drifts
rng = random.Random(3)
errs = []
for _ in range(300):
    s = lz.random_scene(rng, noise_db=0.5)
    try:
        errs.append(lz.localization_error(s, lz.localize(s)))
    except lz.LocalizationError:
        errs.append(float("inf"))
errs.sort()
print(f"\n+/-0.5 dB: median error {errs[len(errs) // 2]:.2%},"
      f" rejected {sum(e == float('inf') for e in errs)} of {len(errs)}")
