"""Received power versus distance, with and without fading."""
import numpy as np

from vanetsim import radio as rd

rp = rd.RadioParams()
print(f"wavelength {rp.wavelength} m, p_tx {rp.p_tx} W, range {rp.range_R} m")
print(f"receive threshold (power at range): {rp.rx_threshold:.3e} W\n")

print(" d [m]   Friis [W]     ratio [dB]   path loss [dB]")
for d in (1, 10, 50, 100, 200, 400):
    print(f"{d:5d} {rd.friis_rx_power(d, rp):12.3e} {rd.power_ratio_db(d, rp):12.2f}"
          f" {rd.path_loss_db(d, rp):14.2f}")

# path loss can be inverted back to a distance, which is what localization relies on
pl = rd.path_loss_db(137.0, rp)
print("\ninverted 137 m:", rd.invert_path_loss(pl, rp))

# fading keeps the mean but spreads the power; the spread grows with distance
rng = np.random.default_rng(1)
sched = rd.NakagamiSchedule()
for d in (50.0, 150.0, 300.0):
    mean = rd.friis_rx_power(d, rp)
    draws = rd.nakagami_sample(np.full(20_000, mean), np.full(20_000, d), sched, rng)
    print(f"d={d:5.0f} m  m={sched.shape_at(d)}  mean ratio {draws.mean() / mean:.3f}"
          f"  below threshold {np.mean(draws < rp.rx_threshold):.1%}")
