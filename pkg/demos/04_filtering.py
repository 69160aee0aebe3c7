"""Tracking a random walk on the sphere.

The state moves by normalized addition of noise drawn from a vMF mixture
and is observed through noisy azimuth/elevation. The reapproximation filter
keeps five posterior points and a precomputed noise point set; the particle
filter samples the true noise directly. Both share truth trajectories.
"""

import warnings

from hdmr.harness import SimConfig, benchmark

warnings.simplefilter("ignore", RuntimeWarning)
cfg = SimConfig(num_runs=20, num_steps=30, n_w_list=[30, 100], pf_particles_list=[100, 500])
results, table, _ = benchmark(cfg)
print(f"{cfg.num_runs} runs x {cfg.num_steps} steps, measurement variance {cfg.meas_noise_var}")
print(f"{'method':>7} {'samples':>8} {'RMSE [rad]':>11} {'ms/step':>8}")
for row in table:
    print(f"{row['method']:>7} {row['samples']:8d} {row['rmse_rad']:11.4f} {row['runtime_ms_per_step']:8.2f}")
