"""Spatial smoothing in u-space followed by 2D MUSIC.

Run with ``python3 notebooks/02_smoothing_and_doa.py``. The Monte Carlo part
uses 20 trials so it finishes in well under a minute.
"""

import math

import numpy as np

from crtarray.coarray import difference_coarray
from crtarray.designs import spinner_array, t_array
from crtarray.sensing import (Coupling, Scenario, monte_carlo, music_2d, random_sources, rmse,
                              simulate, vectorized_coarray_signal)
from crtarray.smoothing import (method1_subarrays, method2_subarrays, selection_matrices,
                                smoothed_covariance, to_u_space)

# %% Contiguous u-space extents
t, s = t_array(13), spinner_array(13)
print("T array square half-width:", to_u_space(t.generator_matrix, difference_coarray(t)).l_sq)
print("spinner hexagon radius:", to_u_space(s.generator_matrix, difference_coarray(s)).l_R)

# %% Hexagonal windows and shift-invariance selectors
plan = method2_subarrays(7, 3)
J = selection_matrices(7, 3)
print(f"Method II: {plan.n_subarrays} windows of {plan.n_elements} elements")
print("elements without a +x neighbour:", sorted(set(range(1, 38)) - J["x1"].numbers()))

# %% One scenario, six sources, 0 dB
rng = np.random.default_rng(7)
sources = random_sources(rng, 6)
sc = Scenario(sources, snr_db=0.0, snapshots=200, seed=7, coupling=Coupling())
plan1 = method1_subarrays(7, 7, 7, 7)
R = smoothed_covariance(plan1, vectorized_coarray_signal(simulate(t, sc), t))
est = music_2d(R, plan1, 6, t.generator_matrix, t.pitch).estimates
for th, ph in sorted(est):
    print(f"  theta {math.degrees(th):8.2f}  phi {math.degrees(ph):6.2f}")
print("RMSE [rad]:", rmse([est], [(x.theta, x.phi) for x in sources]))

# %% RMSE against snapshot count
for name, arr, pl in (("T", t, plan1), ("spinner", s, plan)):
    res = monte_carlo(arr, pl, K=6, snr_db=0.0, snapshot_list=(50, 100, 200, 500), trials=20,
                      seed=2026)
    print(name, {L: round(v, 4) for L, v in res.rmse.items()})
