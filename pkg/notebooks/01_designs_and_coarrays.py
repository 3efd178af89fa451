"""Walk through the array families and their difference coarrays.

Run with ``python3 notebooks/01_designs_and_coarrays.py``.
"""

from crtarray.coarray import coarray_report, difference_coarray, hole_free_check
from crtarray.designs import a2_cross, hscrt, spinner_array, t_array, z2_cross
from crtarray.rings import EISENSTEIN, GAUSSIAN, format_quadint, split_prime

# %% Splitting the working primes
for ring, p in ((GAUSSIAN, 13), (EISENSTEIN, 13)):
    m, mbar = split_prime(ring, p)
    print(f"{ring.name}: {p} = ({format_quadint(ring, m)})({format_quadint(ring, mbar)})")

# %% Sensor counts and coverage at p = 13
p = 13
arrays = [hscrt(GAUSSIAN, p), t_array(p), z2_cross(p), hscrt(EISENSTEIN, p),
          spinner_array(p), a2_cross(p)]
print(f"\n{'array':<10}{'ring':<12}{'sensors':>8}{'support':>9}{'holes':>7}{'fragility':>11}")
for arr in arrays:
    rep = coarray_report(arr, p)
    print(f"{arr.kind:<10}{arr.ring.name:<12}{len(arr):>8}{rep['support_size']:>9}"
          f"{len(rep['holes']):>7}{rep['fragility']['value']:>11.4f}")

# %% Weight function of the T array: which lags are measured most often
d = difference_coarray(t_array(p))
top = sorted(d.weights.items(), key=lambda kv: -kv[1])[:5]
print("\nmost redundant T-array lags:", top)
print("hole-free over the cell:", hole_free_check(d, p)[0])
