"""Two-way MIMO beampatterns of the T array and the nested baseline.

Run with ``python3 notebooks/03_mimo_patterns.py``; CSV dumps land in
``notebooks/out/`` for plotting elsewhere.
"""

from pathlib import Path

from crtarray.designs import nested_2d, t_array
from crtarray.sensing import hpbw, sls, two_way_pattern, worst_hpbw, worst_sidelobe_cut

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

for name, arr in (("t_array", t_array(13)), ("nested_3x3", nested_2d(3, 3))):
    tx, rx = arr.mimo_split()
    pat = two_way_pattern(tx, rx, step_deg=0.25, az_step_deg=1.0)
    worst = worst_sidelobe_cut(pat)
    w, w_az = worst_hpbw(pat)
    print(f"{name}: {len(tx)} tx x {len(rx)} rx")
    print(f"  SLS over all cuts {sls(pat):.2f} dB (worst at azimuth {worst.azimuth_deg:g})")
    print(f"  SLS on the azimuth-0 cut {sls(pat.cuts[0]):.2f} dB")
    print(f"  HPBW azimuth-0 cut {hpbw(pat.cuts[0]):.3f} deg, worst {w:.3f} deg at {w_az:g}")
    with open(out / f"{name}_az0.csv", "w") as fh:
        fh.write("elevation_deg,value_db\n")
        for e, v in zip(pat.cuts[0].elevation_deg, pat.cuts[0].db):
            fh.write(f"{e:.2f},{max(v, -300.0):.6f}\n")
