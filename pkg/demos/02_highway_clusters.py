#!/usr/bin/env python3
"""The connectivity structure of a free-flow highway.

Vehicles arriving as a Poisson stream with rate lambda per direction form
clusters: maximal chains of cars whose gaps are all below the radio range R.
Cluster sizes are geometric, gaps beyond R are exponential, and everything
about store-carry-forward performance follows from four cluster statistics.

The script checks the closed forms against 100k sampled inter-vehicle
spacings, then drives a collector vehicle down a 20 km road and counts how
many oncoming clusters it meets and for how long - the contact opportunities
the dissemination protocol lives on.
"""

import numpy as np

from infocast import mobility

LAM, R, V0, L = 0.01, 200.0, 30.0, 20000.0
rng = np.random.default_rng(7)

ana = mobility.analytic_cluster_stats(LAM, R, V0, L)
emp = mobility.empirical_cluster_stats(100_000, LAM, R, rng)

print(f"=== Cluster statistics (lambda={LAM}/m, R={R:.0f} m) ===\n")
rows = [
    ("P(vehicle is last in cluster)", "p_last"),
    ("mean cluster size (vehicles)", "e_cluster_size"),
    ("mean inter-cluster gap (m)", "e_inter_cluster"),
    ("mean cluster length (m)", "e_cluster_length"),
]
print(f"{'statistic':<34} {'analytic':>10} {'empirical':>10}")
for label, attr in rows:
    print(f"{label:<34} {getattr(ana, attr):>10.3f} "
          f"{getattr(emp, attr):>10.3f}")

print(f"""
With lambda*R = {LAM * R:.0f}, a vehicle ends its cluster with probability
e^-2 ~ 0.135, so a typical cluster chains e^2 ~ 7.4 vehicles over ~439 m.
Clusters, not individual cars, are the unit of contact for a collector.
""")

print(f"=== Collector driving {L / 1000:.0f} km at {V0:.0f} m/s ===\n")
meets = [mobility.simulate_collector_meets(LAM, R, V0, L, rng)
         for _ in range(10)]
count = float(np.mean([m.meet_count for m in meets]))
dur = float(np.mean([m.mean_meet_time for m in meets]))
print(f"  clusters met:       {count:6.1f}  (analytic {ana.e_meet_count:.1f})")
print(f"  mean meeting time:  {dur:6.2f} s (analytic {ana.e_meet_time:.2f} s)")
print("""
Oncoming clusters close at relative speed 2*V0, so each of the ~54
meetings lasts about 7.3 s - the window in which buffered packets can be
relayed across directions.""")
