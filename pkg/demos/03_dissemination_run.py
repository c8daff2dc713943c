#!/usr/bin/env python3
"""End-to-end dissemination on a 20 km highway, both buffer schemes.

Twenty roadside units each broadcast a rateless-coded message.  Vehicles
that decode a message become carriers and re-encode it for others, with a
fixed cooperation buffer shared among all the sources they carry.  The two
admission policies differ in how that buffer is split:

  scheme A: every admission keeps a fixed fraction D of the budget for the
            newest source, so shares decay geometrically with age;
  scheme B: the last N_w admitted sources get equal shares B/N_w and older
            ones are evicted.

The headline metric is the mean decoding distance (MDD): how far from its
source a message can still be decoded.  The run below reproduces the core
result - equal shares carry content farther than geometric decay.
"""

import numpy as np

from infocast.engine import SimConfig, mdd, mean_collected, p_success, run
from infocast.mobility import MobilityConfig
from infocast.protocol import ChannelConfig


def make_config(scheme, seed):
    return SimConfig(
        mobility=MobilityConfig(0.1, 20, 40, 20000, 200),
        channel=ChannelConfig(slot_duration=0.02, tx_prob=0.05,
                              comm_range=200),
        n_rsus=20, rsu_placement="uniform", message_packets=15,
        buffer_capacity=300, scheme=scheme, window=20, drop_fraction=0.2,
        domain_segments=20, sim_time=300, rng_seed=seed)


print("=== Paired runs, 20 km / 20 RSUs / 300 s ===\n")
print(f"{'seed':>4} {'MDD scheme A (m)':>17} {'MDD scheme B (m)':>17}")
margins = []
rec_b = None
for seed in (1, 2, 3):
    a = mdd(run(make_config("A", seed)))
    rec_b = run(make_config("B", seed))
    b = mdd(rec_b)
    margins.append(b - a)
    print(f"{seed:>4} {a:>17.0f} {b:>17.0f}")
print(f"\nmean margin for equal shares: {np.mean(margins):+.0f} m")

print("\n=== Collection vs distance (scheme B, last seed) ===\n")
means = mean_collected(rec_b)
print(f"{'eta (m)':>8} {'mean packets':>13} {'P(decode)':>10}")
for eta, m in zip(rec_b.etas, means):
    p = p_success(rec_b, float(eta), 15)
    print(f"{eta:>8.0f} {m:>13.1f} {p:>10.2f}")
print("""
Packets collected per source fall off with distance eta from the source;
the decode probability follows the same trend once averaged over seeds
(a single run is noisy).  Equal buffer shares keep that tail fatter: far-away
sources still own a slice of every carrier's buffer instead of being
crowded out by newer ones.""")
