#!/usr/bin/env python3
"""How much does rateless coding help a drive-by collector?

A vehicle passing through the network picks up packets one contact at a
time.  If the n packets of a message are distinct "coupons", the collector
wastes most late contacts on duplicates; with a rateless code every received
packet is (almost surely) useful, so roughly n fresh packets finish the job.

This script compares the closed-form contact counts with Monte-Carlo runs of
both collection processes, then shows the measured reception overhead of the
actual LT codec used by the simulator.
"""

import numpy as np

from infocast import analytics
from infocast.engine import (simulate_erasure_collection,
                             simulate_uncoded_collection)
from infocast.fountain import measure_overhead, robust_soliton

rng = np.random.default_rng(2026)

print("=== Contacts needed to collect an n-packet message ===\n")
print(f"{'n':>5} {'uncoded (exact)':>16} {'uncoded (MC)':>13} "
      f"{'coded (exact)':>14} {'coded (MC)':>11} {'gain':>6}")
for n in (10, 50, 100):
    unc = analytics.expected_contacts_uncoded(n)
    cod = analytics.expected_contacts_erasure(n, 1.0)
    unc_mc = float(simulate_uncoded_collection(n, 1000, rng).mean())
    cod_mc = float(simulate_erasure_collection(n, 1.0, 1000, rng).mean())
    print(f"{n:>5} {unc.exact:>16.2f} {unc_mc:>13.2f} "
          f"{cod.exact:>14.2f} {cod_mc:>11.2f} {unc.exact / cod.exact:>5.1f}x")

print("""
The uncoded collector needs ~n ln n contacts (the coupon-collector law);
the rate-1 coded collector needs ~2n ln 2, i.e. about 1.39 n.  The gap
widens with n: coding turns a superlinear cost into a linear one.
""")

print("=== Reception overhead of the real LT codec ===\n")
for k in (100, 500, 1000):
    curve = measure_overhead(k, robust_soliton(k), trials=20, rng_seed=k)
    print(f"  k={k:>5}: mean overhead {curve.mean_overhead:.3f} "
          f"(decode after ~{curve.mean_overhead * k:.0f} packets)")
print("""
A practical peeling decoder pays a ~10% premium over the ideal erasure
code, shrinking as k grows.  That premium is the price of linear-time
decoding with no feedback channel.""")
