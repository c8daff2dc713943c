"""Closed forms for the dissemination analysis: coupon-collector contact
counts, per-cluster and per-segment collection rates, the decoding-distance
objective, the uniform buffer allocation, and a brute-force enumeration
oracle that checks its optimality.  Also the ALOHA throughput curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .mobility import analytic_cluster_stats

__all__ = [
    "DisseminationParams",
    "AllocationVector",
    "ContactCount",
    "expected_contacts_uncoded",
    "expected_contacts_erasure",
    "expected_packets_per_cluster",
    "expected_packets_per_segment",
    "decoding_distance",
    "optimal_allocation",
    "brute_force_best_allocation",
    "aloha_throughput",
    "slotted_aloha_throughput",
]

EULER_GAMMA = 0.5772156649


@dataclass
class DisseminationParams:
    """Everything the per-segment collection analysis needs."""

    spacing_rate: float       # 1/m
    comm_range: float         # m
    mean_speed: float         # m/s
    rsu_spacing: float        # m, distance d between adjacent sources
    domain_segments: int      # segments a source's packets stay relevant
    buffer_capacity: int      # cooperation-buffer packets B
    message_packets: int      # packets per source message

    def __post_init__(self):
        if min(self.spacing_rate, self.comm_range, self.mean_speed,
               self.rsu_spacing) <= 0:
            raise ValueError("rates, ranges, speeds and spacing must be positive")
        if self.domain_segments < 1 or self.buffer_capacity < 0:
            raise ValueError("domain_segments >= 1 and buffer_capacity >= 0 required")
        if self.message_packets < 0:
            raise ValueError("message_packets must be nonnegative")


@dataclass
class AllocationVector:
    """Packets a carrier holds for a source per segment index 0..domain."""

    m: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int64)
        if np.any(self.m < 0):
            raise ValueError("allocations must be nonnegative")
        if np.any(np.diff(self.m) > 0):
            raise ValueError("allocation must be non-increasing with segment index")

    @property
    def total(self) -> int:
        return int(self.m.sum())


class ContactCount(NamedTuple):
    exact: float
    approx: float


def expected_contacts_uncoded(n: int) -> ContactCount:
    """Expected contacts to collect all n packets under round-robin
    uncoded broadcast: the coupon-collector sum n*H_n, with the
    n*ln(n) + gamma*n approximation alongside."""
    if n < 1:
        raise ValueError("n must be >= 1")
    exact = n * float(np.sum(1.0 / np.arange(1, n + 1)))
    approx = n * math.log(n) + EULER_GAMMA * n
    return ContactCount(exact, approx)


def expected_contacts_erasure(n: int, r: float) -> ContactCount:
    """Expected contacts to collect any n distinct packets out of a pool of
    n*(1+r) erasure-coded packets, plus the n(1+r)*ln(1+1/r) approximation.

    The exact path sums n coupon-collector terms (one per still-missing
    packet); the displayed closed form's summation bounds would give n+1
    terms, an off-by-one we do not reproduce.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if r <= 0:
        raise ValueError("r must be positive")
    pool = n * (1.0 + r)
    i = np.arange(n)
    exact = float(np.sum(pool / (pool - i)))
    approx = pool * math.log(1.0 + 1.0 / r)
    return ContactCount(exact, approx)


def expected_packets_per_cluster(params: DisseminationParams, m_j: float) -> float:
    """Expected packets of one source collected from a single cluster
    encounter when carriers hold m_j of its packets out of buffer B.

    E[cluster length] * m_j / (4e * V0 * B): the meet time (length / 2*V0)
    times the peak contention throughput 1/(2e) per packet-transfer time
    times the m_j/B chance a received packet is of interest.  Reported in
    packets per cluster encounter with the packet-transfer time as the time
    unit; the channel's slot duration makes this concrete in simulation.
    """
    if not 0 <= m_j <= params.buffer_capacity:
        raise ValueError("m_j must lie in [0, buffer_capacity]")
    if params.buffer_capacity == 0:
        return 0.0
    stats = analytic_cluster_stats(params.spacing_rate, params.comm_range)
    return (stats.e_cluster_length * m_j
            / (4.0 * math.e * params.mean_speed * params.buffer_capacity))


def expected_packets_per_segment(params: DisseminationParams, m_j: float) -> float:
    """Expected packets of one source collected while traversing one
    segment of length rsu_spacing: clusters met in the segment times the
    per-cluster expectation."""
    stats = analytic_cluster_stats(params.spacing_rate, params.comm_range)
    meets = 2.0 * params.rsu_spacing / (stats.e_cluster_length + stats.e_inter_cluster)
    return meets * expected_packets_per_cluster(params, m_j)


def decoding_distance(params: DisseminationParams,
                      alloc: AllocationVector) -> int | None:
    """Farthest segment index at which a collector entering the domain edge
    has accumulated enough expected packets to decode.

    The collector traverses segments domain, domain-1, ...; in segment j the
    carriers hold alloc.m[j] packets of the source.  Returns the largest j
    such that the cumulative expectation over segments domain..j reaches the
    message size; 0 if that only happens in the source's own segment; None
    if it never happens.  A zero message size degenerately decodes at the
    domain edge.
    """
    delta = params.domain_segments
    if len(alloc.m) != delta + 1:
        raise ValueError("allocation must have domain_segments + 1 entries")
    if params.message_packets == 0:
        return delta
    # the per-segment expectation is linear in m_j, so one unit rate suffices
    rate = (expected_packets_per_segment(params, 1.0)
            if params.buffer_capacity > 0 else 0.0)
    cum = 0.0
    for j in range(delta, -1, -1):
        cum += rate * int(alloc.m[j])
        if cum >= params.message_packets:
            return j
    return None


def optimal_allocation(buffer_capacity: int, domain_segments: int) -> AllocationVector:
    """Uniform split of the buffer over the domain's segments; packets are
    indivisible so each share is floored and any remainder is unused."""
    if buffer_capacity < 0 or domain_segments < 0:
        raise ValueError("arguments must be nonnegative")
    share = buffer_capacity // (domain_segments + 1)
    return AllocationVector(np.full(domain_segments + 1, share, dtype=np.int64))


def _non_increasing_vectors(length: int, budget: int, cap: int):
    if length == 0:
        yield ()
        return
    for first in range(min(budget, cap), -1, -1):
        for rest in _non_increasing_vectors(length - 1, budget - first, first):
            yield (first,) + rest


def brute_force_best_allocation(params: DisseminationParams):
    """Enumerate every non-increasing allocation with total <= B and return
    one attaining the maximal decoding distance (ties broken toward the
    uniform allocation).  Refuses instances too large to enumerate."""
    b, delta = params.buffer_capacity, params.domain_segments
    if b > 40 or delta > 6:
        raise ValueError("enumeration bounded to buffer_capacity <= 40, domain_segments <= 6")
    uniform = tuple(optimal_allocation(b, delta).m.tolist())
    rate = expected_packets_per_segment(params, 1.0) if b > 0 else 0.0
    target = params.message_packets

    def dd_of(vec):
        cum = 0.0
        for j in range(delta, -1, -1):
            cum += rate * vec[j]
            if cum >= target:
                return j
        return None

    best = None
    best_dd = -1
    for vec in _non_increasing_vectors(delta + 1, b, b):
        dd = dd_of(vec)
        score = -1 if dd is None else dd
        if score > best_dd or (score == best_dd and vec == uniform):
            best, best_dd = vec, score
    alloc = AllocationVector(np.array(best, dtype=np.int64))
    return alloc, (None if best_dd < 0 else best_dd)


def aloha_throughput(g):
    """Pure-ALOHA throughput S = G * exp(-2G); peaks at 1/(2e) for G = 1/2."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("offered load must be nonnegative")
    s = g * np.exp(-2.0 * g)
    return float(s) if s.ndim == 0 else s


def slotted_aloha_throughput(g):
    """Slotted-ALOHA throughput S = G * exp(-G); peaks at 1/e for G = 1.

    The simulated channel is slotted, so its peak sits at 1/e, a factor of
    two above the pure-ALOHA 1/(2e) used in the closed-form analysis.
    """
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("offered load must be nonnegative")
    s = g * np.exp(-g)
    return float(s) if s.ndim == 0 else s


def write_formula_csv(path, rows):
    """Emit `formula, inputs, exact, approx, rel_err` comparison rows."""
    with open(path, "w") as fh:
        fh.write("formula,inputs,exact,approx,rel_err\n")
        for name, inputs, exact, approx in rows:
            rel = abs(approx - exact) / abs(exact) if exact else math.nan
            fh.write(f"{name},{inputs},{exact:.6g},{approx:.6g},{rel:.4g}\n")
