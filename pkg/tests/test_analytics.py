"""Closed-form unit tests: coupon-collector contact counts, per-segment
collection rates, the decoding-distance objective, allocation optimality and
the ALOHA throughput curves."""

import math

import numpy as np
import pytest

from infocast.analytics import (AllocationVector, DisseminationParams,
                                aloha_throughput,
                                brute_force_best_allocation, decoding_distance,
                                expected_contacts_erasure,
                                expected_contacts_uncoded,
                                expected_packets_per_cluster,
                                expected_packets_per_segment,
                                optimal_allocation, slotted_aloha_throughput)


def make_params(**kw):
    base = dict(spacing_rate=0.01, comm_range=200.0, mean_speed=30.0,
                rsu_spacing=400.0, domain_segments=4, buffer_capacity=20,
                message_packets=5)
    base.update(kw)
    return DisseminationParams(**base)


def test_uncoded_contacts_reference_value():
    exact, approx = expected_contacts_uncoded(100)
    assert exact == pytest.approx(518.7378, abs=1e-3)
    assert approx == pytest.approx(100 * math.log(100) + 57.72157, abs=1e-3)
    assert abs(approx - exact) / exact < 0.01


def test_uncoded_contacts_small_cases():
    assert expected_contacts_uncoded(1).exact == pytest.approx(1.0)
    # n=2: 2 * (1 + 1/2) = 3
    assert expected_contacts_uncoded(2).exact == pytest.approx(3.0)


def test_erasure_contacts_reference_value():
    exact, approx = expected_contacts_erasure(10, 1.0)
    assert exact == pytest.approx(13.3754, abs=1e-3)
    assert approx == pytest.approx(20.0 * math.log(2.0), abs=1e-6)
    # the closed-form approximation overshoots the exact sum by a few percent
    assert abs(approx - exact) / exact < 0.05


def test_erasure_beats_uncoded():
    for n in (10, 50, 100):
        assert expected_contacts_erasure(n, 1.0).exact < \
            expected_contacts_uncoded(n).exact


def test_allocation_vector_validation():
    AllocationVector(np.array([5, 5, 3, 0]))
    with pytest.raises(ValueError):
        AllocationVector(np.array([3, 5]))  # increasing
    with pytest.raises(ValueError):
        AllocationVector(np.array([3, -1]))


def test_expected_packets_per_cluster_scales_with_share():
    p = make_params()
    one = expected_packets_per_cluster(p, 1.0)
    assert expected_packets_per_cluster(p, 10.0) == pytest.approx(10 * one)
    assert expected_packets_per_cluster(p, 0.0) == 0.0
    with pytest.raises(ValueError):
        expected_packets_per_cluster(p, 30.0)  # above capacity


def test_expected_packets_depend_on_share_fraction_only():
    a = make_params(buffer_capacity=100)
    b = make_params(buffer_capacity=1000)
    assert expected_packets_per_cluster(a, 10.0) == \
        pytest.approx(expected_packets_per_cluster(b, 100.0))
    assert expected_packets_per_segment(a, 10.0) == \
        pytest.approx(expected_packets_per_segment(b, 100.0))


def test_decoding_distance_degenerate_cases():
    p = make_params(message_packets=0)
    alloc = optimal_allocation(20, 4)
    assert decoding_distance(p, alloc) == 4
    p = make_params(message_packets=10**9)
    assert decoding_distance(p, alloc) is None
    with pytest.raises(ValueError):
        decoding_distance(make_params(), AllocationVector(np.array([1, 1])))


def test_decoding_distance_cumulative_from_domain_edge():
    p = make_params(domain_segments=3, buffer_capacity=4)
    rate = expected_packets_per_segment(p, 1.0)
    alloc = AllocationVector(np.array([1, 1, 1, 1]))
    # needing two segments' worth decodes at segment 2 (entering at 3)
    p.message_packets = 1.9 * rate
    assert decoding_distance(p, alloc) == 2
    p.message_packets = 3.9 * rate
    assert decoding_distance(p, alloc) == 0


def test_optimal_allocation_uniform_floor():
    alloc = optimal_allocation(22, 4)
    assert alloc.m.tolist() == [4, 4, 4, 4, 4]
    assert optimal_allocation(3, 4).m.tolist() == [0, 0, 0, 0, 0]


def test_brute_force_confirms_uniform():
    p = make_params(domain_segments=3, buffer_capacity=12)
    rate = expected_packets_per_segment(p, 1.0)
    uniform = optimal_allocation(12, 3)
    p.message_packets = rate * uniform.total * 0.5
    best, best_dd = brute_force_best_allocation(p)
    assert best_dd == decoding_distance(p, uniform)


def test_brute_force_bounds():
    with pytest.raises(ValueError):
        brute_force_best_allocation(make_params(buffer_capacity=100))


def test_aloha_peaks():
    assert aloha_throughput(0.5) == pytest.approx(1 / (2 * math.e), rel=1e-12)
    g = np.linspace(0.01, 2.0, 400)
    assert float(np.max(aloha_throughput(g))) <= 1 / (2 * math.e) + 1e-9
    assert slotted_aloha_throughput(1.0) == pytest.approx(1 / math.e, rel=1e-12)
    assert float(np.max(slotted_aloha_throughput(g))) <= 1 / math.e + 1e-9
    # slotted doubles the pure-ALOHA peak
    assert slotted_aloha_throughput(1.0) == pytest.approx(
        2 * aloha_throughput(0.5), rel=1e-12)
    with pytest.raises(ValueError):
        aloha_throughput(-0.1)
