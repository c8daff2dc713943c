"""Infocast: rateless-coded, buffer-constrained store-carry-forward content
dissemination from roadside units to a highway vehicular network.

Subpackages: fountain (LT codec), mobility (highway population and cluster
statistics), protocol (roles, buffers, channel), analytics (closed forms and
allocation optimality), engine (seeded simulation and metrics), cli.
"""

from .analytics import (AllocationVector, DisseminationParams,
                        aloha_throughput, brute_force_best_allocation,
                        decoding_distance, expected_contacts_erasure,
                        expected_contacts_uncoded, optimal_allocation)
from .engine import MetricsRecord, SimConfig, mdd, p_success, run
from .fountain import (DecoderState, DegreeDistribution, EncodedPacket,
                       SourceMessage, encode, ge_oracle, ideal_soliton,
                       measure_overhead, robust_soliton)
from .mobility import (ClusterStats, MobilityConfig, Vehicle,
                       analytic_cluster_stats, empirical_cluster_stats,
                       identify_clusters, spawn_arrivals, step)
from .protocol import (ChannelConfig, CooperationBuffer, Rsu, channel_slot,
                       classify_role, relevance)

__version__ = "0.1.0"
