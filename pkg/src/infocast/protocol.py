"""Dissemination protocol: per-source collector/carrier roles, the
relevance domain, the contention broadcast channel, reception into
decoders, and the two cooperation-buffer management schemes.

Scheme A shares the buffer across every source met so far and drops a
fraction of each source's packets at every crossing; scheme B shares it
evenly across a window of the most recent sources, evicting the oldest
wholesale.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np

from .fountain import (DecoderState, DegreeDistribution, EncodedPacket,
                       SourceMessage, encode)
from .mobility import Vehicle

__all__ = [
    "Rsu",
    "ChannelConfig",
    "CooperationBuffer",
    "NodeState",
    "classify_role",
    "relevance",
    "segment_index",
    "channel_slot",
    "transmit_packet",
    "carrier_seed",
    "on_receive",
    "on_become_carrier",
    "scheme_a_update",
    "scheme_b_update",
]

# carrier re-encodings draw seeds from [2^62, 2^63); RSU counter seeds stay
# below 2^62, so the two spaces never collide
_CARRIER_SEED_BASE = 1 << 62


def carrier_seed(rng: np.random.Generator) -> int:
    return _CARRIER_SEED_BASE | int(rng.integers(0, _CARRIER_SEED_BASE))


@dataclass
class Rsu:
    """Fixed roadside source with its message, degree distribution and a
    counter for fresh encoding seeds."""

    id: int
    position: float
    message: SourceMessage
    dist: DegreeDistribution
    next_seed: int = 0

    def next_packet(self) -> EncodedPacket:
        seed = (self.id << 32) | self.next_seed
        self.next_seed += 1
        if self.next_seed >= 1 << 32:
            raise RuntimeError("RSU seed counter exhausted")
        return encode(self.message, self.dist, seed)


@dataclass
class ChannelConfig:
    slot_duration: float = 0.01   # 100 broadcast packets/second per RSU
    tx_prob: float = 0.05         # carrier per-slot transmission probability
    comm_range: float = 200.0

    def __post_init__(self):
        if self.slot_duration <= 0:
            raise ValueError("slot_duration must be positive")
        if not 0 < self.tx_prob <= 1:
            raise ValueError("tx_prob must lie in (0, 1]")
        if self.comm_range <= 0:
            raise ValueError("comm_range must be positive")


def relevance(domain_segments: int, segment: int, rsu_spacing: float) -> float:
    """Remaining useful distance of a source's packets for a node whose
    segment index from that source is `segment`; <= 0 means discard."""
    if segment < 0:
        raise ValueError("segment index must be nonnegative")
    return (domain_segments - segment) * rsu_spacing


def segment_index(position: float, source_position: float,
                  rsu_positions) -> int:
    """Number of the inter-RSU segment (counted from the source) a node sits
    in: the count of other RSUs strictly between node and source.
    rsu_positions must be a sorted sequence (a plain list is fastest)."""
    lo, hi = ((position, source_position) if position <= source_position
              else (source_position, position))
    inside = bisect_left(rsu_positions, hi) - bisect_right(rsu_positions, lo)
    return max(inside, 0)


def classify_role(vehicle: Vehicle, rsu: Rsu, domain_segments: int,
                  rsu_spacing: float, decoded: bool = False) -> str:
    """Role of one vehicle with respect to one source: approaching within
    the domain -> collector; past it and decoded -> carrier; otherwise
    inactive."""
    offset = rsu.position - vehicle.position
    if abs(offset) >= domain_segments * rsu_spacing:
        return "inactive"
    approaching = (offset > 0 and vehicle.direction > 0) or \
                  (offset < 0 and vehicle.direction < 0)
    if approaching:
        return "collector"
    return "carrier" if decoded else "inactive"


class CooperationBuffer:
    """Capacity-limited per-vehicle packet store, tracked as a per-source
    packet count in arrival (age) order.

    A vehicle only buffers sources it has decoded, and every transmission is
    a fresh re-encoding, so individual stored packets are exchangeable: the
    count per source is the complete buffer state.  Zero counts are never
    stored."""

    def __init__(self, capacity: int, scheme: str = "B",
                 drop_fraction: float = 0.2, window: int = 10):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        if scheme not in ("A", "B"):
            raise ValueError("scheme must be 'A' or 'B'")
        if scheme == "A" and not 0 < drop_fraction <= 1:
            raise ValueError("drop_fraction must lie in (0, 1]")
        if scheme == "B" and window < 1:
            raise ValueError("window must be >= 1")
        self.capacity = capacity
        self.scheme = scheme
        self.drop_fraction = drop_fraction
        self.window = window
        self.entries: dict[int, int] = {}

    def total(self) -> int:
        return sum(self.entries.values())

    def counts(self) -> dict[int, int]:
        return dict(self.entries)

    def random_source(self, rng: np.random.Generator) -> int:
        """Pick a source with probability proportional to its buffer share,
        i.e. a uniform draw over the stored packets."""
        total = self.total()
        if total == 0:
            raise RuntimeError("buffer is empty")
        r = int(rng.integers(total))
        for src, n in self.entries.items():
            if r < n:
                return src
            r -= n
        raise AssertionError("unreachable")

    def drop_source(self, source_id: int):
        self.entries.pop(source_id, None)

    def admit(self, source_id: int):
        if self.scheme == "A":
            scheme_a_update(self, source_id)
        else:
            scheme_b_update(self, source_id)


def scheme_a_update(buffer: CooperationBuffer, new_source: int):
    """Drop a fraction D of every stored source's packets, then store a
    D-sized share of the new source in the freed space.  Shares decay
    geometrically with source age and sum to the capacity in steady state."""
    buffer.entries.pop(new_source, None)
    d = buffer.drop_fraction
    for src in list(buffer.entries):
        kept = buffer.entries[src] - math.ceil(d * buffer.entries[src])
        if kept > 0:
            buffer.entries[src] = kept
        else:
            del buffer.entries[src]
    grant = min(int(d * buffer.capacity), buffer.capacity - buffer.total())
    if grant > 0:
        buffer.entries[new_source] = grant


def scheme_b_update(buffer: CooperationBuffer, new_source: int):
    """Evict the oldest source when the window is full, then store an equal
    window share of the new source: each of the most recent window sources
    holds at most capacity/window packets."""
    buffer.entries.pop(new_source, None)
    while len(buffer.entries) >= buffer.window:
        oldest = next(iter(buffer.entries))
        del buffer.entries[oldest]
    share = buffer.capacity // buffer.window
    for src in list(buffer.entries):
        if buffer.entries[src] > share:
            buffer.entries[src] = share
    grant = min(share, buffer.capacity - buffer.total())
    if grant > 0:
        buffer.entries[new_source] = grant


def transmit_packet(state: "NodeState", rsus: list[Rsu],
                    rng: np.random.Generator) -> EncodedPacket:
    """One carrier transmission: pick a source in proportion to its buffer
    share and emit a fresh re-encoding of it.  A carrier has decoded every
    source it buffers, so it re-encodes on the fly instead of replaying a
    stored packet and never exhausts its supply of distinct packets."""
    src = state.buffer.random_source(rng)
    return encode(state.decoded_messages[src], rsus[src].dist,
                  carrier_seed(rng))


def channel_slot(rsus: list[Rsu], positions: np.ndarray,
                 carriers: dict[int, "NodeState"],
                 channel: ChannelConfig, rng: np.random.Generator,
                 wants_rsu=None):
    """One broadcast slot.

    Each RSU gets a dedicated collision-free sub-slot: if any vehicle is in
    range it emits one fresh packet, delivered to all of them.  Carriers
    contend on a shared sub-slot: each transmits with probability tx_prob
    (see transmit_packet); a receiver hears a packet only if exactly one
    transmitter (itself included) is within range.

    positions indexes vehicles 0..n-1; carriers maps a vehicle index to the
    node state of a vehicle with a nonempty buffer.  wants_rsu(rx_index,
    rsu), when given, marks which receivers still profit from that source's
    direct broadcast; an RSU whose in-range audience is entirely
    uninterested stays silent that slot.  Returns (rsu deliveries [(rx,
    packet, rsu)], contention deliveries [(rx, packet)], transmission count,
    count of receivers jammed by collision).
    """
    r = channel.comm_range
    rsu_deliveries = []
    n = len(positions)
    if n and rsus:
        rsu_pos = np.array([s.position for s in rsus])
        near = np.abs(positions[None, :] - rsu_pos[:, None]) <= r
        for i, rsu in enumerate(rsus):
            rx = [int(j) for j in np.nonzero(near[i])[0]]
            if wants_rsu is not None:
                rx = [j for j in rx if wants_rsu(j, rsu)]
            if rx:
                pkt = rsu.next_packet()
                rsu_deliveries.extend((j, pkt, rsu) for j in rx)

    senders = list(carriers)
    fires = rng.random(len(senders)) < channel.tx_prob if senders else []
    transmissions = [(v, transmit_packet(carriers[v], rsus, rng))
                     for v, fire in zip(senders, fires) if fire]
    contention = []
    jammed = 0
    if transmissions:
        tx_idx = np.array([t[0] for t in transmissions])
        near = np.abs(positions[None, :] - positions[tx_idx][:, None]) <= r
        heard = near.sum(axis=0)
        jammed = int(np.count_nonzero((heard > 1) & np.any(near, axis=0)))
        for ti, (vidx, pkt) in enumerate(transmissions):
            for j in np.nonzero(near[ti] & (heard == 1))[0]:
                if int(j) != vidx:
                    contention.append((int(j), pkt))
    return rsu_deliveries, contention, len(transmissions), jammed


@dataclass
class NodeState:
    """Per-vehicle protocol state across all sources."""

    vehicle: Vehicle
    buffer: CooperationBuffer
    decoders: dict[int, DecoderState] = field(default_factory=dict)
    decoded_messages: dict[int, SourceMessage] = field(default_factory=dict)
    decoded_at: dict[int, float] = field(default_factory=dict)
    counts: dict[int, np.ndarray] = field(default_factory=dict)
    measured: bool = True
    entry_position: float = 0.0
    next_rsu: int = 0  # index of the next RSU in the travel direction


def on_receive(state: NodeState, packet: EncodedPacket, rsu: Rsu,
               rsu_positions: np.ndarray, domain_segments: int,
               etas: np.ndarray) -> str | None:
    """Handle one delivered packet.

    Only a collector of the packet's source inside its relevance domain
    keeps it: the packet counts toward the distance-bucketed collection
    record and, until the source is decoded, feeds the decoder.  Returns the
    decoder status, or None when the packet was discarded.
    """
    if packet.source_id != rsu.id:
        raise ValueError("malformed packet: source does not match RSU")
    v = state.vehicle
    offset = rsu.position - v.position
    approaching = (offset > 0 and v.direction > 0) or (offset < 0 and v.direction < 0)
    if not approaching:
        return None
    if segment_index(v.position, rsu.position, rsu_positions) >= domain_segments:
        return None
    dist = abs(offset)
    counts = state.counts.get(rsu.id)
    if counts is None:
        counts = state.counts[rsu.id] = np.zeros(len(etas), dtype=np.int64)
    counts += dist > etas
    if rsu.id in state.decoded_messages:
        return "complete"
    decoder = state.decoders.get(rsu.id)
    if decoder is None:
        decoder = state.decoders[rsu.id] = DecoderState(rsu.message.k, rsu.id)
    status = decoder.push(packet, rsu.dist)
    if status == "complete":
        state.decoded_messages[rsu.id] = decoder.recovered_message()
        state.decoded_at[rsu.id] = dist
        del state.decoders[rsu.id]
    return status


def on_become_carrier(state: NodeState, rsu: Rsu) -> bool:
    """Buffer update at the moment a vehicle crosses an RSU it has decoded:
    a share of the buffer is claimed for re-encodings of the recovered
    message under the buffer's scheme.  Returns False when the vehicle never
    decoded it."""
    # approaching-side decoder is moot once the source is behind us
    state.decoders.pop(rsu.id, None)
    if rsu.id not in state.decoded_messages:
        return False
    state.buffer.admit(rsu.id)
    return True


def enforce_domain(state: NodeState, rsus: list[Rsu], rsu_positions: np.ndarray,
                   domain_segments: int):
    """Drop buffered packets and retained messages of sources whose segment
    index from the vehicle reached the domain edge."""
    v = state.vehicle
    stale = [src for src in set(state.buffer.entries) | set(state.decoded_messages)
             if segment_index(v.position, rsus[src].position, rsu_positions)
             >= domain_segments]
    for src in stale:
        state.buffer.drop_source(src)
        state.decoded_messages.pop(src, None)
