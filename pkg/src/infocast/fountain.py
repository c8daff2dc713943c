"""LT-style rateless codec: degree distributions, seed-deterministic encoder,
peeling decoder, and a GF(2) Gaussian-elimination oracle for tests.

A packet carries only (source_id, seed, degree, payload); the index set is
regenerated at the decoder from the seed, so the per-packet overhead is
constant.  The explicit index list is also kept on the packet object as a
debug aid for tests and the elimination oracle.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegreeDistribution",
    "SourceMessage",
    "EncodedPacket",
    "DecoderState",
    "OverheadCurve",
    "ideal_soliton",
    "robust_soliton",
    "index_set_for_seed",
    "encode",
    "ge_oracle",
    "measure_overhead",
]

_SUM_TOL = 1e-12


@dataclass
class DegreeDistribution:
    """Probability law over encoded-packet degrees 1..k."""

    k: int
    probabilities: np.ndarray

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if len(self.probabilities) != self.k:
            raise ValueError("need exactly k degree probabilities")
        if np.any(self.probabilities < 0) or np.any(self.probabilities > 1):
            raise ValueError("degree probabilities must lie in [0, 1]")
        if abs(self.probabilities.sum() - 1.0) > _SUM_TOL:
            raise ValueError("degree probabilities must sum to 1")
        # cumulative table for inverse-CDF sampling (plain list: the lookup
        # sits on the per-packet hot path and bisect beats searchsorted there)
        self._cdf = np.cumsum(self.probabilities)
        self._cdf[-1] = 1.0
        self._cdf_list = self._cdf.tolist()

    def sample_degree(self, rng) -> int:
        """Draw a degree in [1, k] by inverse-CDF lookup; rng needs only a
        .random() method (numpy Generator or stdlib Random)."""
        return bisect_right(self._cdf_list, rng.random()) + 1


def ideal_soliton(k: int) -> DegreeDistribution:
    """Ideal soliton: p(1) = 1/k, p(i) = 1/(i(i-1)) for 2 <= i <= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p = np.zeros(k)
    p[0] = 1.0 / k
    i = np.arange(2, k + 1)
    p[1:] = 1.0 / (i * (i - 1))
    return DegreeDistribution(k, p)


def robust_soliton(k: int, c: float = 0.03, delta: float = 0.5) -> DegreeDistribution:
    """Robust soliton: ideal soliton plus the spike/tail term, renormalized.

    delta is the decoder failure target; the spike sits near k/S with
    S = c * ln(k/delta) * sqrt(k).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if c <= 0:
        raise ValueError("c must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    rho = ideal_soliton(k).probabilities
    tau = np.zeros(k)
    s = c * math.log(k / delta) * math.sqrt(k)
    spike = int(round(k / s)) if s > 0 else k
    if 1 <= spike <= k:
        i = np.arange(1, spike)
        tau[:spike - 1] = s / (i * k)
        tau[spike - 1] = s * math.log(s / delta) / k
    total = rho + np.maximum(tau, 0.0)
    return DegreeDistribution(k, total / total.sum())


def robust_soliton_spike(k: int, c: float, delta: float) -> int:
    """Degree at which the robust-soliton spike term sits (round(k/S))."""
    s = c * math.log(k / delta) * math.sqrt(k)
    return int(round(k / s))


@dataclass
class SourceMessage:
    """A source's k equal-length data packets."""

    source_id: int
    packets: list[bytes]

    def __post_init__(self):
        if not self.packets:
            raise ValueError("message needs at least one packet")
        n = len(self.packets[0])
        if any(len(p) != n for p in self.packets):
            raise ValueError("all payloads must have identical length")

    @property
    def k(self) -> int:
        return len(self.packets)

    @property
    def payload_len(self) -> int:
        return len(self.packets[0])

    @classmethod
    def random(cls, source_id: int, k: int, payload_len: int,
               rng: np.random.Generator) -> "SourceMessage":
        raw = rng.integers(0, 256, size=(k, payload_len), dtype=np.uint8)
        return cls(source_id, [row.tobytes() for row in raw])


@dataclass(frozen=True)
class EncodedPacket:
    """One rateless-coded packet: XOR of the source packets in its index set."""

    source_id: int
    seed: int
    degree: int
    payload: bytes
    indices: tuple[int, ...] = field(default=(), compare=False)


def index_set_for_seed(seed: int, dist: DegreeDistribution) -> tuple[int, ...]:
    """Regenerate the packet's index set from its seed.

    Degree is drawn from the distribution, then that many distinct indices
    are picked uniformly from [0, k) by a partial Fisher-Yates pass.
    """
    rng = random.Random(seed)
    degree = dist.sample_degree(rng)
    k = dist.k
    swapped: dict[int, int] = {}
    picked = []
    uniform = rng.random
    for i in range(degree):
        # floor(u * span) in place of randrange: this runs once per packet
        # symbol and the  < 2**-50 rounding bias is irrelevant here
        j = i + int(uniform() * (k - i))
        picked.append(swapped.get(j, j))
        swapped[j] = swapped.get(i, i)
    return tuple(picked)


def xor_bytes(a: bytes, b: bytes) -> bytes:
    n = len(a)
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(n, "big")


def encode(message: SourceMessage, dist: DegreeDistribution, seed: int) -> EncodedPacket:
    """Encode one packet; a pure function of (message, dist, seed)."""
    if dist.k != message.k:
        raise ValueError("distribution k does not match message k")
    indices = index_set_for_seed(seed, dist)
    payload = message.packets[indices[0]]
    for idx in indices[1:]:
        payload = xor_bytes(payload, message.packets[idx])
    return EncodedPacket(message.source_id, seed, len(indices), payload, indices)


class DecoderState:
    """Iterative message-passing (peeling) decoder for one source."""

    def __init__(self, k: int, source_id: int = 0):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.source_id = source_id
        self.resolved: dict[int, bytes] = {}
        self.distinct_received = 0
        self._seen: set[int] = set()
        # pending entry: [residual index set, residual payload]
        self._pending: list[list] = []
        self._by_index: dict[int, list[list]] = {}
        self._payload_len: int | None = None

    @property
    def complete(self) -> bool:
        return len(self.resolved) == self.k

    def push(self, packet: EncodedPacket, dist: DegreeDistribution) -> str:
        """Absorb one packet; returns 'complete', 'in-progress' or
        'duplicate-ignored'."""
        if packet.source_id != self.source_id:
            raise ValueError("packet source does not match decoder source")
        if packet.seed in self._seen:
            return "duplicate-ignored"
        if self._payload_len is None:
            self._payload_len = len(packet.payload)
        elif len(packet.payload) != self._payload_len:
            raise ValueError("malformed packet: payload length mismatch")
        self._seen.add(packet.seed)
        self.distinct_received += 1
        if self.complete:
            return "complete"

        indices = set(index_set_for_seed(packet.seed, dist))
        payload = packet.payload
        for idx in indices & self.resolved.keys():
            payload = xor_bytes(payload, self.resolved[idx])
        residual = indices - self.resolved.keys()
        if not residual:
            return "in-progress"
        if len(residual) == 1:
            self._resolve(residual.pop(), payload)
        else:
            entry = [residual, payload]
            self._pending.append(entry)
            for idx in residual:
                self._by_index.setdefault(idx, []).append(entry)
        return "complete" if self.complete else "in-progress"

    def _resolve(self, idx: int, payload: bytes):
        """Fix one index and peel through pending packets to a fixed point."""
        queue = [(idx, payload)]
        while queue:
            idx, payload = queue.pop()
            if idx in self.resolved:
                continue
            self.resolved[idx] = payload
            for entry in self._by_index.pop(idx, []):
                residual, body = entry
                if idx not in residual:
                    continue
                residual.discard(idx)
                body = xor_bytes(body, payload)
                entry[1] = body
                if len(residual) == 1:
                    queue.append((next(iter(residual)), body))

    def recovered_message(self) -> SourceMessage:
        if not self.complete:
            raise RuntimeError("decoding not complete")
        return SourceMessage(self.source_id,
                             [self.resolved[i] for i in range(self.k)])


def ge_oracle(packets: list[EncodedPacket], message_k: int):
    """Maximum-likelihood erasure decoding by Gaussian elimination over GF(2).

    Returns (decodable, recovered SourceMessage or None).  Strictly at least
    as powerful as the peeling decoder; used as a test oracle only.
    """
    if message_k < 1:
        raise ValueError("message_k must be >= 1")
    if not packets:
        return False, None
    source_id = packets[0].source_id
    if any(p.source_id != source_id for p in packets):
        raise ValueError("packets must share one source")
    n = len(packets)
    plen = len(packets[0].payload)
    m = np.zeros((n, message_k), dtype=np.uint8)
    body = np.zeros((n, plen), dtype=np.uint8)
    for r, p in enumerate(packets):
        m[r, list(p.indices)] = 1
        body[r] = np.frombuffer(p.payload, dtype=np.uint8)

    row = 0
    pivots = []
    for col in range(message_k):
        sub = np.nonzero(m[row:, col])[0]
        if sub.size == 0:
            continue
        pivot = row + int(sub[0])
        if pivot != row:
            m[[row, pivot]] = m[[pivot, row]]
            body[[row, pivot]] = body[[pivot, row]]
        others = np.nonzero(m[:, col])[0]
        others = others[others != row]
        m[others] ^= m[row]
        body[others] ^= body[row]
        pivots.append(col)
        row += 1
        if row == n:
            break
    if len(pivots) < message_k:
        return False, None
    # after full reduction each pivot row is a unit vector
    order = np.argmax(m[:message_k], axis=1)
    recovered = [b"" for _ in range(message_k)]
    for r in range(message_k):
        recovered[order[r]] = body[r].tobytes()
    return True, SourceMessage(source_id, recovered)


@dataclass
class OverheadCurve:
    """Empirical decoding-overhead measurement for one (k, distribution)."""

    k: int
    needed: np.ndarray  # distinct packets needed per trial

    @property
    def mean_overhead(self) -> float:
        return float(self.needed.mean()) / self.k

    def success_curve(self) -> tuple[np.ndarray, np.ndarray]:
        """(received counts, empirical P(decoded by that count)); the
        probability axis is a CDF and hence non-decreasing."""
        received = np.arange(self.k, int(self.needed.max()) + 1)
        probs = np.array([(self.needed <= r).mean() for r in received])
        return received, probs

    def write_csv(self, path):
        received, probs = self.success_curve()
        with open(path, "w") as fh:
            fh.write("k,received,success_prob\n")
            for r, p in zip(received, probs):
                fh.write(f"{self.k},{r},{p:.6f}\n")


def measure_overhead(k: int, dist: DegreeDistribution, trials: int,
                     rng_seed: int = 0, payload_len: int = 8) -> OverheadCurve:
    """Push fresh random packets per trial until the peeling decoder
    completes; record how many distinct packets were needed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    message = SourceMessage.random(0, k, payload_len, rng)
    needed = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        state = DecoderState(k, source_id=0)
        while not state.complete:
            seed = int(rng.integers(0, 2 ** 63))
            state.push(encode(message, dist, seed), dist)
        needed[t] = state.distinct_received
    return OverheadCurve(k, needed)
