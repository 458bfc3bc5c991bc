"""
Downlink MISO rates under grouped superposition coding with per-cluster SIC.

Users are split into clusters. Inside a cluster, a decoding sequence fixes
who cancels whom: the first user's signal is decoded (and removed) first by
every later user of that cluster, the last user decodes everybody else and
sees no intra-cluster interference. Signals of other clusters are always
treated as noise.

``alpha(k, i) == 0`` means user ``k`` decodes and removes user ``i``'s
signal, ``1`` means it treats it as interference.

All user indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Scenario, check_covers, normalize_partition
from .errors import (DimensionError, InvalidClusterSize, InvalidSpec,
                     NotCoClustered, Overloaded, RankDeficient, ZeroChannel)

SIC_TOL = 1e-9
RANK_TOL = 1e-10
NORM_TOL = 1e-12
SIC_MODES = ("strict", "relaxed")


@dataclass(frozen=True)
class Grouping:
    """Partition of the users into clusters ``G_1..G_M``."""

    clusters: tuple

    def __post_init__(self):
        object.__setattr__(self, "clusters",
                           normalize_partition(self.clusters, "grouping"))

    @classmethod
    def singletons(cls, n_users: int) -> "Grouping":
        return cls(tuple((k,) for k in range(n_users)))

    @classmethod
    def single(cls, n_users: int) -> "Grouping":
        return cls((tuple(range(n_users)),))

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def check(self, n_users: int):
        check_covers(self.clusters, n_users, "grouping")

    def labels(self, n_users: int) -> np.ndarray:
        """Cluster index of every user."""
        self.check(n_users)
        lab = np.empty(n_users, dtype=int)
        for m, blk in enumerate(self.clusters):
            lab[list(blk)] = m
        return lab

    def cluster_of(self, k: int) -> int:
        for m, blk in enumerate(self.clusters):
            if k in blk:
                return m
        raise NotCoClustered(f"user {k} is in no cluster")

    def canonical(self) -> tuple:
        """Sorted set-of-sorted-sets encoding, used for tie-breaking."""
        return tuple(sorted(tuple(sorted(blk)) for blk in self.clusters))

    def to_list(self) -> list:
        return [list(blk) for blk in self.clusters]


@dataclass(frozen=True)
class IntraClusterOrder:
    """
    Per-cluster SIC decoding sequences.

    ``sequences[m]`` lists the users of cluster ``m`` in the order their
    signals are decoded. The pairwise indicators ``alpha`` are derived from
    these sequences, so they are antisymmetric and transitive by
    construction.
    """

    sequences: tuple
    alpha: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seqs = normalize_partition(self.sequences, "decoding order")
        object.__setattr__(self, "sequences", seqs)
        alpha = {}
        for seq in seqs:
            for a, k in enumerate(seq):
                for b, i in enumerate(seq):
                    if a != b:
                        alpha[(k, i)] = 0 if b < a else 1
        for (k, i), v in alpha.items():
            assert v + alpha[(i, k)] == 1
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_grouping(cls, grouping: Grouping) -> "IntraClusterOrder":
        """Decode each cluster in the order its users are listed."""
        return cls(grouping.clusters)

    @classmethod
    def by_channel_gain(cls, scenario: Scenario, grouping: Grouping) -> "IntraClusterOrder":
        """Weakest channel decoded first inside every cluster."""
        gains = np.sum(np.abs(scenario.channels) ** 2, axis=1)
        return cls(tuple(tuple(sorted(blk, key=lambda u: (gains[u], u)))
                         for blk in grouping.clusters))

    def check(self, grouping: Grouping):
        mine = sorted(tuple(sorted(s)) for s in self.sequences)
        if mine != sorted(tuple(sorted(c)) for c in grouping.clusters):
            raise InvalidSpec("decoding sequences do not match the grouping's clusters")

    def position(self, k: int) -> int:
        for seq in self.sequences:
            if k in seq:
                return seq.index(k)
        raise NotCoClustered(f"user {k} has no decoding position")

    def sequence_of(self, k: int) -> tuple:
        for seq in self.sequences:
            if k in seq:
                return seq
        raise NotCoClustered(f"user {k} has no decoding position")

    def sic_pairs(self):
        """Yield ``(decoder, target)`` for every pair with ``alpha == 0``."""
        for seq in self.sequences:
            for a, k in enumerate(seq):
                for i in seq[:a]:
                    yield k, i

    def to_list(self) -> list:
        return [list(s) for s in self.sequences]


@dataclass(frozen=True)
class BeamformerSet:
    """Unit-norm transmit directions (rows) and per-user powers in Watts."""

    directions: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        d = np.array(self.directions, dtype=complex)
        p = np.array(self.powers, dtype=float)
        if d.ndim != 2 or p.shape != (d.shape[0],):
            raise DimensionError(
                f"directions {d.shape} and powers {p.shape} are inconsistent")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise InvalidSpec("beamformer directions must have unit norm")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidSpec("powers must be finite and non-negative")
        d.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "powers", p)

    @classmethod
    def from_vectors(cls, directions, powers) -> "BeamformerSet":
        """Normalise arbitrary non-zero direction vectors."""
        d = np.array(directions, dtype=complex)
        norms = np.linalg.norm(d, axis=-1, keepdims=True)
        if np.any(norms == 0):
            raise InvalidSpec("zero beamformer direction")
        return cls(d / norms, powers)

    def check(self, scenario: Scenario):
        if self.directions.shape != scenario.channels.shape:
            raise DimensionError(
                f"directions shape {self.directions.shape} != channels "
                f"shape {scenario.channels.shape}")
        budget = scenario.power_budget
        if self.powers.sum() > budget + NORM_TOL * max(1.0, budget):
            raise InvalidSpec(
                f"total power {self.powers.sum()} exceeds the budget {budget}")

    def with_powers(self, powers) -> "BeamformerSet":
        return BeamformerSet(self.directions, powers)


@dataclass(frozen=True)
class RateReport:
    """Per-user downlink rates with the SIC verdict."""

    per_user_rate: tuple
    sic_feasible: bool
    violated_pairs: tuple  # (decoder, target, cluster)
    clusters: tuple = ()
    min_slack: float = float("inf")

    def csv_rows(self):
        """Rows ``(user, cluster, rate, feasible)`` with 1-based labels."""
        return [(k + 1, self.clusters[k] + 1 if self.clusters else 1, r, self.sic_feasible)
                for k, r in enumerate(self.per_user_rate)]


def _setup(s: Scenario, g: Grouping, o: IntraClusterOrder, b: BeamformerSet):
    g.check(s.n_users)
    o.check(g)
    b.check(s)


def _weight(s: Scenario, b: BeamformerSet, k: int, j: int) -> float:
    """``|h_k^H w_j|^2`` with ``w_j = sqrt(p_j) * wbar_j``."""
    return float(b.powers[j] * abs(np.vdot(s.channels[k], b.directions[j])) ** 2)


def dl_user_rate(s: Scenario, g: Grouping, o: IntraClusterOrder,
                 b: BeamformerSet, k: int) -> float:
    """Achievable rate of user ``k`` in bit/s/Hz."""
    k = s.check_user(k)
    _setup(s, g, o, b)
    m = g.cluster_of(k)
    intra = sum(o.alpha[(k, i)] * _weight(s, b, k, i)
                for i in g.clusters[m] if i != k)
    inter = sum(_weight(s, b, k, j)
                for n, blk in enumerate(g.clusters) if n != m for j in blk)
    return float(np.log2(1.0 + _weight(s, b, k, k) / (intra + inter + s.noise_powers[k])))


def dl_cross_decoding_rate(s: Scenario, g: Grouping, o: IntraClusterOrder,
                           b: BeamformerSet, decoder: int, target: int) -> float:
    """
    Rate at which ``decoder`` can decode the signal of ``target``.

    Interference counted at the decoder: co-clustered signals decoded after
    ``target`` (not yet removed at that SIC stage) and all signals of the
    other clusters. With ``decoder == target`` this is the target's own
    rate.
    """
    k = s.check_user(decoder)
    i = s.check_user(target)
    _setup(s, g, o, b)
    m = g.cluster_of(i)
    if g.cluster_of(k) != m:
        raise NotCoClustered(f"users {k} and {i} are in different clusters")
    intra = sum(o.alpha[(i, l)] * _weight(s, b, k, l)
                for l in g.clusters[m] if l != i)
    inter = sum(_weight(s, b, k, j)
                for n, blk in enumerate(g.clusters) if n != m for j in blk)
    return float(np.log2(1.0 + _weight(s, b, k, i) / (intra + inter + s.noise_powers[k])))


def dl_sic_check(s: Scenario, g: Grouping, o: IntraClusterOrder, b: BeamformerSet,
                 sic_mode: str = "strict", tol: float = SIC_TOL) -> RateReport:
    """
    Evaluate every user and the SIC decoding-rate conditions.

    ``strict``: rates are the plain achievable rates and every pair where
    ``k`` decodes ``i`` must satisfy ``R(i -> k) >= R(i -> i) - tol``.
    ``relaxed``: the rate of ``i`` is capped at the smallest rate at which
    any of its decoders (and ``i`` itself) can decode it; always feasible.
    """
    if sic_mode not in SIC_MODES:
        raise InvalidSpec(f"unknown sic_mode {sic_mode!r}")
    _setup(s, g, o, b)
    rates = [dl_user_rate(s, g, o, b, k) for k in range(s.n_users)]
    labels = g.labels(s.n_users)
    violated = []
    min_slack = float("inf")
    for k, i in o.sic_pairs():
        r_ik = dl_cross_decoding_rate(s, g, o, b, k, i)
        slack = r_ik - rates[i]
        if sic_mode == "relaxed":
            rates[i] = min(rates[i], r_ik)
            continue
        min_slack = min(min_slack, slack)
        if slack < -tol:
            violated.append((k, i, int(labels[k])))
    return RateReport(tuple(rates), not violated, tuple(violated),
                      tuple(int(x) for x in labels), min_slack)


def dl_sdma_rates(s: Scenario, b: BeamformerSet) -> np.ndarray:
    """Rates when every other user's signal is interference (no SIC)."""
    b.check(s)
    g2 = np.abs(np.conj(s.channels) @ b.directions.T) ** 2 * b.powers[None, :]
    signal = np.diag(g2)
    off = ~np.eye(s.n_users, dtype=bool)
    interference = np.where(off, g2, 0.0).sum(axis=1)
    return np.log2(1.0 + signal / (interference + s.noise_powers))


def dl_bb_noma_rates(s: Scenario, o: IntraClusterOrder, b: BeamformerSet) -> np.ndarray:
    """All users in one SIC cluster, each with its own beamformer."""
    if len(o.sequences) != 1:
        raise InvalidSpec("beamformer-based NOMA needs a single decoding sequence")
    check_covers(o.sequences, s.n_users, "decoding order")
    b.check(s)
    g2 = np.abs(np.conj(s.channels) @ b.directions.T) ** 2 * b.powers[None, :]
    gate = np.zeros((s.n_users, s.n_users))
    for (k, i), a in o.alpha.items():
        gate[k, i] = a
    return np.log2(1.0 + np.diag(g2) / ((gate * g2).sum(axis=1) + s.noise_powers))


def dl_cb_noma_rates(s: Scenario, g: Grouping, o: IntraClusterOrder,
                     cluster_directions, powers) -> np.ndarray:
    """
    Cluster-based NOMA: one shared unit direction per cluster.

    Requires ``1 < M < K`` and at least two users in every cluster.
    """
    g.check(s.n_users)
    o.check(g)
    M, K = g.n_clusters, s.n_users
    if not 1 < M < K or any(len(c) < 2 for c in g.clusters):
        raise InvalidClusterSize("cluster-based NOMA needs 1 < M < K and clusters of size >= 2")
    dirs = np.asarray(cluster_directions, dtype=complex)
    if dirs.shape != (M, s.n_antennas):
        raise DimensionError(f"need {M} cluster directions of length {s.n_antennas}")
    BeamformerSet(dirs[g.labels(K)], powers).check(s)
    p = np.asarray(powers, dtype=float)
    # gain[k, n] = |h_k^H wbar_{G_n}|^2
    gain = np.abs(np.conj(s.channels) @ dirs.T) ** 2
    cluster_power = np.array([p[list(c)].sum() for c in g.clusters])
    labels = g.labels(K)
    rates = np.empty(K)
    for k in range(K):
        m = labels[k]
        own = gain[k, m]
        intra = own * sum(o.alpha[(k, i)] * p[i] for i in g.clusters[m] if i != k)
        inter = sum(gain[k, n] * cluster_power[n] for n in range(M) if n != m)
        rates[k] = np.log2(1.0 + p[k] * own / (intra + inter + s.noise_powers[k]))
    return rates


def cluster_beamformers(g: Grouping, cluster_directions, powers) -> BeamformerSet:
    """Expand one direction per cluster into a per-user beamformer set."""
    dirs = np.asarray(cluster_directions, dtype=complex)
    p = np.asarray(powers, dtype=float)
    return BeamformerSet(dirs[g.labels(len(p))], p)


# -- direction families -------------------------------------------------

def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry is real and positive."""
    idx = int(np.argmax(np.abs(v)))
    return v * (np.conj(v[idx]) / abs(v[idx]))


def zf_directions(s: Scenario) -> np.ndarray:
    """
    Zero-forcing directions: row ``k`` is orthogonal to every ``h_j``, ``j != k``.

    Raises
    ------
    Overloaded
        More users than antennas.
    RankDeficient
        Smallest singular value of the channel matrix below
        ``1e-10`` times the largest.
    """
    K, N = s.channels.shape
    if K > N:
        raise Overloaded(f"zero-forcing needs K <= N (K={K}, N={N})")
    hh = np.conj(s.channels)
    sv = np.linalg.svd(hh, compute_uv=False)
    if sv[-1] <= RANK_TOL * sv[0]:
        raise RankDeficient(f"channel matrix is rank deficient (smallest "
                            f"singular value {sv[-1]:.3e})", float(sv[-1]))
    w = np.linalg.pinv(hh).T
    w = w / np.linalg.norm(w, axis=1, keepdims=True)
    return np.array([_fix_phase(v) for v in w])


def _null_basis(rows: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis (columns) of ``{x : rows @ x = 0}``."""
    if rows.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, sv, vh = np.linalg.svd(rows)
    rank = int(np.sum(sv > RANK_TOL * sv[0])) if sv[0] > 0 else 0
    return np.conj(vh[rank:]).T


def _principal(basis: np.ndarray, chans: np.ndarray) -> np.ndarray:
    """Unit vector in span(basis) maximising total gain towards ``chans``."""
    proj = chans.conj() @ basis          # row k: h_k^H Q
    gram = proj.conj().T @ proj
    _, vecs = np.linalg.eigh(gram)
    v = basis @ vecs[:, -1]
    return _fix_phase(v / np.linalg.norm(v))


def cluster_zf_directions(s: Scenario, g: Grouping) -> np.ndarray:
    """
    One direction per cluster, orthogonal to every channel outside it.

    Inside the admissible null space the direction maximises the summed
    gain of the cluster's own users.
    """
    g.check(s.n_users)
    labels = g.labels(s.n_users)
    out = []
    for m in range(g.n_clusters):
        others = np.conj(s.channels[labels != m])
        basis = _null_basis(others, s.n_antennas)
        if basis.shape[1] == 0:
            raise Overloaded(f"no direction nulls all users outside cluster {m}")
        out.append(_principal(basis, s.channels[labels == m]))
    return np.array(out)


def cluster_matched_directions(s: Scenario, g: Grouping) -> np.ndarray:
    """One direction per cluster matched to the cluster's own channels."""
    g.check(s.n_users)
    labels = g.labels(s.n_users)
    eye = np.eye(s.n_antennas, dtype=complex)
    return np.array([_principal(eye, s.channels[labels == m])
                     for m in range(g.n_clusters)])


def mrt_directions(s: Scenario) -> np.ndarray:
    """Per-user directions matched to the user's own channel."""
    norms = np.linalg.norm(s.channels, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ZeroChannel("a user has an all-zero channel")
    return s.channels / norms
