"""
Uplink SIMO rates with layered detection.

Streams are split into ordered layers ``U_1..U_L``. Streams inside a layer
are detected in parallel; once a layer is decoded it is subtracted, so a
stream only sees interference from its own layer and from later layers.
``L = 1`` is parallel (SDMA) detection, ``L = K`` is fully serial SIC.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Scenario, check_covers, normalize_partition
from .downlink import NORM_TOL, zf_directions
from .errors import DimensionError, InvalidSpec, InvalidUser, ZeroChannel

MMSE_MODES = ("layer_aware", "static")


@dataclass(frozen=True)
class LayerPartition:
    """Ordered partition of the streams into detection layers."""

    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers",
                           normalize_partition(self.layers, "layer partition"))

    @classmethod
    def parallel(cls, n_users: int) -> "LayerPartition":
        return cls((tuple(range(n_users)),))

    @classmethod
    def serial(cls, sequence) -> "LayerPartition":
        return cls(tuple((int(k),) for k in sequence))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def check(self, n_users: int):
        check_covers(self.layers, n_users, "layer partition")

    def layer_index(self, n_users: int) -> np.ndarray:
        self.check(n_users)
        idx = np.empty(n_users, dtype=int)
        for l, blk in enumerate(self.layers):
            idx[list(blk)] = l
        return idx

    def layer_of(self, k: int) -> int:
        for l, blk in enumerate(self.layers):
            if k in blk:
                return l
        raise InvalidUser(f"user {k} is not in any layer")

    def canonical(self) -> tuple:
        return tuple(tuple(sorted(blk)) for blk in self.layers)

    def to_list(self) -> list:
        return [list(blk) for blk in self.layers]


@dataclass(frozen=True)
class PermutationOrder:
    """``beta[k]`` is the 0-based decoding position of stream ``k``."""

    beta: tuple

    def __post_init__(self):
        beta = tuple(int(x) for x in self.beta)
        if sorted(beta) != list(range(len(beta))):
            raise InvalidSpec(f"decoding positions {beta} are not a permutation")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_sequence(cls, sequence) -> "PermutationOrder":
        """``sequence[0]`` is decoded first."""
        seq = [int(k) for k in sequence]
        beta = [0] * len(seq)
        for pos, k in enumerate(seq):
            if not 0 <= k < len(seq):
                raise InvalidSpec(f"stream {k} out of range")
            beta[k] = pos
        return cls(tuple(beta))

    @property
    def sequence(self) -> tuple:
        return tuple(int(k) for k in np.argsort(self.beta))


@dataclass(frozen=True)
class DetectorSet:
    """Unit-norm receive vectors (rows) and per-user transmit powers."""

    vectors: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        p = np.array(self.powers, dtype=float)
        if v.ndim != 2 or p.shape != (v.shape[0],):
            raise DimensionError(f"vectors {v.shape} and powers {p.shape} are inconsistent")
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > NORM_TOL):
            raise InvalidSpec("detection vectors must have unit norm")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidSpec("powers must be finite and non-negative")
        v.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "powers", p)

    def check(self, s: Scenario):
        if self.vectors.shape != s.channels.shape:
            raise DimensionError(
                f"detector shape {self.vectors.shape} != channel shape {s.channels.shape}")
        cap = s.power_budget
        if np.any(self.powers > cap + NORM_TOL * max(1.0, cap)):
            raise InvalidSpec(f"a user power exceeds the per-user cap {cap}")


def _coupling(s: Scenario, d: DetectorSet) -> np.ndarray:
    """``C[k, j] = |v_k^H h_j|^2 p_j``."""
    d.check(s)
    return np.abs(np.conj(d.vectors) @ s.channels.T) ** 2 * d.powers[None, :]


def ul_ngma_rate(s: Scenario, lp: LayerPartition, d: DetectorSet, k: int) -> float:
    """Rate of stream ``k`` under layered detection, bit/s/Hz."""
    k = s.check_user(k)
    lp.check(s.n_users)
    d.check(s)
    sigma2 = s.uplink_noise_power
    l = lp.layer_of(k)
    v = d.vectors[k]

    def w(j):
        return abs(np.vdot(v, s.channels[j])) ** 2 * d.powers[j]

    same = sum(w(i) for i in lp.layers[l] if i != k)
    later = sum(w(j) for blk in lp.layers[l + 1:] for j in blk)
    return float(np.log2(1.0 + w(k) / (same + later + sigma2)))


def ul_ngma_rates(s: Scenario, lp: LayerPartition, d: DetectorSet) -> np.ndarray:
    """All per-stream rates under ``lp`` at once."""
    sigma2 = s.uplink_noise_power
    c = _coupling(s, d)
    idx = lp.layer_index(s.n_users)
    mask = (idx[None, :] >= idx[:, None]) & ~np.eye(s.n_users, dtype=bool)
    return np.log2(1.0 + np.diag(c) / (np.where(mask, c, 0.0).sum(axis=1) + sigma2))


def ul_sdma_rates(s: Scenario, d: DetectorSet) -> np.ndarray:
    """Parallel detection: every other stream is interference."""
    sigma2 = s.uplink_noise_power
    c = _coupling(s, d)
    signal = np.diag(c)
    interference = np.array([sum(c[k, i] for i in range(s.n_users) if i != k)
                             for k in range(s.n_users)])
    return np.log2(1.0 + signal / (interference + sigma2))


def ul_noma_rates(s: Scenario, order: PermutationOrder, d: DetectorSet) -> np.ndarray:
    """Serial SIC: stream ``k`` sees only streams decoded after it."""
    if len(order.beta) != s.n_users:
        raise DimensionError("decoding order length differs from the user count")
    sigma2 = s.uplink_noise_power
    c = _coupling(s, d)
    beta = np.asarray(order.beta)
    rates = np.empty(s.n_users)
    for k in range(s.n_users):
        undetected = beta > beta[k]
        rates[k] = np.log2(1.0 + c[k, k] / (c[k, undetected].sum() + sigma2))
    return rates


def mrc_detectors(s: Scenario) -> np.ndarray:
    """``v_k = h_k / ||h_k||``."""
    norms = np.linalg.norm(s.channels, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ZeroChannel("a user has an all-zero channel")
    return s.channels / norms


def zf_detectors(s: Scenario) -> np.ndarray:
    """Receive vectors orthogonal to every other user's channel (K <= N)."""
    return zf_directions(s)


def mmse_detectors(s: Scenario, lp: LayerPartition, powers,
                   mode: str = "layer_aware") -> np.ndarray:
    """
    Unit-norm linear MMSE receive vectors.

    ``layer_aware`` whitens each stream against the interference that is
    still present when its layer is detected. ``static`` whitens against all
    other streams regardless of the layering.
    """
    if mode not in MMSE_MODES:
        raise InvalidSpec(f"unknown MMSE mode {mode!r}")
    K, N = s.channels.shape
    p = np.asarray(powers, dtype=float)
    if p.shape != (K,):
        raise DimensionError(f"need {K} powers, got shape {p.shape}")
    sigma2 = s.uplink_noise_power
    idx = lp.layer_index(K)
    out = np.empty((K, N), dtype=complex)
    for k in range(K):
        if mode == "layer_aware":
            interf = (idx >= idx[k])
        else:
            interf = np.ones(K, dtype=bool)
        interf[k] = False
        h = s.channels[interf]
        cov = (h.T * p[interf]) @ h.conj() + sigma2 * np.eye(N)
        v = np.linalg.solve(cov, s.channels[k])
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ZeroChannel(f"user {k} has an all-zero channel")
        out[k] = v / nrm
    return out


def mmse_detectors_batch(s: Scenario, lp: LayerPartition, power_grid: np.ndarray) -> np.ndarray:
    """Layer-aware MMSE vectors for every row of ``power_grid``; shape (P, K, N)."""
    K, N = s.channels.shape
    grid = np.asarray(power_grid, dtype=float)
    sigma2 = s.uplink_noise_power
    idx = lp.layer_index(K)
    h = s.channels
    outer = np.einsum("jn,jm->jnm", h, h.conj())          # h_j h_j^H
    out = np.empty((grid.shape[0], K, N), dtype=complex)
    for k in range(K):
        interf = (idx >= idx[k])
        interf[k] = False
        cov = np.einsum("pj,jnm->pnm", grid[:, interf], outer[interf])
        cov = cov + sigma2 * np.eye(N)
        rhs = np.broadcast_to(h[k][:, None], (grid.shape[0], N, 1))
        v = np.linalg.solve(cov, rhs)[..., 0]
        out[:, k] = v / np.linalg.norm(v, axis=1, keepdims=True)
    return out


def mac_sum_capacity(s: Scenario, powers) -> float:
    """``log2 det(I + sum_k p_k h_k h_k^H / sigma^2)``."""
    p = np.asarray(powers, dtype=float)
    h = s.channels
    cov = np.eye(s.n_antennas) + (h.T * p) @ h.conj() / s.uplink_noise_power
    sign, logdet = np.linalg.slogdet(cov)
    return float(logdet / np.log(2.0))


def csv_rows(lp: LayerPartition, rates) -> list:
    """Rows ``(user, layer, rate)`` with 1-based labels."""
    idx = lp.layer_index(len(rates))
    return [(k + 1, int(idx[k]) + 1, float(r)) for k, r in enumerate(rates)]
