"""
Scenario container, seeded channel generation and complex-vector helpers.

Channels are stored as an ``(K, N)`` complex array whose row ``k`` is the
column vector ``h_k``. Downlink terms ``h_k^H w`` are evaluated as
``np.vdot(h_k, w)``; uplink terms ``v^H h_k`` as ``np.vdot(v, h_k)``.

All random draws go through :func:`numpy.random.default_rng` (PCG64), so a
fixed seed reproduces the same channels on every platform numpy supports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, InvalidSpec, InvalidUser

CHANNEL_KINDS = ("iid_complex_gaussian", "correlated_pair",
                 "clustered_correlated", "explicit")


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def as_complex_vector(values) -> np.ndarray:
    """Convert ``values`` into a finite, non-empty 1-D complex array."""
    vec = np.asarray(values, dtype=complex)
    if vec.ndim != 1 or vec.size < 1:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise InvalidSpec("vector has non-finite entries")
    return vec


def inner_product(a, b) -> complex:
    """Return ``a^H b``, conjugate-linear in ``a``.

    >>> inner_product([1, 2j], [3, 1])
    (3-2j)
    """
    a = as_complex_vector(a)
    b = as_complex_vector(b)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def unit(vec) -> np.ndarray:
    """Scale ``vec`` to unit Euclidean norm."""
    vec = as_complex_vector(vec)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise InvalidSpec("cannot normalise a zero vector")
    return vec / nrm


@dataclass(frozen=True)
class Scenario:
    """
    An ``N``-antenna base station and ``K`` single-antenna users.

    Parameters
    ----------
    channels : array_like, shape (K, N)
        Row ``k`` is the channel vector ``h_k``.
    noise_powers : array_like, shape (K,)
        Per-user noise power in Watts. Uplink evaluation uses a single
        receiver noise power and requires all entries to be equal.
    power_budget : float
        Total downlink transmit power, or the per-user uplink power cap.
    """

    channels: np.ndarray
    noise_powers: np.ndarray
    power_budget: float

    def __post_init__(self):
        h = np.asarray(self.channels, dtype=complex)
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise DimensionError(f"channels must have shape (K, N), got {h.shape}")
        if not np.all(np.isfinite(h)):
            raise InvalidSpec("channels contain non-finite entries")
        sigma2 = np.asarray(self.noise_powers, dtype=float)
        if sigma2.ndim == 0:
            sigma2 = np.full(h.shape[0], float(sigma2))
        if sigma2.shape != (h.shape[0],):
            raise DimensionError(
                f"need {h.shape[0]} noise powers, got shape {sigma2.shape}")
        if not np.all(np.isfinite(sigma2)) or np.any(sigma2 <= 0):
            raise InvalidSpec("noise powers must be finite and > 0")
        budget = float(self.power_budget)
        if not np.isfinite(budget) or budget <= 0:
            raise InvalidSpec("power budget must be finite and > 0")
        object.__setattr__(self, "channels", _frozen(h))
        object.__setattr__(self, "noise_powers", _frozen(sigma2))
        object.__setattr__(self, "power_budget", budget)

    @property
    def n_users(self) -> int:
        return self.channels.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.channels.shape[1]

    @property
    def uplink_noise_power(self) -> float:
        """The single BS noise power used by uplink formulas."""
        if np.any(self.noise_powers != self.noise_powers[0]):
            raise InvalidSpec("uplink evaluation needs one common noise power")
        return float(self.noise_powers[0])

    def check_user(self, k: int) -> int:
        if not isinstance(k, (int, np.integer)) or not 0 <= k < self.n_users:
            raise InvalidUser(f"user index {k!r} outside 0..{self.n_users - 1}")
        return int(k)

    def scaled(self, factor: float) -> "Scenario":
        """Same channels with noise and budget multiplied by ``factor``."""
        return Scenario(self.channels, self.noise_powers * factor,
                        self.power_budget * factor)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n_antennas": self.n_antennas,
            "n_users": self.n_users,
            "channels": [encode_vector(h) for h in self.channels],
            "noise_powers": [float(x) for x in self.noise_powers],
            "power_budget": self.power_budget,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            channels = np.array([decode_vector(h) for h in data["channels"]])
            scen = cls(channels, data["noise_powers"], data["power_budget"])
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"malformed scenario: {exc}") from exc
        if "n_users" in data and int(data["n_users"]) != scen.n_users:
            raise InvalidSpec("n_users does not match the channel list")
        if "n_antennas" in data and int(data["n_antennas"]) != scen.n_antennas:
            raise InvalidSpec("n_antennas does not match the channel length")
        return scen

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"scenario is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidSpec("scenario JSON must be an object")
        return cls.from_dict(data)


def encode_vector(vec) -> list:
    """Complex vector as a list of ``[re, im]`` pairs."""
    return [[float(z.real), float(z.imag)] for z in np.asarray(vec, dtype=complex)]


def decode_vector(pairs) -> np.ndarray:
    """Inverse of :func:`encode_vector`. Plain real numbers are accepted too."""
    out = []
    for z in pairs:
        if isinstance(z, (list, tuple)):
            if len(z) != 2:
                raise InvalidSpec(f"complex entry must be [re, im], got {z!r}")
            out.append(complex(float(z[0]), float(z[1])))
        else:
            out.append(complex(float(z)))
    return as_complex_vector(out)


@dataclass(frozen=True)
class ChannelSpec:
    """
    Recipe for the channel vectors of a scenario.

    ``correlation_constants`` are the scalars ``c`` in ``h_a = c * h_b``.
    For ``correlated_pair`` (K = 2) a single constant ties user 0 to user 1.
    For ``clustered_correlated`` (K even) constant ``j`` ties user ``j`` to
    user ``j + K/2``. When ``explicit_values`` is given with a correlated
    kind, it supplies the base channels (the second half of the users)
    instead of a random draw.

    ``user_gains`` are optional per-user power gains (path loss) applied to
    iid draws as an amplitude factor ``sqrt(gain)``.
    """

    kind: str = "iid_complex_gaussian"
    correlation_constants: Optional[Sequence[complex]] = None
    explicit_values: Optional[Sequence] = None
    seed: int = 0
    user_gains: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise InvalidSpec(f"unknown channel kind {self.kind!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpec("seed must be an unsigned 64-bit integer")


def generate_scenario(spec: ChannelSpec, n_antennas: int, n_users: int,
                      noise_powers, power_budget: float) -> Scenario:
    """Build a :class:`Scenario` from ``spec``; deterministic in ``spec.seed``."""
    if n_antennas < 1 or n_users < 1:
        raise InvalidSpec("need at least one antenna and one user")
    rng = np.random.default_rng(int(spec.seed))
    consts = spec.correlation_constants
    if spec.user_gains is not None and spec.kind != "iid_complex_gaussian":
        raise InvalidSpec("user_gains only apply to iid_complex_gaussian")

    def draw(count):
        z = rng.standard_normal((count, n_antennas, 2))
        return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)

    def base(count):
        if spec.explicit_values is None:
            return draw(count)
        vals = np.array([decode_vector(v) for v in spec.explicit_values])
        if vals.shape != (count, n_antennas):
            raise InvalidSpec(f"expected {count} base channels of length {n_antennas}")
        return vals

    if spec.kind == "explicit":
        if spec.explicit_values is None:
            raise InvalidSpec("explicit kind needs explicit_values")
        h = np.array([decode_vector(v) for v in spec.explicit_values])
        if h.shape != (n_users, n_antennas):
            raise InvalidSpec(
                f"explicit channels have shape {h.shape}, expected {(n_users, n_antennas)}")
    elif spec.kind == "iid_complex_gaussian":
        h = draw(n_users)
        if spec.user_gains is not None:
            gains = np.asarray(spec.user_gains, dtype=float)
            if gains.shape != (n_users,) or np.any(gains < 0):
                raise InvalidSpec("user_gains needs one non-negative gain per user")
            h = h * np.sqrt(gains)[:, None]
    elif spec.kind == "correlated_pair":
        if n_users != 2:
            raise InvalidSpec("correlated_pair requires exactly two users")
        if consts is None or len(consts) != 1:
            raise InvalidSpec("correlated_pair requires one correlation constant")
        h2 = base(1)[0]
        h = np.array([complex(consts[0]) * h2, h2])
    else:
        if n_users % 2:
            raise InvalidSpec("clustered_correlated requires an even user count")
        half = n_users // 2
        if consts is None or len(consts) != half:
            raise InvalidSpec(f"clustered_correlated requires {half} correlation constants")
        tail = base(half)
        head = np.array([complex(c) for c in consts])[:, None] * tail
        h = np.vstack([head, tail])
    return Scenario(h, noise_powers, power_budget)


def normalize_partition(blocks, what="partition") -> tuple:
    """Tuple-of-tuples copy of ``blocks``; blocks non-empty and disjoint."""
    try:
        out = tuple(tuple(int(u) for u in blk) for blk in blocks)
    except TypeError as exc:
        raise InvalidSpec(f"{what} must be a list of user-index lists") from exc
    if not out:
        raise InvalidSpec(f"{what} has no blocks")
    seen = set()
    for blk in out:
        if not blk:
            raise InvalidSpec(f"{what} contains an empty block")
        for u in blk:
            if u in seen:
                raise InvalidSpec(f"user {u} appears twice in {what}")
            seen.add(u)
    return out


def check_covers(blocks, n_users: int, what="partition"):
    """Raise unless ``blocks`` covers exactly the users ``0..n_users-1``."""
    users = sorted(u for blk in blocks for u in blk)
    if users != list(range(n_users)):
        missing = sorted(set(range(n_users)) - set(users))
        if missing:
            raise InvalidUser(f"users {missing} are not in any block of the {what}")
        raise InvalidUser(f"{what} references users outside 0..{n_users - 1}")
