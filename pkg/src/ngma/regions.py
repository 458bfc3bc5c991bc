"""
Two-user single-antenna broadcast and multiple-access rate regions.

NOMA curves use superposition coding with SIC; OMA curves split the
resource orthogonally (time or bandwidth fraction ``tau``). By default OMA
users concentrate their power in their own fraction (``p / tau`` inside the
log); ``power_reallocation=False`` gives the fixed-power variant.

SNRs are linear (``|h_k|^2 / sigma^2``), powers in Watts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec


@dataclass(frozen=True)
class RegionSpec:
    snr_1: float
    snr_2: float
    power_budget: float = 1.0
    grid_points: int = 1001

    def __post_init__(self):
        if not (self.snr_1 > 0 and self.snr_2 > 0):
            raise InvalidSpec("SNRs must be positive")
        if not self.power_budget > 0:
            raise InvalidSpec("power budget must be positive")
        if int(self.grid_points) < 2:
            raise InvalidSpec("grid_points must be at least 2")

    @classmethod
    def from_db(cls, snr1_db, snr2_db, power_budget=1.0, grid_points=1001):
        return cls(10 ** (snr1_db / 10), 10 ** (snr2_db / 10), power_budget, grid_points)


@dataclass(frozen=True)
class RegionBoundary:
    """Boundary points as an ``(n, 2)`` array of ``(R1, R2)``."""

    scheme: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def r1(self):
        return self.points[:, 0]

    @property
    def r2(self):
        return self.points[:, 1]


def _shared_rate(frac, power, snr, reallocate):
    """``frac * log2(1 + power * snr / frac)``, continuous at ``frac = 0``."""
    frac = np.asarray(frac, dtype=float)
    power = np.asarray(power, dtype=float)
    if not reallocate:
        return frac * np.log2(1.0 + power * snr)
    safe = np.where(frac > 0, frac, 1.0)
    return np.where(frac > 0, frac * np.log2(1.0 + power * snr / safe), 0.0)


def _sc_rates(p_strong, p_weak, snr_strong, snr_weak):
    strong = np.log2(1.0 + p_strong * snr_strong)
    weak = np.log2(1.0 + p_weak * snr_weak / (p_strong * snr_weak + 1.0))
    return strong, weak


def bc_noma_boundary(spec: RegionSpec) -> RegionBoundary:
    """Superposition coding: the stronger user cancels the weaker one."""
    P = spec.power_budget
    p1 = np.linspace(0.0, P, int(spec.grid_points))
    p2 = P - p1
    if spec.snr_1 >= spec.snr_2:
        r1, r2 = _sc_rates(p1, p2, spec.snr_1, spec.snr_2)
    else:
        r2, r1 = _sc_rates(p2, p1, spec.snr_2, spec.snr_1)
    pts = np.column_stack([r1, r2])
    return RegionBoundary("NOMA", pts[np.argsort(pts[:, 0], kind="stable")])


def bc_oma_points(spec: RegionSpec, power_reallocation: bool = True) -> np.ndarray:
    """Every point of the (time share, power split) grid, shape (n*n, 2)."""
    n = int(spec.grid_points)
    tau, p1 = np.meshgrid(np.linspace(0.0, 1.0, n),
                          np.linspace(0.0, spec.power_budget, n), indexing="ij")
    p2 = spec.power_budget - p1
    r1 = _shared_rate(tau, p1, spec.snr_1, power_reallocation)
    r2 = _shared_rate(1.0 - tau, p2, spec.snr_2, power_reallocation)
    return np.column_stack([r1.ravel(), r2.ravel()])


def pareto_front(points) -> np.ndarray:
    """Non-dominated subset of ``points`` sorted by increasing R1."""
    pts = np.asarray(points, dtype=float)
    ranked = pts[np.lexsort((-pts[:, 1], -pts[:, 0]))]
    # keep a point when it beats every R2 seen at larger (or equal) R1
    seen = np.maximum.accumulate(np.concatenate([[-np.inf], ranked[:-1, 1]]))
    return ranked[ranked[:, 1] > seen][::-1]


def bc_oma_boundary(spec: RegionSpec, power_reallocation: bool = True) -> RegionBoundary:
    return RegionBoundary("OMA", pareto_front(bc_oma_points(spec, power_reallocation)))


def mac_corners(spec: RegionSpec):
    """SIC corner points ``(A, B)`` at full power.

    ``A`` decodes user 1 first (user 2 interference-free), ``B`` decodes
    user 2 first.
    """
    P = spec.power_budget
    s1, s2 = spec.snr_1 * P, spec.snr_2 * P
    a = (np.log2(1.0 + s1 / (s2 + 1.0)), np.log2(1.0 + s2))
    b = (np.log2(1.0 + s1), np.log2(1.0 + s2 / (s1 + 1.0)))
    return a, b


def mac_noma_boundary(spec: RegionSpec) -> RegionBoundary:
    """Pentagon boundary: both axis faces plus the time-sharing segment."""
    a, b = mac_corners(spec)
    t = np.linspace(0.0, 1.0, int(spec.grid_points))[:, None]
    segment = (1.0 - t) * np.array(a) + t * np.array(b)
    pts = np.vstack([[0.0, a[1]], segment, [b[0], 0.0]])
    return RegionBoundary("NOMA", pts)


def mac_oma_tangent_share(spec: RegionSpec) -> float:
    """Bandwidth share at which OMA touches the sum-capacity face."""
    return spec.snr_1 / (spec.snr_1 + spec.snr_2)


def mac_oma_boundary(spec: RegionSpec, power_reallocation: bool = True,
                     include_tangent: bool = True) -> RegionBoundary:
    """
    Bandwidth split between two users, each at full power.

    With ``include_tangent`` the share where OMA meets the sum-capacity face
    is inserted into the uniform grid.
    """
    P = spec.power_budget
    share = np.linspace(0.0, 1.0, int(spec.grid_points))
    if include_tangent:
        share = np.unique(np.append(share, mac_oma_tangent_share(spec)))
    r1 = _shared_rate(share, P, spec.snr_1, power_reallocation)
    r2 = _shared_rate(1.0 - share, P, spec.snr_2, power_reallocation)
    return RegionBoundary("OMA", np.column_stack([r1, r2]))


def bc_region_slack(spec: RegionSpec, points) -> np.ndarray:
    """
    Vertical margin of ``points`` below the BC capacity boundary.

    Non-negative means inside the region. Points beyond the strong user's
    single-user rate get the (negative) horizontal overshoot.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    P = spec.power_budget
    if spec.snr_1 >= spec.snr_2:
        own, other = pts[:, 0], pts[:, 1]
        snr_s, snr_w = spec.snr_1, spec.snr_2
    else:
        own, other = pts[:, 1], pts[:, 0]
        snr_s, snr_w = spec.snr_2, spec.snr_1
    cap = np.log2(1.0 + snr_s * P)
    p_s = np.clip((np.exp2(own) - 1.0) / snr_s, 0.0, P)
    _, weak_max = _sc_rates(p_s, P - p_s, snr_s, snr_w)
    return np.where(own <= cap, weak_max - other, cap - own)


def mac_region_slack(spec: RegionSpec, points) -> np.ndarray:
    """Smallest margin to the three pentagon faces (non-negative = inside)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    P = spec.power_budget
    c1 = np.log2(1.0 + spec.snr_1 * P)
    c2 = np.log2(1.0 + spec.snr_2 * P)
    csum = np.log2(1.0 + (spec.snr_1 + spec.snr_2) * P)
    return np.minimum.reduce([c1 - pts[:, 0], c2 - pts[:, 1],
                              csum - pts[:, 0] - pts[:, 1]])


def mac_sum_face_gap(spec: RegionSpec, points) -> np.ndarray:
    """Distance of ``R1 + R2`` below the sum capacity."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    csum = np.log2(1.0 + (spec.snr_1 + spec.snr_2) * spec.power_budget)
    return csum - pts[:, 0] - pts[:, 1]
