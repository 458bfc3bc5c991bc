"""
Exhaustive search over groupings, decoding orders, direction families and
power grids.

The search space is finite and declared up front. Configurations are
visited in lexicographic order of their canonical encoding (grouping or
layer partition, then decoding order, then family index, then power grid
indices) and only a strictly better value replaces the incumbent, so the
winner is the lexicographically smallest maximiser. Evaluation can fan out
over threads (``workers`` or the ``NGMA_THREADS`` environment variable);
the reduction runs in enumeration order, so results match a serial run.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .core import Scenario, encode_vector
from .downlink import (SIC_MODES, SIC_TOL, BeamformerSet, Grouping,
                       IntraClusterOrder, cluster_matched_directions,
                       cluster_zf_directions, mrt_directions, zf_directions)
from .errors import Infeasible, InvalidSpec, NGMAError, SearchTooLarge
from .uplink import (DetectorSet, LayerPartition, mmse_detectors_batch,
                     mrc_detectors, zf_detectors)

DEFAULT_CAP = 10**7
OBJECTIVES = ("sum_rate", "min_rate")
DL_FAMILIES = ("zf", "cluster_zf", "mrc_like", "matched_to_channels")
SHARED_FAMILIES = ("cluster_zf", "matched_to_channels")
UL_FAMILIES = ("mrc", "zf", "mmse")
DL_SCHEMES = ("ngma", "sdma", "bb_noma", "cb_noma")
UL_SCHEMES = ("ngma", "sdma", "noma")


# -- combinatorics ------------------------------------------------------

def set_partitions(n: int):
    """Yield every partition of ``range(n)`` as a tuple of sorted tuples."""
    if n == 0:
        yield ()
        return

    def grow(k, blocks):
        if k == n:
            yield tuple(tuple(b) for b in blocks)
            return
        for b in blocks:
            b.append(k)
            yield from grow(k + 1, blocks)
            b.pop()
        blocks.append([k])
        yield from grow(k + 1, blocks)
        blocks.pop()

    yield from grow(0, [])


def enumerate_ordered_partitions(n_users: int) -> list:
    """Every ordered set partition of the users, each exactly once.

    The count is the ordered Bell (Fubini) number: 1, 3, 13, 75, 541, ...
    """
    out = []
    for part in set_partitions(n_users):
        for perm in itertools.permutations(part):
            out.append(LayerPartition(perm))
    out.sort(key=LayerPartition.canonical)
    return out


def downlink_power_grid(n_users: int, steps: int) -> np.ndarray:
    """Integer grid points ``n`` with ``sum(n) <= steps``, lexicographic."""
    pts = [n for n in itertools.product(range(steps + 1), repeat=n_users)
           if sum(n) <= steps]
    return np.array(pts, dtype=int).reshape(-1, n_users)


def uplink_power_grid(n_users: int, steps: int) -> np.ndarray:
    """Every user independently on ``0..steps``, lexicographic."""
    return np.array(list(itertools.product(range(steps + 1), repeat=n_users)),
                    dtype=int).reshape(-1, n_users)


# -- search space and result -------------------------------------------

@dataclass(frozen=True)
class SearchSpace:
    """
    Finite search space.

    ``direction_family`` is a family name, a tuple of names, or an explicit
    ``(K, N)`` array of directions (downlink beams / uplink detectors).
    ``grouping`` holds a :class:`Grouping` (downlink) or
    :class:`LayerPartition` (uplink) when ``grouping_mode == "fixed"``;
    ``order`` an :class:`IntraClusterOrder` when ``order_mode == "fixed"``.
    ``scheme`` restricts the structures searched, e.g. ``"sdma"``.
    """

    grouping_mode: str = "all_partitions"
    order_mode: str = "all_permutations"
    direction_family: Union[str, Sequence[str], np.ndarray] = "mrc_like"
    power_grid: int = 4
    objective: str = "sum_rate"
    scheme: str = "ngma"
    sic_mode: str = "strict"
    grouping: Optional[object] = None
    order: Optional[IntraClusterOrder] = None
    cap: int = DEFAULT_CAP
    workers: Optional[int] = None

    def __post_init__(self):
        if self.grouping_mode not in ("all_partitions", "fixed"):
            raise InvalidSpec(f"unknown grouping_mode {self.grouping_mode!r}")
        if self.order_mode not in ("all_permutations", "fixed"):
            raise InvalidSpec(f"unknown order_mode {self.order_mode!r}")
        if self.grouping_mode == "fixed" and self.grouping is None:
            raise InvalidSpec("fixed grouping_mode needs a grouping")
        if self.order_mode == "fixed" and self.order is None:
            raise InvalidSpec("fixed order_mode needs an order")
        if int(self.power_grid) < 1:
            raise InvalidSpec("power_grid must be a positive integer")
        if self.objective not in OBJECTIVES:
            raise InvalidSpec(f"unknown objective {self.objective!r}")
        if self.sic_mode not in SIC_MODES:
            raise InvalidSpec(f"unknown sic_mode {self.sic_mode!r}")
        if int(self.cap) < 1:
            raise InvalidSpec("cap must be positive")

    def families(self):
        fam = self.direction_family
        if isinstance(fam, str):
            return (fam,)
        if isinstance(fam, np.ndarray) and fam.ndim == 2:
            return (fam,)
        fams = tuple(fam)
        if fams and not isinstance(fams[0], str):
            return (np.asarray(fams, dtype=complex),)
        return fams


def _family_name(fam) -> str:
    return fam if isinstance(fam, str) else "explicit"


@dataclass(frozen=True)
class DownlinkConfig:
    grouping: Grouping
    order: IntraClusterOrder
    family: str
    beamformers: BeamformerSet
    power_index: tuple

    def to_dict(self) -> dict:
        return {
            "grouping": self.grouping.to_list(),
            "order": self.order.to_list(),
            "family": self.family,
            "directions": [encode_vector(d) for d in self.beamformers.directions],
            "powers": [float(p) for p in self.beamformers.powers],
            "power_index": list(self.power_index),
        }


@dataclass(frozen=True)
class UplinkConfig:
    layers: LayerPartition
    family: str
    detectors: DetectorSet
    power_index: tuple

    def to_dict(self) -> dict:
        return {
            "layers": self.layers.to_list(),
            "family": self.family,
            "detectors": [encode_vector(v) for v in self.detectors.vectors],
            "powers": [float(p) for p in self.detectors.powers],
            "power_index": list(self.power_index),
        }


@dataclass(frozen=True)
class SearchResult:
    best_config: object
    best_value: float
    feasible: bool
    evaluations: int
    objective: str = "sum_rate"
    min_slack: float = float("inf")
    # uplink only: (L, best value with exactly L layers), and its Pareto subset
    per_layer_best: tuple = ()
    pareto: tuple = ()

    def to_dict(self) -> dict:
        out = {
            "objective": self.objective,
            "best_value": self.best_value,
            "feasible": self.feasible,
            "evaluations": self.evaluations,
            "best_config": self.best_config.to_dict() if self.best_config else None,
        }
        if math.isfinite(self.min_slack):
            out["min_slack"] = self.min_slack
        if self.pareto:
            out["per_layer_best"] = [[l, v] for l, v in self.per_layer_best]
            out["pareto"] = [[l, v] for l, v in self.pareto]
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _workers(space: SearchSpace) -> int:
    if space.workers is not None:
        return max(1, int(space.workers))
    env = os.environ.get("NGMA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidSpec(f"NGMA_THREADS must be an integer, got {env!r}") from exc
    return 1


def _map(fn, items, workers):
    if workers <= 1:
        return map(fn, items)
    pool = ThreadPoolExecutor(max_workers=workers)
    try:
        return list(pool.map(fn, items))
    finally:
        pool.shutdown()


def _objective(rates: np.ndarray, objective: str) -> np.ndarray:
    return rates.sum(axis=1) if objective == "sum_rate" else rates.min(axis=1)


# -- downlink -------------------------------------------------------------

def _dl_groupings(K: int, space: SearchSpace) -> list:
    if space.grouping_mode == "fixed":
        g = space.grouping
        if not isinstance(g, Grouping):
            g = Grouping(g)
        g.check(K)
        return [g]
    allowed = {
        "ngma": lambda p: True,
        "sdma": lambda p: len(p) == K,
        "bb_noma": lambda p: len(p) == 1,
        "cb_noma": lambda p: 1 < len(p) < K and all(len(b) >= 2 for b in p),
    }
    if space.scheme not in allowed:
        raise InvalidSpec(f"unknown downlink scheme {space.scheme!r}")
    parts = [Grouping(p) for p in set_partitions(K) if allowed[space.scheme](p)]
    parts.sort(key=Grouping.canonical)
    return parts


def _dl_orders(g: Grouping, space: SearchSpace) -> list:
    if space.order_mode == "fixed":
        space.order.check(g)
        return [space.order]
    clusters = g.canonical()
    return [IntraClusterOrder(seq)
            for seq in itertools.product(*(itertools.permutations(c) for c in clusters))]


def _dl_families(space: SearchSpace):
    fams = space.families()
    for fam in fams:
        if isinstance(fam, str) and fam not in DL_FAMILIES:
            raise InvalidSpec(f"unknown downlink direction family {fam!r}")
    if space.scheme == "cb_noma":
        fams = tuple(f for f in fams if isinstance(f, str) and f in SHARED_FAMILIES)
    return fams


def dl_family_directions(s: Scenario, g: Grouping, fam) -> Optional[np.ndarray]:
    """Per-user unit directions, or ``None`` when the family is unavailable."""
    labels = g.labels(s.n_users)
    try:
        if not isinstance(fam, str):
            d = np.asarray(fam, dtype=complex)
            if d.shape != s.channels.shape:
                raise InvalidSpec(f"explicit directions must have shape {s.channels.shape}")
            return d / np.linalg.norm(d, axis=1, keepdims=True)
        if fam == "zf":
            return zf_directions(s)
        if fam == "mrc_like":
            return mrt_directions(s)
        if fam == "cluster_zf":
            return cluster_zf_directions(s, g)[labels]
        return cluster_matched_directions(s, g)[labels]
    except InvalidSpec:
        raise
    except NGMAError:
        return None


def _dl_evaluate(s, g, o, dirs, powers, objective, sic_mode, tol=SIC_TOL):
    """Vectorised rates over a power grid; returns (values, min_slack)."""
    K = s.n_users
    amp = np.abs(np.conj(s.channels) @ dirs.T) ** 2          # |h_k^H wbar_j|^2
    gains = amp[None, :, :] * powers[:, None, :]             # (P, K, K)
    labels = g.labels(K)
    same = labels[:, None] == labels[None, :]
    eye = np.eye(K, dtype=bool)
    gate = np.ones((K, K), dtype=bool)
    for (k, i), a in o.alpha.items():
        gate[k, i] = bool(a)
    # user mask: other clusters always, own cluster where alpha == 1
    mask = ~eye & (~same | gate)
    sigma2 = s.noise_powers[None, :]
    interference = np.where(mask[None], gains, 0.0).sum(axis=2)
    signal = np.einsum("pkk->pk", gains)
    rates = np.log2(1.0 + signal / (interference + sigma2))
    slack = np.full(powers.shape[0], np.inf)
    for k, i in o.sic_pairs():
        # at decoder k while decoding i: co-clustered signals decoded after i
        keep = (~same[i] | gate[i]) & ~eye[i]
        interf = (gains[:, k, :] * keep[None, :]).sum(axis=1)
        r_ik = np.log2(1.0 + gains[:, k, i] / (interf + s.noise_powers[k]))
        if sic_mode == "relaxed":
            rates[:, i] = np.minimum(rates[:, i], r_ik)
        else:
            slack = np.minimum(slack, r_ik - rates[:, i])
    return _objective(rates, objective), slack


def count_downlink_configurations(s: Scenario, space: SearchSpace) -> int:
    K = s.n_users
    groupings = _dl_groupings(K, space)
    if space.order_mode == "fixed":
        n_orders = len(groupings)
    else:
        n_orders = sum(math.prod(math.factorial(len(c)) for c in g.clusters)
                       for g in groupings)
    n_power = math.comb(int(space.power_grid) + K, K)
    return n_orders * len(_dl_families(space)) * n_power


def dl_exhaustive_search(s: Scenario, space: SearchSpace) -> SearchResult:
    """
    Best SIC-feasible downlink configuration in ``space``.

    Raises
    ------
    SearchTooLarge
        The enumeration would exceed ``space.cap`` configurations.
    Infeasible
        No configuration satisfies the SIC conditions; the exception
        carries the least-violating configuration.
    """
    total = count_downlink_configurations(s, space)
    if total > space.cap:
        raise SearchTooLarge(f"{total} configurations exceed the cap {space.cap}",
                             total, space.cap)
    K = s.n_users
    steps = int(space.power_grid)
    grid_idx = downlink_power_grid(K, steps)
    powers = grid_idx * (s.power_budget / steps)
    fams = _dl_families(space)

    def blocks():
        for g in _dl_groupings(K, space):
            dirs_by_fam = [(fi, dl_family_directions(s, g, f)) for fi, f in enumerate(fams)]
            for o in _dl_orders(g, space):
                for fi, dirs in dirs_by_fam:
                    if dirs is not None:
                        yield g, o, fi, dirs

    def run(block):
        g, o, fi, dirs = block
        return block, _dl_evaluate(s, g, o, dirs, powers, space.objective, space.sic_mode)

    best = None            # (value, block, power row)
    least_bad = None       # (slack, value, block, power row)
    evaluations = 0
    for block, (values, slack) in _map(run, blocks(), _workers(space)):
        evaluations += len(values)
        ok = slack >= -SIC_TOL
        if ok.any():
            cand = np.where(ok, values, -np.inf)
            j = int(np.argmax(cand))
            if best is None or cand[j] > best[0]:
                best = (float(cand[j]), block, j, float(slack[j]))
        elif best is None:
            j = int(np.argmax(slack))
            if least_bad is None or slack[j] > least_bad[0]:
                least_bad = (float(slack[j]), float(values[j]), block, j)

    def config(block, j):
        g, o, fi, dirs = block
        return DownlinkConfig(g, o, _family_name(fams[fi]),
                              BeamformerSet(dirs, powers[j]),
                              tuple(int(x) for x in grid_idx[j]))

    if best is None:
        if least_bad is None:
            raise Infeasible("no configuration could be evaluated in this search space")
        slack, value, block, j = least_bad
        result = SearchResult(config(block, j), value, False, evaluations,
                              space.objective, slack)
        raise Infeasible(f"no SIC-feasible configuration (best slack {slack:.3e})",
                         result, slack)
    value, block, j, slack = best
    return SearchResult(config(block, j), value, True, evaluations,
                        space.objective, slack)


# -- uplink ----------------------------------------------------------------

def _ul_partitions(K: int, space: SearchSpace) -> list:
    if space.grouping_mode == "fixed":
        lp = space.grouping
        if not isinstance(lp, LayerPartition):
            lp = LayerPartition(lp)
        lp.check(K)
        return [lp]
    if space.scheme == "ngma":
        return enumerate_ordered_partitions(K)
    if space.scheme == "sdma":
        return [LayerPartition.parallel(K)]
    if space.scheme == "noma":
        return [LayerPartition.serial(p) for p in itertools.permutations(range(K))]
    raise InvalidSpec(f"unknown uplink scheme {space.scheme!r}")


def _ul_families(space: SearchSpace):
    fams = space.families()
    for fam in fams:
        if isinstance(fam, str) and fam not in UL_FAMILIES:
            raise InvalidSpec(f"unknown uplink detector family {fam!r}")
    return fams


def count_uplink_configurations(s: Scenario, space: SearchSpace) -> int:
    K = s.n_users
    return (len(_ul_partitions(K, space)) * len(_ul_families(space))
            * (int(space.power_grid) + 1) ** K)


def _ul_detectors(s: Scenario, lp: LayerPartition, fam, powers) -> Optional[np.ndarray]:
    """Detector stack of shape (P, K, N), or ``None`` if unavailable."""
    n_pts = powers.shape[0]
    try:
        if not isinstance(fam, str):
            v = np.asarray(fam, dtype=complex)
            if v.shape != s.channels.shape:
                raise InvalidSpec(f"explicit detectors must have shape {s.channels.shape}")
            v = v / np.linalg.norm(v, axis=1, keepdims=True)
        elif fam == "mrc":
            v = mrc_detectors(s)
        elif fam == "zf":
            v = zf_detectors(s)
        else:
            return mmse_detectors_batch(s, lp, powers)
    except InvalidSpec:
        raise
    except NGMAError:
        return None
    return np.broadcast_to(v, (n_pts,) + v.shape)


def _ul_evaluate(s, lp, vecs, powers, objective):
    K = s.n_users
    sigma2 = s.uplink_noise_power
    amp = np.abs(np.einsum("pkn,jn->pkj", np.conj(vecs), s.channels)) ** 2
    coupling = amp * powers[:, None, :]
    idx = lp.layer_index(K)
    mask = (idx[None, :] >= idx[:, None]) & ~np.eye(K, dtype=bool)
    interference = np.where(mask[None], coupling, 0.0).sum(axis=2)
    signal = np.einsum("pkk->pk", coupling)
    return _objective(np.log2(1.0 + signal / (interference + sigma2)), objective)


def ul_exhaustive_search(s: Scenario, space: SearchSpace) -> SearchResult:
    """
    Best uplink layer partition, detector family and power point.

    The result also lists the best value per layer count ``L`` (a latency
    proxy) and the Pareto subset of those pairs: fewer layers is better,
    higher value is better.
    """
    total = count_uplink_configurations(s, space)
    if total > space.cap:
        raise SearchTooLarge(f"{total} configurations exceed the cap {space.cap}",
                             total, space.cap)
    if np.any(s.noise_powers != s.noise_powers[0]):
        raise InvalidSpec("uplink search needs one common noise power")
    K = s.n_users
    steps = int(space.power_grid)
    grid_idx = uplink_power_grid(K, steps)
    powers = grid_idx * (s.power_budget / steps)
    fams = _ul_families(space)

    def blocks():
        for lp in _ul_partitions(K, space):
            for fi, fam in enumerate(fams):
                yield lp, fi, fam

    def run(block):
        lp, fi, fam = block
        vecs = _ul_detectors(s, lp, fam, powers)
        if vecs is None:
            return block, None, None
        return block, vecs, _ul_evaluate(s, lp, vecs, powers, space.objective)

    best = None
    per_layer = {}
    evaluations = 0
    for block, vecs, values in _map(run, blocks(), _workers(space)):
        if values is None:
            continue
        evaluations += len(values)
        j = int(np.argmax(values))
        L = block[0].n_layers
        per_layer[L] = max(per_layer.get(L, -np.inf), float(values[j]))
        if best is None or values[j] > best[0]:
            best = (float(values[j]), block, vecs[j], j)
    if best is None:
        raise Infeasible("no detector family is available for this scenario")
    value, (lp, fi, fam), vec, j = best
    cfg = UplinkConfig(lp, _family_name(fam), DetectorSet(vec, powers[j]),
                       tuple(int(x) for x in grid_idx[j]))
    per_layer_best = tuple(sorted(per_layer.items()))
    pareto, top = [], -np.inf
    for L, v in per_layer_best:
        if v > top:
            pareto.append((L, v))
            top = v
    return SearchResult(cfg, value, True, evaluations, space.objective,
                        per_layer_best=per_layer_best, pareto=tuple(pareto))
