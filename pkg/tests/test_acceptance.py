"""
End-to-end acceptance checks.

Each test covers one numbered criterion, records a PASS/FAIL line that is
printed in the pytest terminal summary, and fails on any violation. Run
alone with ``pytest tests/test_acceptance.py`` or ``python3
tests/test_acceptance.py``.
"""

import contextlib
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from ngma import (BeamformerSet, DetectorSet, Grouping, IntraClusterOrder,
                  LayerPartition, PermutationOrder, RegionSpec, Scenario,
                  SearchSpace, bc_noma_boundary, bc_oma_boundary,
                  cluster_beamformers, cluster_zf_directions,
                  dl_bb_noma_rates, dl_cb_noma_rates, dl_exhaustive_search,
                  dl_sdma_rates, dl_sic_check, dl_user_rate,
                  enumerate_ordered_partitions, mac_noma_boundary,
                  mac_oma_boundary, mac_sum_capacity, mmse_detectors,
                  mrc_detectors, ul_exhaustive_search, ul_ngma_rate,
                  ul_ngma_rates, ul_noma_rates, ul_sdma_rates)
from ngma.cli import main as cli_main
from ngma.regions import (bc_oma_points, bc_region_slack, mac_corners,
                          mac_region_slack, mac_sum_face_gap)

from conftest import ACCEPTANCE, random_scenario, random_unit_rows

pytestmark = pytest.mark.acceptance

TESTS = Path(__file__).parent
FIG = RegionSpec(10.0, 1.0, 1.0, 1001)
# 6-decimal reference values; the strong-user corner is compared to log2(11)
# itself because its rounded form carries a 1.6e-6 slip
STRONG_CORNER = math.log2(11)


@contextlib.contextmanager
def criterion(number, title):
    """Record PASS/FAIL for ``number`` and re-raise any failure."""
    notes = []
    start = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        ACCEPTANCE.append((number, False, f"{title}: {str(exc).splitlines()[0]}"))
        raise
    elapsed = time.perf_counter() - start
    extra = f" ({'; '.join(notes)})" if notes else ""
    ACCEPTANCE.append((number, True, f"{title} [{elapsed:.2f} s]{extra}"))


def _near(points, target, tol):
    return float(np.min(np.max(np.abs(np.asarray(points) - np.asarray(target)), axis=1))) <= tol


def _corpus(n=1000):
    """Seeded scenarios with K <= 5 users and N <= 6 antennas."""
    rng = np.random.default_rng(2024)
    for seed in range(n):
        K = int(rng.integers(1, 6))
        N = int(rng.integers(1, 7))
        s = random_scenario(10_000 + seed, N, K)
        ul = Scenario(s.channels, np.full(K, s.noise_powers[0]), s.power_budget)
        yield rng, s, ul


def _rel_close(a, b, rtol=1e-12):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(np.abs(b), 1e-300)))


# -- 1 --------------------------------------------------------------------------

def test_criterion_1_bc_regions():
    with criterion(1, "BC regions: NOMA reference points, OMA containment, corners") as notes:
        start = time.perf_counter()
        noma = bc_noma_boundary(FIG).points
        oma_grid = bc_oma_points(FIG)
        oma = bc_oma_boundary(FIG).points
        slack = bc_region_slack(FIG, oma_grid)
        elapsed = time.perf_counter() - start
        for ref in [(STRONG_CORNER, 0.0), (0.0, 1.000000), (2.584963, 0.415037)]:
            assert _near(noma, ref, 1e-6), f"NOMA boundary misses {ref}"
        assert slack.min() >= -1e-9, f"OMA point outside by {slack.min():.3e}"
        for corner in [(STRONG_CORNER, 0.0), (0.0, 1.0)]:
            assert _near(noma, corner, 1e-9) and _near(oma, corner, 1e-9)
        assert elapsed < 1.0, f"took {elapsed:.3f} s"
        notes.append(f"min OMA slack {slack.min():.1e}, compute {elapsed:.3f} s")


# -- 2 --------------------------------------------------------------------------

def test_criterion_2_mac_regions():
    with criterion(2, "MAC regions: pentagon corners, sum face, OMA tangency") as notes:
        start = time.perf_counter()
        a, b = mac_corners(FIG)
        noma = mac_noma_boundary(FIG).points
        oma = mac_oma_boundary(FIG).points
        gap = mac_sum_face_gap(FIG, oma)
        inside = mac_region_slack(FIG, oma)
        elapsed = time.perf_counter() - start
        assert np.allclose(a, (2.584963, 1.000000), rtol=0, atol=1e-6)
        assert np.allclose(b, (STRONG_CORNER, 0.125531), rtol=0, atol=1e-6)
        assert _near(noma, a, 1e-12) and _near(noma, b, 1e-12)
        for corner in (a, b):
            assert abs(sum(corner) - math.log2(12)) <= 1e-9
            assert abs(sum(corner) - 3.584963) <= 1e-6
        touching = np.flatnonzero(gap <= 1e-9)
        assert touching.size >= 1, "OMA never reaches the sum-capacity face"
        assert np.all(np.diff(touching) == 1), "OMA touches the face in several places"
        others = np.delete(np.arange(len(oma)), touching)
        assert np.all(gap[others] > 0) and np.all(inside >= -1e-12)
        assert elapsed < 1.0, f"took {elapsed:.3f} s"
        notes.append(f"{touching.size} touching point(s), next gap {np.sort(gap[others])[0]:.1e}")


# -- 3 --------------------------------------------------------------------------

def test_criterion_3_reductions():
    with criterion(3, "reductions on 1000 seeded scenarios within 1e-12 relative") as notes:
        counts = dict(sdma=0, bb=0, cb=0, ul_sdma=0, ul_noma=0)
        for rng, s, ul in _corpus():
            K, N = s.n_users, s.n_antennas
            share = rng.dirichlet(np.ones(K)) * rng.uniform(0.2, 1.0) * s.power_budget
            b = BeamformerSet(random_unit_rows(rng, K, N), share)

            g = Grouping.singletons(K)
            o = IntraClusterOrder.from_grouping(g)
            ref = [dl_user_rate(s, g, o, b, k) for k in range(K)]
            assert _rel_close(dl_sdma_rates(s, b), ref)
            counts["sdma"] += 1

            g = Grouping.single(K)
            o = IntraClusterOrder([list(rng.permutation(K))])
            ref = [dl_user_rate(s, g, o, b, k) for k in range(K)]
            assert _rel_close(dl_bb_noma_rates(s, o, b), ref)
            counts["bb"] += 1

            if K >= 4:
                perm = [int(x) for x in rng.permutation(K)]
                cut = int(rng.integers(2, K - 1))
                g = Grouping([perm[:cut], perm[cut:]])
                o = IntraClusterOrder([list(rng.permutation(c)) for c in g.clusters])
                dirs = random_unit_rows(rng, 2, N)
                cb = dl_cb_noma_rates(s, g, o, dirs, share)
                bc = cluster_beamformers(g, dirs, share)
                ref = [dl_user_rate(s, g, o, bc, k) for k in range(K)]
                assert _rel_close(cb, ref)
                counts["cb"] += 1

            d = DetectorSet(random_unit_rows(rng, K, N), rng.uniform(0, ul.power_budget, K))
            ref = [ul_ngma_rate(ul, LayerPartition.parallel(K), d, k) for k in range(K)]
            assert _rel_close(ul_sdma_rates(ul, d), ref)
            counts["ul_sdma"] += 1
            seq = [int(x) for x in rng.permutation(K)]
            lp = LayerPartition.serial(seq)
            ref = [ul_ngma_rate(ul, lp, d, k) for k in range(K)]
            assert _rel_close(ul_noma_rates(ul, PermutationOrder.from_sequence(seq), d), ref)
            counts["ul_noma"] += 1
        notes.append(", ".join(f"{k} {v}" for k, v in counts.items()))


# -- 4 --------------------------------------------------------------------------

def test_criterion_4_interference_set_dominance():
    with criterion(4, "uplink NGMA >= SDMA per user, all layer partitions") as notes:
        checks = violations = 0
        partitions = {K: enumerate_ordered_partitions(K) for K in range(1, 6)}
        for rng, _, ul in _corpus():
            K, N = ul.n_users, ul.n_antennas
            p = rng.uniform(0, ul.power_budget, K)
            for vecs in (random_unit_rows(rng, K, N), mrc_detectors(ul)):
                d = DetectorSet(vecs, p)
                sdma = ul_sdma_rates(ul, d)
                for lp in partitions[K]:
                    r = ul_ngma_rates(ul, lp, d)
                    violations += int(np.sum(r < sdma - 1e-12))
                    checks += K
        assert violations == 0, f"{violations} violations"
        notes.append(f"{checks} per-user comparisons, 0 violations")


# -- 5 --------------------------------------------------------------------------

def test_criterion_5_mmse_sic_log_det():
    with criterion(5, "MMSE-SIC sum rate equals log-det, 200 seeds x 5 orders") as notes:
        worst = 0.0
        for seed in range(200):
            rng = np.random.default_rng(70_000 + seed)
            K = int(rng.integers(1, 7))
            N = int(rng.integers(1, 9))
            s = random_scenario(70_000 + seed, N, K, common_noise=True)
            p = rng.uniform(0, s.power_budget, K)
            target = mac_sum_capacity(s, p)
            for _ in range(5):
                lp = LayerPartition.serial(rng.permutation(K))
                total = ul_ngma_rates(s, lp, DetectorSet(mmse_detectors(s, lp, p), p)).sum()
                worst = max(worst, abs(total - target))
        assert worst <= 1e-9, f"largest error {worst:.3e}"
        notes.append(f"largest error {worst:.1e}")


# -- 6 --------------------------------------------------------------------------

def _timed_search(fn, s, space):
    start = time.perf_counter()
    res = fn(s, space)
    elapsed = time.perf_counter() - start
    assert elapsed <= 10.0, f"search took {elapsed:.2f} s"
    return res, elapsed


def test_criterion_6_scenarios():
    with criterion(6, "orthogonal -> SDMA, parallel -> one-cluster NOMA, overloaded cluster-ZF") as notes:
        # orthogonal channels: separate clusters win
        ortho = Scenario([[1, 0], [0, 1]], [1, 1], 1.0)
        res, t1 = _timed_search(dl_exhaustive_search, ortho,
                                SearchSpace(direction_family="zf", power_grid=20))
        assert res.best_config.grouping.clusters == ((0,), (1,))

        # parallel channels h1 = 3 h2. Sum rate ties (all power to user 1), so
        # the structural claim is checked on the max-min objective.
        par = Scenario([[3, 0], [1, 0]], [1, 1], 1.0)
        fam = ("mrc_like", "matched_to_channels")
        res, t2 = _timed_search(dl_exhaustive_search, par,
                                SearchSpace(direction_family=fam, power_grid=20,
                                            objective="min_rate"))
        assert res.best_config.grouping.clusters == ((0, 1),)
        assert res.best_config.order.sequences == ((1, 0),), "user 1 must decode user 2"
        sdma = dl_exhaustive_search(par, SearchSpace(direction_family=fam, power_grid=20,
                                                     objective="min_rate", scheme="sdma"))
        assert res.best_value > sdma.best_value
        tie_n = dl_exhaustive_search(par, SearchSpace(direction_family=fam, power_grid=20))
        tie_s = dl_exhaustive_search(par, SearchSpace(direction_family=fam, power_grid=20,
                                                      scheme="sdma"))
        assert tie_n.best_value == pytest.approx(tie_s.best_value, abs=1e-12)

        # overloaded N = 2, K = 4 with pairwise-parallel channels
        over = Scenario([[1, 0], [0, 1], [0.5, 0], [0, 0.5]], [1] * 4, 2.0)
        g = Grouping([[0, 2], [1, 3]])
        o = IntraClusterOrder([[2, 0], [3, 1]])
        dirs = cluster_zf_directions(over, g)
        for m, outside in ((0, (1, 3)), (1, (0, 2))):
            for j in outside:
                assert abs(np.vdot(over.channels[j], dirs[m])) <= 1e-10
        p = np.array([0.2, 0.2, 0.8, 0.8])
        rep = dl_sic_check(over, g, o, cluster_beamformers(g, dirs, p))
        assert rep.sic_feasible
        for k in (0, 1):
            snr = p[k] * abs(np.vdot(over.channels[k], dirs[g.cluster_of(k)])) ** 2
            assert rep.per_user_rate[k] == pytest.approx(math.log2(1 + snr), rel=1e-12)
        res, t3 = _timed_search(dl_exhaustive_search, over,
                                SearchSpace(direction_family="cluster_zf", power_grid=8))
        assert res.feasible
        notes.append(f"searches {t1:.2f}/{t2:.2f}/{t3:.2f} s; sum-rate tie on parallel "
                     f"channels {tie_n.best_value:.6f}")


# -- 7 --------------------------------------------------------------------------

def test_criterion_7_scheme_dominance():
    with criterion(7, "best NGMA >= SDMA/BB-NOMA/CB-NOMA (DL); NGMA = NOMA >= SDMA (UL)") as notes:
        dl_fams = ("mrc_like", "matched_to_channels")
        margins = []
        for seed in range(100):
            rng = np.random.default_rng(90_000 + seed)
            objective = ("sum_rate", "min_rate")[seed % 2]
            s = random_scenario(90_000 + seed, int(rng.integers(2, 4)), 4)
            space = dict(direction_family=dl_fams, power_grid=3, objective=objective)
            best = dl_exhaustive_search(s, SearchSpace(**space)).best_value
            for scheme in ("sdma", "bb_noma", "cb_noma"):
                other = dl_exhaustive_search(s, SearchSpace(scheme=scheme, **space)).best_value
                assert best >= other - 1e-12, f"seed {seed}: NGMA below {scheme}"
                margins.append(best - other)

            u = random_scenario(95_000 + seed, int(rng.integers(1, 4)), 3, common_noise=True)
            uspace = dict(direction_family=("mrc", "mmse"), power_grid=3, objective=objective)
            ngma = ul_exhaustive_search(u, SearchSpace(**uspace)).best_value
            noma = ul_exhaustive_search(u, SearchSpace(scheme="noma", **uspace)).best_value
            sdma = ul_exhaustive_search(u, SearchSpace(scheme="sdma", **uspace)).best_value
            assert abs(ngma - noma) <= 1e-12 * max(1.0, abs(noma)), f"seed {seed}: NGMA != NOMA"
            assert noma >= sdma - 1e-12
        strict = sum(m > 1e-9 for m in margins)
        notes.append(f"NGMA strictly better in {strict}/{len(margins)} downlink comparisons")


# -- 8 --------------------------------------------------------------------------

def test_criterion_8_runtime_and_goldens(tmp_path):
    with criterion(8, "property suites under 5 min; CLI outputs byte-stable") as notes:
        start = time.perf_counter()
        # the property and unit suites: everything except this module
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(TESTS),
             "--ignore", str(TESTS / "test_acceptance.py")],
            capture_output=True, text=True, cwd=TESTS.parent)
        elapsed = time.perf_counter() - start
        assert proc.returncode == 0, proc.stdout[-500:]
        assert elapsed < 300, f"suite took {elapsed:.1f} s"

        data = TESTS / "data"
        runs = [
            ["region", "--bc", "--snr1-db", "10", "--snr2-db", "0", "--power", "1"],
            ["region", "--mac"],
            ["rate-ul", "--scenario", str(data / "ul_scalar.json")],
            ["rate-dl", "--scenario", str(data / "dl_scalar.json")],
            ["compare", "--scenario", str(data / "dl_random.json")],
            ["search-dl", "--scenario", str(data / "dl_random.json"), "--seed", "5"],
            ["search-ul", "--scenario", str(data / "ul_scalar.json")],
        ]
        for i, args in enumerate(runs):
            outs = []
            for rep in range(2):
                path = tmp_path / f"{i}-{rep}"
                assert cli_main(args + ["--out", str(path)]) == 0
                outs.append(path.read_bytes())
            assert outs[0] == outs[1], f"{args[0]} output differs between runs"
        notes.append(f"full suite {elapsed:.1f} s, {len(runs)} CLI outputs stable")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
