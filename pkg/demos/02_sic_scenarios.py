"""
When does SIC help on the downlink?
===================================

Orthogonal channels favour spatial separation, parallel channels favour
one NOMA cluster, and an overloaded array (N = 2, K = 4) can mix both by
pairing users with aligned channels.
"""

import numpy as np

from ngma import (Grouping, IntraClusterOrder, Scenario, SearchSpace,
                  cluster_beamformers, cluster_zf_directions,
                  dl_exhaustive_search, dl_sic_check)

# orthogonal channels, ZF beams: two singleton clusters win
ortho = Scenario([[1, 0], [0, 1]], [1, 1], 1.0)
res = dl_exhaustive_search(ortho, SearchSpace(direction_family="zf", power_grid=20))
print("orthogonal:", res.best_config.grouping.to_list(), round(res.best_value, 4))

# parallel channels h1 = 3 h2; for max-min fairness one SIC cluster wins
par = Scenario([[3, 0], [1, 0]], [1, 1], 1.0)
for scheme in ("sdma", "ngma"):
    res = dl_exhaustive_search(par, SearchSpace(direction_family="mrc_like", power_grid=20,
                                                objective="min_rate", scheme=scheme))
    cfg = res.best_config
    print(f"parallel, {scheme}: min rate {res.best_value:.4f}, clusters "
          f"{cfg.grouping.to_list()}, order {cfg.order.to_list()}, powers {cfg.beamformers.powers}")

# a decoding order that breaks SIC: the weak user cannot decode the strong one
rep = dl_sic_check(par, Grouping.single(2), IntraClusterOrder([[0, 1]]),
                   cluster_beamformers(Grouping.single(2), [[1, 0]], [0.8, 0.2]))
print("reversed order feasible?", rep.sic_feasible, "violations", rep.violated_pairs)

# overloaded: pair each strong user with a weak user on the same direction
over = Scenario([[1, 0], [0, 1], [0.5, 0], [0, 0.5]], [1] * 4, 2.0)
g = Grouping([[0, 2], [1, 3]])
dirs = cluster_zf_directions(over, g)
print("cluster-ZF leakage:", np.abs(np.conj(over.channels) @ dirs.T).round(12))
rep = dl_sic_check(over, g, IntraClusterOrder([[2, 0], [3, 1]]),
                   cluster_beamformers(g, dirs, [0.2, 0.2, 0.8, 0.8]))
print("overloaded rates:", np.round(rep.per_user_rate, 4), "feasible", rep.sic_feasible)
