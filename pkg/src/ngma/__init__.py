"""Rate-level simulation of multi-antenna NOMA/SDMA multiple access."""

from .core import (ChannelSpec, Scenario, generate_scenario, inner_product,
                   unit)
from .downlink import (BeamformerSet, Grouping, IntraClusterOrder, RateReport,
                       cluster_beamformers, cluster_matched_directions,
                       cluster_zf_directions, dl_bb_noma_rates, dl_cb_noma_rates,
                       dl_cross_decoding_rate, dl_sdma_rates, dl_sic_check,
                       dl_user_rate, mrt_directions, zf_directions)
from .errors import (DimensionError, Infeasible, InvalidClusterSize,
                     InvalidSpec, InvalidUser, NGMAError, NotCoClustered,
                     Overloaded, RankDeficient, SearchTooLarge, ZeroChannel)
from .regions import (RegionBoundary, RegionSpec, bc_noma_boundary,
                      bc_oma_boundary, mac_noma_boundary, mac_oma_boundary)
from .search import (SearchResult, SearchSpace, dl_exhaustive_search,
                     enumerate_ordered_partitions, ul_exhaustive_search)
from .uplink import (DetectorSet, LayerPartition, PermutationOrder,
                     mac_sum_capacity, mmse_detectors, mrc_detectors,
                     ul_ngma_rate, ul_ngma_rates, ul_noma_rates, ul_sdma_rates,
                     zf_detectors)

__version__ = "0.1.0"
