"""Achievable rate regions of discrete memoryless multiple-access wiretap channels."""

from .channel import (ChannelError, ChannelSpec, JointDistribution, channel_from_marginals,
                      degenerate_eve, eve_sees_bob, joint_distribution, make_channel,
                      parse_channel, render_channel)
from .infomeasures import MIEngine, VariableSet, cond_mutual_info, entropy, region_rhs
from .polytope import (LinearInequality, Polytope, Vertex, contains, fm_eliminate,
                       fm_eliminate_all, normalize, polytope_equal, remove_redundant,
                       union_contains, union_included, vertices)
from .regions import (RateTuple, RegionDescriptor, build_garbage_polytope, build_legacy_region,
                      build_region, build_secrecy_region, compare_secrecy_regions,
                      bound_family_comparison, elimination_counts, find_garbage_rates, max_open_at_max_secrecy,
                      max_sum_secrecy, reduce_partition, region_union, verify_fm_projection)
from .simplex import LPProblem, LPSolution, feasible_point, solve

__all__ = [
    "ChannelError", "ChannelSpec", "JointDistribution", "channel_from_marginals", "degenerate_eve",
    "eve_sees_bob", "joint_distribution", "make_channel", "parse_channel", "render_channel",
    "MIEngine", "VariableSet", "cond_mutual_info", "entropy", "region_rhs",
    "LinearInequality", "Polytope", "Vertex", "contains", "fm_eliminate", "fm_eliminate_all",
    "normalize", "polytope_equal", "remove_redundant", "union_contains", "union_included",
    "vertices", "RateTuple", "RegionDescriptor", "build_garbage_polytope", "build_legacy_region",
    "build_region", "build_secrecy_region", "compare_secrecy_regions", "bound_family_comparison", "elimination_counts",
    "find_garbage_rates", "max_open_at_max_secrecy", "max_sum_secrecy", "reduce_partition",
    "region_union", "verify_fm_projection", "LPProblem", "LPSolution", "feasible_point", "solve",
]
