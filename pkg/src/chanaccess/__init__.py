"""Distributed channel access for cognitive radio networks.

Combinatorial bandit learning over an extended conflict graph, with a
message-passing approximation of the per-round maximum weighted independent
set decision.
"""

from .channels import ChannelModel, ChannelStreams
from .graph_model import (ConflictGraph, ExtendedGraph, build_extended_graph, channel_assignment,
                          generate_random_network, independence_check, r_hop_neighborhood)
from .learning import PolicyState, compute_index, llr_index, select_strategy, update
from .metrics import RegretSeries, TimingModel, oracle_optimum, periodic_throughput
from .mwis import MwisResult, OracleSizeError, exact_mwis, local_mwis, robust_ptas
from .protocol import DistributedAccess, ProtocolConfig, decide_strategy

__all__ = [
    "ChannelModel", "ChannelStreams", "ConflictGraph", "ExtendedGraph", "build_extended_graph",
    "channel_assignment", "generate_random_network", "independence_check", "r_hop_neighborhood",
    "PolicyState", "compute_index", "llr_index", "select_strategy", "update", "RegretSeries",
    "TimingModel", "oracle_optimum", "periodic_throughput", "MwisResult", "OracleSizeError",
    "exact_mwis", "local_mwis", "robust_ptas", "DistributedAccess", "ProtocolConfig",
    "decide_strategy",
]
__version__ = "0.1.0"
