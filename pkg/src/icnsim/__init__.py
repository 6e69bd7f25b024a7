"""Forwarding-plane library and deterministic simulator for Interest-based
content-centric networks: nonce-based (CCN/NDN) and hop-count-gated (SIFAH)
forwarding strategies, with trace analysis and experiment drivers."""

from .model import (
    HOP_INFINITY,
    Interest,
    Nack,
    NackCode,
    Name,
    NdoMessage,
    Prefix,
    longest_prefix_match,
)
from .simulator import (
    ConfigError,
    ConsumerSpec,
    FailureSpec,
    FibRule,
    LinkSpec,
    ProducerSpec,
    RunConfig,
    RunResult,
    Topology,
    run,
    validate_config,
)
from .metrics import MetricsReport, StorageParams, compute_metrics, storage_estimate
from .scenario import Scenario, ScenarioError, bundled_scenario, load_scenario
from .analysis import check_hop_monotonicity, consumer_outcomes, find_undetected_loops
from .trace import TraceLog, TraceRecord

__all__ = [
    "HOP_INFINITY",
    "Interest",
    "Nack",
    "NackCode",
    "Name",
    "NdoMessage",
    "Prefix",
    "longest_prefix_match",
    "ConfigError",
    "ConsumerSpec",
    "FailureSpec",
    "FibRule",
    "LinkSpec",
    "ProducerSpec",
    "RunConfig",
    "RunResult",
    "Topology",
    "run",
    "validate_config",
    "MetricsReport",
    "StorageParams",
    "compute_metrics",
    "storage_estimate",
    "Scenario",
    "ScenarioError",
    "bundled_scenario",
    "load_scenario",
    "check_hop_monotonicity",
    "consumer_outcomes",
    "find_undetected_loops",
    "TraceLog",
    "TraceRecord",
]
