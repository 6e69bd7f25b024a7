"""Post-run measurement: PIT pending time, PIT size, RTT, NACK accounting,
and table-storage estimators.

Everything is a pure fold over the trace; the config supplies node roles and
timing parameters.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Optional

from . import trace as tr
from .model import MS, Name, SimTime
from .simulator import ROLE_CONSUMER, ROLE_ROUTER, RunConfig

PIT_SAMPLE_INTERVAL = 100 * MS

NACK_CODES = (
    "duplicate",
    "congestion",
    "no_data",
    "loop",
    "no_route",
    "interest_expired",
    "route_failed",
)


@dataclass
class StorageParams:
    int_bytes: int = 32       # per-entry in/out neighbor bookkeeping
    id_bits: int = 32         # nonce width
    mh_bits: int = 8          # hop-count width
    neighbor_count: int = 1   # neighbors that may send valid Interests


@dataclass
class StorageEstimate:
    strategy: str
    params: StorageParams
    avg_pit_entries: float
    pit_bytes: float            # for the strategy under measurement
    pit_bytes_nonce: float      # nonce-based formula at the same PIT size
    pit_bytes_hop: float        # hop-count formula at the same PIT size
    savings_bytes: float        # nonce-based minus hop-count
    fib_overhead_bytes: float   # added hop-count columns across all FIBs


@dataclass
class RttStats:
    count: int = 0
    unanswered: int = 0
    avg_ms: Optional[float] = None
    min_ms: Optional[float] = None
    max_ms: Optional[float] = None
    histogram: dict[int, int] = field(default_factory=dict)  # 10 ms buckets


@dataclass
class MetricsReport:
    partial: bool
    interests_generated: int
    unique_names: int
    ndo_deliveries: int
    nack_deliveries: int
    unanswered_names: int
    avg_pit_pending_ms: Optional[float]
    per_router_pending_ms: dict[str, float]
    avg_pit_size: Optional[float]
    per_router_avg_pit_size: dict[str, float]
    pit_size_series: dict[str, list[tuple[int, int]]]  # node -> [(time_ms, entries)]
    in_flow_routers: list[str]
    rtt: RttStats
    per_consumer_rtt: dict[str, RttStats]
    nack_emitted: dict[str, int]
    nack_delivered: dict[str, int]
    aggregations: int
    duplicates: int
    rejects: int
    cs_hits: int
    expired_entries: int
    live_pit_entries: int
    storage: StorageEstimate


def pit_storage_bytes(avg_entries: float, strategy: str, params: StorageParams) -> float:
    """Estimated PIT bytes for one router at the given average occupancy."""
    if strategy == "sifah":
        per_entry = params.int_bytes + params.mh_bits / 8
    else:
        per_entry = params.int_bytes + (params.id_bits / 8) * params.neighbor_count
    return per_entry * avg_entries


def storage_estimate(
    avg_pit_entries: float,
    strategy: str,
    params: StorageParams,
    fib_entry_faces: int = 0,
) -> StorageEstimate:
    """Evaluate both PIT formulas at one observed PIT size.

    ``fib_entry_faces`` is the total number of (entry, next hop) pairs across
    the FIBs, each of which gains one hop-count column under hop-count
    forwarding.
    """
    nonce_bytes = pit_storage_bytes(avg_pit_entries, "ndn", params)
    hop_bytes = pit_storage_bytes(avg_pit_entries, "sifah", params)
    return StorageEstimate(
        strategy=strategy,
        params=params,
        avg_pit_entries=avg_pit_entries,
        pit_bytes=hop_bytes if strategy == "sifah" else nonce_bytes,
        pit_bytes_nonce=nonce_bytes,
        pit_bytes_hop=hop_bytes,
        savings_bytes=nonce_bytes - hop_bytes,
        fib_overhead_bytes=(params.mh_bits / 8) * fib_entry_faces,
    )


def _rtt_stats(samples: list[float], unanswered: int) -> RttStats:
    stats = RttStats(count=len(samples), unanswered=unanswered)
    if samples:
        stats.avg_ms = sum(samples) / len(samples)
        stats.min_ms = min(samples)
        stats.max_ms = max(samples)
        for value in samples:
            bucket = int(value // 10) * 10
            stats.histogram[bucket] = stats.histogram.get(bucket, 0) + 1
    return stats


def compute_metrics(trace: tr.TraceLog, config: RunConfig) -> MetricsReport:
    roles = config.topology.nodes
    consumers = {n for n, r in roles.items() if r == ROLE_CONSUMER}

    open_entries: dict[tuple[str, str], SimTime] = {}
    closed: dict[str, list[tuple[SimTime, SimTime]]] = {}
    interest_routers: set[str] = set()
    first_emit: dict[tuple[str, str], SimTime] = {}
    first_response: dict[tuple[str, str], tuple[SimTime, str, Optional[str]]] = {}
    nack_emitted = {code: 0 for code in NACK_CODES}
    nack_delivered = {code: 0 for code in NACK_CODES}
    gens = 0
    aggregations = 0
    duplicates = 0
    rejects = 0
    cs_hits = 0
    expired = 0
    partial = False

    for rec in trace:
        kind = rec.kind
        if kind == tr.GEN:
            gens += 1
            key = (rec.node, rec.name)
            if key not in first_emit:
                first_emit[key] = rec.time
        elif kind == tr.RECV:
            fm = rec.field_map()
            if roles.get(rec.node) == ROLE_ROUTER and fm.get("msg") == "I":
                interest_routers.add(rec.node)
            elif rec.node in consumers and fm.get("msg") in ("D", "N"):
                key = (rec.node, rec.name)
                if key in first_emit and key not in first_response:
                    first_response[key] = (rec.time, fm["msg"], fm.get("code"))
                if fm.get("msg") == "N" and fm.get("code") in nack_delivered:
                    nack_delivered[fm["code"]] += 1
        elif kind == tr.SEND:
            fm = rec.field_map()
            if fm.get("msg") == "N" and fm.get("code") in nack_emitted:
                nack_emitted[fm["code"]] += 1
        elif kind == tr.PIT_NEW:
            key = (rec.node, rec.name)
            if key in open_entries:
                partial = True  # creation without a recorded deletion
            open_entries[key] = rec.time
        elif kind == tr.PIT_AGG:
            aggregations += 1
            if (rec.node, rec.name) not in open_entries:
                partial = True
        elif kind == tr.PIT_DEL:
            key = (rec.node, rec.name)
            start = open_entries.pop(key, None)
            if start is None:
                partial = True
                continue
            closed.setdefault(rec.node, []).append((start, rec.time))
            if rec.field_map().get("reason") == "expired":
                expired += 1
        elif kind == tr.DUP:
            duplicates += 1
        elif kind == tr.REJECT:
            rejects += 1
        elif kind == tr.CS_HIT:
            cs_hits += 1

    # An entry created this early must have been deleted (expiry is certain);
    # still seeing it open means the trace was cut short.
    for key, start in open_entries.items():
        if start + config.mil < config.duration:
            partial = True

    pending_by_router: dict[str, float] = {}
    all_pending: list[float] = []
    for node, intervals in closed.items():
        durations = [(end - start) / MS for start, end in intervals]
        pending_by_router[node] = sum(durations) / len(durations)
        all_pending.extend(durations)
    avg_pending = sum(all_pending) / len(all_pending) if all_pending else None

    sample_times = list(range(0, config.duration + 1, PIT_SAMPLE_INTERVAL))
    series: dict[str, list[tuple[int, int]]] = {}
    per_router_avg_size: dict[str, float] = {}
    in_flow = sorted(interest_routers)
    for node in in_flow:
        opens = sorted(start for start, _ in closed.get(node, []))
        closes = sorted(end for _, end in closed.get(node, []))
        for (other, name), start in open_entries.items():
            if other == node:
                opens.append(start)
        opens.sort()
        points = []
        for t in sample_times:
            alive = bisect.bisect_right(opens, t) - bisect.bisect_right(closes, t)
            points.append((t // MS, alive))
        series[node] = points
        per_router_avg_size[node] = sum(c for _, c in points) / len(points)
    avg_size = (
        sum(per_router_avg_size.values()) / len(per_router_avg_size)
        if per_router_avg_size
        else None
    )

    per_consumer_rtt: dict[str, RttStats] = {}
    all_samples: list[float] = []
    total_unanswered = 0
    ndo_deliveries = 0
    nack_count = 0
    for consumer in sorted(consumers):
        samples = []
        unanswered = 0
        for (node, name), emit in first_emit.items():
            if node != consumer:
                continue
            response = first_response.get((node, name))
            if response is None:
                unanswered += 1
                continue
            samples.append((response[0] - emit) / MS)
            if response[1] == "D":
                ndo_deliveries += 1
            else:
                nack_count += 1
        per_consumer_rtt[consumer] = _rtt_stats(samples, unanswered)
        all_samples.extend(samples)
        total_unanswered += unanswered

    degrees = [
        len(config.topology.neighbors(n))
        for n, r in roles.items()
        if r == ROLE_ROUTER
    ]
    params = StorageParams(neighbor_count=max(degrees) if degrees else 1)
    fib_faces = len(config.fib_rules)
    storage = storage_estimate(avg_size or 0.0, config.strategy, params, fib_faces)

    return MetricsReport(
        partial=partial,
        interests_generated=gens,
        unique_names=len(first_emit),
        ndo_deliveries=ndo_deliveries,
        nack_deliveries=nack_count,
        unanswered_names=total_unanswered,
        avg_pit_pending_ms=avg_pending,
        per_router_pending_ms=pending_by_router,
        avg_pit_size=avg_size,
        per_router_avg_pit_size=per_router_avg_size,
        pit_size_series=series,
        in_flow_routers=in_flow,
        rtt=_rtt_stats(all_samples, total_unanswered),
        per_consumer_rtt=per_consumer_rtt,
        nack_emitted=nack_emitted,
        nack_delivered=nack_delivered,
        aggregations=aggregations,
        duplicates=duplicates,
        rejects=rejects,
        cs_hits=cs_hits,
        expired_entries=expired,
        live_pit_entries=len(open_entries),
        storage=storage,
    )


SUMMARY_COLUMNS = [
    "scenario",
    "strategy",
    "loop_fraction",
    "seed",
    "duration_ms",
    "mil_ms",
    "interests_generated",
    "unique_names",
    "ndo_deliveries",
    "nack_deliveries",
    "unanswered_names",
    "avg_pit_pending_ms",
    "avg_pit_size",
    "avg_rtt_ms",
    "min_rtt_ms",
    "max_rtt_ms",
    "aggregations",
    "duplicates",
    "rejects",
    "cs_hits",
    "expired_entries",
    "live_pit_entries",
    "nack_duplicate",
    "nack_congestion",
    "nack_no_data",
    "nack_loop",
    "nack_no_route",
    "nack_interest_expired",
    "nack_route_failed",
    "pit_storage_bytes",
    "pit_storage_nonce_bytes",
    "pit_storage_hop_bytes",
    "pit_storage_savings_bytes",
    "fib_overhead_bytes",
    "partial",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def summary_row(report: MetricsReport, config: RunConfig) -> dict[str, str]:
    row = {
        "scenario": config.name,
        "strategy": config.strategy,
        "loop_fraction": _fmt(config.loop_fraction),
        "seed": str(config.seed),
        "duration_ms": _fmt(config.duration / MS),
        "mil_ms": _fmt(config.mil / MS),
        "interests_generated": str(report.interests_generated),
        "unique_names": str(report.unique_names),
        "ndo_deliveries": str(report.ndo_deliveries),
        "nack_deliveries": str(report.nack_deliveries),
        "unanswered_names": str(report.unanswered_names),
        "avg_pit_pending_ms": _fmt(report.avg_pit_pending_ms),
        "avg_pit_size": _fmt(report.avg_pit_size),
        "avg_rtt_ms": _fmt(report.rtt.avg_ms),
        "min_rtt_ms": _fmt(report.rtt.min_ms),
        "max_rtt_ms": _fmt(report.rtt.max_ms),
        "aggregations": str(report.aggregations),
        "duplicates": str(report.duplicates),
        "rejects": str(report.rejects),
        "cs_hits": str(report.cs_hits),
        "expired_entries": str(report.expired_entries),
        "live_pit_entries": str(report.live_pit_entries),
        "nack_duplicate": str(report.nack_emitted["duplicate"]),
        "nack_congestion": str(report.nack_emitted["congestion"]),
        "nack_no_data": str(report.nack_emitted["no_data"]),
        "nack_loop": str(report.nack_emitted["loop"]),
        "nack_no_route": str(report.nack_emitted["no_route"]),
        "nack_interest_expired": str(report.nack_emitted["interest_expired"]),
        "nack_route_failed": str(report.nack_emitted["route_failed"]),
        "pit_storage_bytes": _fmt(report.storage.pit_bytes),
        "pit_storage_nonce_bytes": _fmt(report.storage.pit_bytes_nonce),
        "pit_storage_hop_bytes": _fmt(report.storage.pit_bytes_hop),
        "pit_storage_savings_bytes": _fmt(report.storage.savings_bytes),
        "fib_overhead_bytes": _fmt(report.storage.fib_overhead_bytes),
        "partial": _fmt(report.partial),
    }
    return row


TIMESERIES_COLUMNS = ["scenario", "strategy", "loop_fraction", "node", "time_ms", "pit_entries"]


def timeseries_rows(report: MetricsReport, config: RunConfig) -> list[dict[str, str]]:
    rows = []
    for node, points in report.pit_size_series.items():
        for time_ms, entries in points:
            rows.append(
                {
                    "scenario": config.name,
                    "strategy": config.strategy,
                    "loop_fraction": _fmt(config.loop_fraction),
                    "node": node,
                    "time_ms": str(time_ms),
                    "pit_entries": str(entries),
                }
            )
    return rows
