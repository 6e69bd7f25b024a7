"""Trace analysis: pending-entry reconstruction, Interest-loop detection,
and hop-count ordering checks.

The loop detector answers one question from the trace alone: did Interests
for a name get forwarded and absorbed (entry creation or aggregation) around
a cycle of routers whose pending entries were all simultaneously alive,
without any router on the cycle flagging the closing Interest?  Such a cycle
is an undetected Interest loop: every member keeps waiting on the next until
its entry times out.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Optional

from . import trace as tr
from .simulator import ROLE_CONSUMER, ROLE_ROUTER, RunConfig


@dataclass
class EntryGen:
    """One generation of a pending entry at one router."""

    node: str
    name: str
    create: int
    hop_out: Optional[int] = None
    out_faces: set[str] = field(default_factory=set)
    close: Optional[int] = None
    close_reason: Optional[str] = None
    # (face, time, kind) for kind in {"new", "agg"}
    in_events: list[tuple[str, int, str]] = field(default_factory=list)
    # (face, time, kind) for kind in {"dup", "reject"}
    detections: list[tuple[str, int, str]] = field(default_factory=list)

    def alive_at(self, t: int) -> bool:
        return self.create <= t and (self.close is None or self.close > t)


def reconstruct_entries(trace: tr.TraceLog) -> dict[tuple[str, str], list[EntryGen]]:
    """Pending-entry generations per (router, name), in creation order."""
    gens: dict[tuple[str, str], list[EntryGen]] = {}
    open_gen: dict[tuple[str, str], EntryGen] = {}
    for rec in trace:
        key = (rec.node, rec.name)
        fm = rec.field_map()
        if rec.kind == tr.PIT_NEW:
            gen = EntryGen(node=rec.node, name=rec.name, create=rec.time)
            in_face = fm.get("in")
            if in_face and in_face != "-":
                gen.in_events.append((in_face, rec.time, "new"))
            if "hop_out" in fm:
                gen.hop_out = int(fm["hop_out"])
            if "out" in fm:
                gen.out_faces.add(fm["out"])
            gens.setdefault(key, []).append(gen)
            open_gen[key] = gen
        elif rec.kind == tr.PIT_AGG:
            gen = open_gen.get(key)
            if gen is not None:
                gen.in_events.append((fm["in"], rec.time, "agg"))
        elif rec.kind == tr.PIT_OUT:
            gen = open_gen.get(key)
            if gen is not None:
                gen.out_faces.add(fm["out"])
        elif rec.kind == tr.PIT_DEL:
            gen = open_gen.pop(key, None)
            if gen is not None:
                gen.close = rec.time
                gen.close_reason = fm.get("reason")
        elif rec.kind in (tr.DUP, tr.REJECT):
            gen = open_gen.get(key)
            if gen is not None:
                kind = "dup" if rec.kind == tr.DUP else "reject"
                gen.detections.append((fm["from"], rec.time, kind))
    return gens


@dataclass
class LoopFinding:
    name: str
    routers: list[str]
    instant: int  # a time at which every entry on the cycle was pending


def _send_times(trace: tr.TraceLog) -> dict[tuple[str, str, str], list[int]]:
    """Times of Interest sends keyed by (sender, name, face)."""
    sends: dict[tuple[str, str, str], list[int]] = {}
    for rec in trace:
        if rec.kind != tr.SEND:
            continue
        fm = rec.field_map()
        if fm.get("msg") != "I":
            continue
        sends.setdefault((rec.node, rec.name, fm["face"]), []).append(rec.time)
    return sends


def find_undetected_loops(trace: tr.TraceLog, config: RunConfig) -> list[LoopFinding]:
    roles = config.topology.nodes
    gens = reconstruct_entries(trace)
    sends = _send_times(trace)

    by_name: dict[str, list[EntryGen]] = {}
    for (_, name), items in gens.items():
        by_name.setdefault(name, []).extend(items)

    findings: list[LoopFinding] = []
    for name, entries in by_name.items():
        index = {id(gen): i for i, gen in enumerate(entries)}
        per_node: dict[str, list[EntryGen]] = {}
        for gen in entries:
            per_node.setdefault(gen.node, []).append(gen)

        # Absorption edge u -> v: router u forwarded this name to v and v
        # folded that Interest into a pending entry (created it or aggregated).
        adjacency: dict[int, set[int]] = {i: set() for i in range(len(entries))}
        for gen in entries:
            for face, t_abs, _kind in gen.in_events:
                if roles.get(face) != ROLE_ROUTER:
                    continue
                times = sends.get((face, name, gen.node))
                if not times:
                    continue
                pos = bisect.bisect_right(times, t_abs) - 1
                if pos < 0:
                    continue
                t_send = times[pos]
                for upstream in per_node.get(face, []):
                    if upstream.alive_at(t_send) and gen.node in upstream.out_faces:
                        adjacency[index[id(upstream)]].add(index[id(gen)])

        findings.extend(_cycles_with_overlap(name, entries, adjacency))
    return findings


def _cycles_with_overlap(
    name: str, entries: list[EntryGen], adjacency: dict[int, set[int]]
) -> list[LoopFinding]:
    findings = []
    n = len(entries)
    for start in range(n):
        stack = [(start, [start])]
        while stack:
            node, path = stack.pop()
            for nxt in sorted(adjacency[node]):
                if nxt == start and len(path) > 1:
                    cycle = [entries[i] for i in path]
                    begin = max(g.create for g in cycle)
                    end = min(
                        g.close if g.close is not None else float("inf") for g in cycle
                    )
                    if begin < end:
                        findings.append(
                            LoopFinding(
                                name=name,
                                routers=[g.node for g in cycle],
                                instant=begin,
                            )
                        )
                elif nxt > start and nxt not in path:
                    stack.append((nxt, path + [nxt]))
    return findings


def check_hop_monotonicity(trace: tr.TraceLog) -> list[str]:
    """Violations of strict hop-count decrease along forwarded chains."""
    violations = []
    hop_out_open: dict[tuple[str, str], int] = {}
    for rec in trace:
        fm = rec.field_map()
        key = (rec.node, rec.name)
        if rec.kind == tr.PIT_NEW and "hop_in" in fm:
            hop_in, hop_out = int(fm["hop_in"]), int(fm["hop_out"])
            hop_out_open[key] = hop_out
            if not hop_in > hop_out:
                violations.append(
                    f"{rec.time} {rec.node} {rec.name}: forwarded with "
                    f"hop {hop_out} on an Interest carrying {hop_in}"
                )
        elif rec.kind == tr.PIT_AGG and "hop_in" in fm:
            hop_out = hop_out_open.get(key)
            hop_in = int(fm["hop_in"])
            if hop_out is not None and not hop_in > hop_out:
                violations.append(
                    f"{rec.time} {rec.node} {rec.name}: aggregated an Interest "
                    f"carrying {hop_in} onto an entry forwarded at {hop_out}"
                )
        elif rec.kind == tr.PIT_DEL:
            hop_out_open.pop(key, None)
    return violations


def consumer_outcomes(
    trace: tr.TraceLog, config: RunConfig
) -> dict[tuple[str, str], dict]:
    """Per (consumer, name): emission times and every response received."""
    consumers = {
        n for n, r in config.topology.nodes.items() if r == ROLE_CONSUMER
    }
    outcomes: dict[tuple[str, str], dict] = {}
    for rec in trace:
        if rec.kind == tr.GEN and rec.node in consumers:
            entry = outcomes.setdefault(
                (rec.node, rec.name), {"emissions": [], "responses": []}
            )
            entry["emissions"].append(rec.time)
        elif rec.kind == tr.RECV and rec.node in consumers:
            fm = rec.field_map()
            if fm.get("msg") in ("D", "N"):
                entry = outcomes.get((rec.node, rec.name))
                if entry is not None:
                    entry["responses"].append((rec.time, fm["msg"], fm.get("code")))
    return outcomes
