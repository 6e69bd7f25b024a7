"""Deterministic discrete-event engine.

Events dispatch in (time, sequence) order; the sequence number is assigned at
scheduling time, so two runs of the same config produce byte-identical
traces.  Links are pure propagation delay; loss happens only through each
link's seeded generator or a failed adjacency, never silently.
"""

from __future__ import annotations

import hashlib
import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import Optional

from . import trace as tr
from .actions import (
    Action,
    AdmissionReject,
    ArmPitTimer,
    CsHit,
    CsStore,
    DuplicateDetected,
    PitAggregate,
    PitDelete,
    PitForward,
    PitNew,
    Send,
)
from .model import (
    HOP_INFINITY,
    Interest,
    Message,
    Nack,
    NackCode,
    Name,
    NdoMessage,
    Prefix,
    SimTime,
)
from .strategy_ndn import NdnStrategy
from .strategy_sifah import VERIFIERS, SifahStrategy
from .tables import ContentStore, FaceId, Fib, FibEntry, FibNextHop, NodeId, RouterState

ROLE_ROUTER = "router"
ROLE_CONSUMER = "consumer"
ROLE_PRODUCER = "producer"
ROLES = (ROLE_ROUTER, ROLE_CONSUMER, ROLE_PRODUCER)

STRATEGIES = ("ccn", "ndn", "sifah")


class ConfigError(Exception):
    """Invalid run configuration; the message names the offending element."""


@dataclass
class LinkSpec:
    a: NodeId
    b: NodeId
    delay: SimTime
    loss_rate: float = 0.0


@dataclass
class Topology:
    nodes: dict[NodeId, str]  # node -> role
    links: list[LinkSpec]

    def role(self, node: NodeId) -> Optional[str]:
        return self.nodes.get(node)

    def neighbors(self, node: NodeId) -> list[NodeId]:
        out = []
        for link in self.links:
            if link.a == node:
                out.append(link.b)
            elif link.b == node:
                out.append(link.a)
        return out


@dataclass
class FibRule:
    node: NodeId
    prefix: Prefix
    face: FaceId
    hop_count: int
    rank: int


@dataclass
class ConsumerSpec:
    node: NodeId
    prefixes: list[tuple[Prefix, float]]  # (prefix, weight); weights sum to 1
    rate: float  # Interests per second
    max_retx: int = 0
    retx_backoff: SimTime = 500_000_000
    phase: SimTime = 0
    stop: Optional[SimTime] = None  # stop generating at this time (default: run end)


@dataclass
class ProducerSpec:
    node: NodeId
    prefixes: list[Prefix]
    payload_size: int = 64


@dataclass
class FailureSpec:
    a: NodeId
    b: NodeId
    time: SimTime


@dataclass
class RunConfig:
    strategy: str
    duration: SimTime
    seed: int
    mil: SimTime
    topology: Topology
    fib_rules: list[FibRule]
    consumers: list[ConsumerSpec]
    producers: list[ProducerSpec]
    failures: list[FailureSpec] = field(default_factory=list)
    cs_capacity: int = 0
    verifier: str = "always_valid"
    ndn_retx_interval: Optional[SimTime] = None
    name: str = "run"
    loop_fraction: Optional[float] = None  # annotation for reports only


# -- Validation -------------------------------------------------------------


def validate_config(config: RunConfig) -> None:
    if config.strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {config.strategy!r}")
    if config.duration <= 0:
        raise ConfigError("duration must be positive")
    if config.mil <= 0:
        raise ConfigError("mil must be positive")
    if config.cs_capacity < 0:
        raise ConfigError("cs_capacity must be >= 0")
    if config.verifier not in VERIFIERS:
        raise ConfigError(f"unknown verifier {config.verifier!r}")

    topo = config.topology
    if not topo.nodes:
        raise ConfigError("topology has no nodes")
    for node, role in topo.nodes.items():
        if role not in ROLES:
            raise ConfigError(f"node {node}: unknown role {role!r}")

    seen_links: set[frozenset[str]] = set()
    for link in topo.links:
        for end in (link.a, link.b):
            if end not in topo.nodes:
                raise ConfigError(f"link {link.a}-{link.b}: unknown node {end}")
        if link.a == link.b:
            raise ConfigError(f"link {link.a}-{link.b}: self loop")
        key = frozenset((link.a, link.b))
        if key in seen_links:
            raise ConfigError(f"link {link.a}-{link.b}: duplicate")
        seen_links.add(key)
        if link.delay <= 0:
            raise ConfigError(f"link {link.a}-{link.b}: delay must be positive")
        if not 0.0 <= link.loss_rate <= 1.0:
            raise ConfigError(f"link {link.a}-{link.b}: loss_rate outside [0, 1]")

    seen_rank: set[tuple[str, tuple[bytes, ...], int]] = set()
    seen_face: set[tuple[str, tuple[bytes, ...], str]] = set()
    for rule in config.fib_rules:
        if topo.role(rule.node) != ROLE_ROUTER:
            raise ConfigError(f"fib {rule.node} {rule.prefix}: node is not a router")
        if frozenset((rule.node, rule.face)) not in seen_links:
            raise ConfigError(
                f"fib {rule.node} {rule.prefix}: no link to next hop {rule.face}"
            )
        if not 0 <= rule.hop_count <= 254:
            raise ConfigError(f"fib {rule.node} {rule.prefix}: hop_count outside [0, 254]")
        if rule.rank < 1:
            raise ConfigError(f"fib {rule.node} {rule.prefix}: rank starts at 1")
        rank_key = (rule.node, rule.prefix.components, rule.rank)
        if rank_key in seen_rank:
            raise ConfigError(f"fib {rule.node} {rule.prefix}: duplicate rank {rule.rank}")
        seen_rank.add(rank_key)
        face_key = (rule.node, rule.prefix.components, rule.face)
        if face_key in seen_face:
            raise ConfigError(f"fib {rule.node} {rule.prefix}: duplicate next hop {rule.face}")
        seen_face.add(face_key)

    for spec in config.consumers:
        if topo.role(spec.node) != ROLE_CONSUMER:
            raise ConfigError(f"consumer {spec.node}: node missing or not a consumer")
        if len(topo.neighbors(spec.node)) != 1:
            raise ConfigError(f"consumer {spec.node}: needs exactly one link")
        if spec.rate <= 0:
            raise ConfigError(f"consumer {spec.node}: rate must be positive")
        if not spec.prefixes:
            raise ConfigError(f"consumer {spec.node}: no prefixes")
        total = 0.0
        for prefix, weight in spec.prefixes:
            if weight < 0:
                raise ConfigError(f"consumer {spec.node}: negative weight for {prefix}")
            total += weight
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"consumer {spec.node}: weights sum to {total}, not 1")
        if spec.max_retx < 0:
            raise ConfigError(f"consumer {spec.node}: max_retx must be >= 0")
        if spec.max_retx > 0 and spec.retx_backoff <= 0:
            raise ConfigError(f"consumer {spec.node}: retx_backoff must be positive")
        if spec.phase < 0:
            raise ConfigError(f"consumer {spec.node}: phase must be >= 0")

    for spec in config.producers:
        if topo.role(spec.node) != ROLE_PRODUCER:
            raise ConfigError(f"producer {spec.node}: node missing or not a producer")
        if not topo.neighbors(spec.node):
            raise ConfigError(f"producer {spec.node}: needs at least one link")
        if not spec.prefixes:
            raise ConfigError(f"producer {spec.node}: no prefixes")
        if spec.payload_size < 0:
            raise ConfigError(f"producer {spec.node}: payload_size must be >= 0")

    for failure in config.failures:
        if frozenset((failure.a, failure.b)) not in seen_links:
            raise ConfigError(f"failure {failure.a}-{failure.b}: no such link")
        if failure.time < 0:
            raise ConfigError(f"failure {failure.a}-{failure.b}: time must be >= 0")


# -- Events -----------------------------------------------------------------


@dataclass(frozen=True)
class _Arrival:
    node: NodeId
    from_face: FaceId
    message: Message


@dataclass(frozen=True)
class _PitExpiry:
    node: NodeId
    name: Name


@dataclass(frozen=True)
class _ConsumerTick:
    node: NodeId
    index: int


@dataclass(frozen=True)
class _ConsumerRetx:
    node: NodeId
    name: Name


@dataclass(frozen=True)
class _LinkFailure:
    a: NodeId
    b: NodeId


@dataclass
class _LinkState:
    delay: SimTime
    loss_rate: float
    alive: bool = True
    rng: Optional[random.Random] = None


@dataclass
class _NameRecord:
    first_emit: SimTime
    emissions: int = 1
    retx_used: int = 0
    responses: list[tuple[SimTime, str, Optional[str]]] = field(default_factory=list)


@dataclass
class _ConsumerState:
    spec: ConsumerSpec
    face: FaceId
    nonce_rng: random.Random
    records: dict[Name, _NameRecord] = field(default_factory=dict)


@dataclass
class RunResult:
    config: RunConfig
    trace: tr.TraceLog
    metrics: "object"
    consumer_records: dict[NodeId, dict[Name, _NameRecord]]


def _payload_for(name: Name, size: int) -> bytes:
    base = b"data:" + str(name).encode("ascii")
    if len(base) >= size:
        return base[:size]
    return base + b"." * (size - len(base))


def _tick_uniform(seed: int, index: int) -> float:
    # Keyed by tick index alone so co-scheduled consumers draw the same
    # value and request the same prefix in the same tick.
    return random.Random(f"{seed}/tick/{index}").random()


class Simulation:
    def __init__(self, config: RunConfig):
        validate_config(config)
        self.config = config
        self.now: SimTime = 0
        self._heap: list = []
        self._seq = itertools.count()
        self.trace = tr.TraceLog()

        mil = config.mil
        if config.strategy == "sifah":
            self.strategy = SifahStrategy(mil, VERIFIERS[config.verifier])
        else:
            self.strategy = NdnStrategy(
                nacks_enabled=(config.strategy == "ndn"),
                mil=mil,
                retx_interval=config.ndn_retx_interval,
            )

        self.links: dict[frozenset, _LinkState] = {}
        for link in config.topology.links:
            key = frozenset((link.a, link.b))
            a, b = sorted((link.a, link.b))
            self.links[key] = _LinkState(
                delay=link.delay,
                loss_rate=link.loss_rate,
                rng=random.Random(f"{config.seed}/loss/{a}/{b}"),
            )

        self.routers: dict[NodeId, RouterState] = {}
        for node, role in config.topology.nodes.items():
            if role == ROLE_ROUTER:
                self.routers[node] = RouterState(
                    node=node, cs=ContentStore(config.cs_capacity)
                )
        by_entry: dict[tuple[NodeId, tuple[bytes, ...]], list[FibRule]] = {}
        for rule in config.fib_rules:
            by_entry.setdefault((rule.node, rule.prefix.components), []).append(rule)
        for (node, _), rules in by_entry.items():
            hops = [FibNextHop(r.face, r.hop_count, r.rank) for r in rules]
            self.routers[node].fib.add(FibEntry(rules[0].prefix, hops))

        self.consumers: dict[NodeId, _ConsumerState] = {}
        for spec in config.consumers:
            face = config.topology.neighbors(spec.node)[0]
            self.consumers[spec.node] = _ConsumerState(
                spec=spec,
                face=face,
                nonce_rng=random.Random(f"{config.seed}/nonce/{spec.node}"),
            )
        self.producers: dict[NodeId, ProducerSpec] = {
            spec.node: spec for spec in config.producers
        }

    # -- Scheduling ---------------------------------------------------------

    def _schedule(self, time: SimTime, event) -> None:
        heapq.heappush(self._heap, (time, next(self._seq), event))

    def _log(self, node: str, kind: str, name: str, fields: list[tuple[str, str]]) -> None:
        self.trace.append(tr.TraceRecord(self.now, node, kind, name, tuple(fields)))

    # -- Main loop -----------------------------------------------------------

    def run(self) -> RunResult:
        for state in self.consumers.values():
            self._schedule(state.spec.phase, _ConsumerTick(state.spec.node, 0))
        for failure in self.config.failures:
            self._schedule(failure.time, _LinkFailure(failure.a, failure.b))

        while self._heap:
            if self._heap[0][0] > self.config.duration:
                break
            time, _, event = heapq.heappop(self._heap)
            self.now = time
            self._dispatch(event)

        from .metrics import compute_metrics

        metrics = compute_metrics(self.trace, self.config)
        return RunResult(
            config=self.config,
            trace=self.trace,
            metrics=metrics,
            consumer_records={n: s.records for n, s in self.consumers.items()},
        )

    def _dispatch(self, event) -> None:
        if isinstance(event, _Arrival):
            self._on_arrival(event)
        elif isinstance(event, _ConsumerTick):
            self._on_tick(event)
        elif isinstance(event, _PitExpiry):
            self._on_pit_expiry(event)
        elif isinstance(event, _ConsumerRetx):
            self._on_consumer_retx(event)
        elif isinstance(event, _LinkFailure):
            self._on_link_failure(event)
        else:  # pragma: no cover
            raise AssertionError(f"unknown event {event!r}")

    # -- Transmission --------------------------------------------------------

    def _send(self, node: NodeId, face: FaceId, message: Message) -> None:
        name = str(message.name)
        tokens = [("face", face)] + tr.encode_message(message)
        self._log(node, tr.SEND, name, tokens)
        link = self.links.get(frozenset((node, face)))
        if link is None or not link.alive:
            self._log(node, tr.DROP, name, tokens + [("reason", "link_down")])
            return
        if link.loss_rate > 0 and link.rng.random() < link.loss_rate:
            self._log(node, tr.DROP, name, tokens + [("reason", "loss")])
            return
        self._schedule(self.now + link.delay, _Arrival(face, node, message))

    def _apply_actions(self, node: NodeId, actions: list[Action]) -> None:
        for action in actions:
            if isinstance(action, Send):
                self._send(node, action.face, action.message)
            elif isinstance(action, ArmPitTimer):
                self._schedule(action.deadline, _PitExpiry(node, action.name))
            elif isinstance(action, PitNew):
                fields = [("in", action.in_face or "-")]
                if action.nonce is not None:
                    fields.append(("nonce", f"{action.nonce:08x}"))
                if action.hop_in is not None:
                    fields.append(("hop_in", str(action.hop_in)))
                if action.hop_out is not None:
                    fields.append(("hop_out", str(action.hop_out)))
                if action.out_face is not None:
                    fields.append(("out", action.out_face))
                self._log(node, tr.PIT_NEW, str(action.name), fields)
            elif isinstance(action, PitAggregate):
                fields = [("in", action.in_face)]
                if action.nonce is not None:
                    fields.append(("nonce", f"{action.nonce:08x}"))
                if action.hop_in is not None:
                    fields.append(("hop_in", str(action.hop_in)))
                self._log(node, tr.PIT_AGG, str(action.name), fields)
            elif isinstance(action, PitForward):
                self._log(
                    node,
                    tr.PIT_OUT,
                    str(action.name),
                    [("out", action.out_face), ("nonce", f"{action.nonce:08x}")],
                )
            elif isinstance(action, PitDelete):
                self._log(node, tr.PIT_DEL, str(action.name), [("reason", action.reason)])
            elif isinstance(action, DuplicateDetected):
                self._log(
                    node,
                    tr.DUP,
                    str(action.name),
                    [("from", action.from_face), ("nonce", f"{action.nonce:08x}")],
                )
            elif isinstance(action, AdmissionReject):
                self._log(
                    node,
                    tr.REJECT,
                    str(action.name),
                    [("from", action.from_face), ("hop_in", str(action.hop_in))],
                )
            elif isinstance(action, CsHit):
                self._log(node, tr.CS_HIT, str(action.name), [("face", action.face)])
            elif isinstance(action, CsStore):
                self._log(node, tr.CS_STORE, str(action.name), [])
            else:  # pragma: no cover
                raise AssertionError(f"unknown action {action!r}")

    # -- Event handlers ------------------------------------------------------

    def _on_arrival(self, event: _Arrival) -> None:
        node, msg = event.node, event.message
        self._log(
            node, tr.RECV, str(msg.name), [("from", event.from_face)] + tr.encode_message(msg)
        )
        role = self.config.topology.role(node)
        if role == ROLE_ROUTER:
            state = self.routers[node]
            if isinstance(msg, Interest):
                actions = self.strategy.process_interest(state, msg, event.from_face, self.now)
            elif isinstance(msg, NdoMessage):
                actions = self.strategy.process_ndo(state, msg, event.from_face, self.now)
            else:
                actions = self.strategy.process_nack(state, msg, event.from_face, self.now)
            self._apply_actions(node, actions)
        elif role == ROLE_PRODUCER:
            if isinstance(msg, Interest):
                self._on_producer_interest(node, msg, event.from_face)
        elif role == ROLE_CONSUMER:
            if isinstance(msg, (NdoMessage, Nack)):
                self._on_consumer_response(node, msg)

    def _on_producer_interest(self, node: NodeId, interest: Interest, from_face: FaceId) -> None:
        spec = self.producers[node]
        if any(prefix.matches(interest.name) for prefix in spec.prefixes):
            payload = _payload_for(interest.name, spec.payload_size)
            reply = NdoMessage(
                interest.name,
                signature=hashlib.sha256(payload).digest(),
                payload=payload,
                echo_nonce=interest.nonce,
            )
            self._send(node, from_face, reply)
            return
        if self.config.strategy == "ndn":
            self._send(node, from_face, Nack(interest.name, NackCode.NO_DATA))
        elif self.config.strategy == "sifah":
            self._send(node, from_face, Nack(interest.name, NackCode.NO_ROUTE))
        # ccn: silent drop

    # -- Consumers -----------------------------------------------------------

    def _on_tick(self, event: _ConsumerTick) -> None:
        state = self.consumers[event.node]
        spec = state.spec
        stop = spec.stop if spec.stop is not None else self.config.duration
        if self.now >= stop:
            return
        u = _tick_uniform(self.config.seed, event.index)
        prefix = spec.prefixes[-1][0]
        cumulative = 0.0
        for candidate, weight in spec.prefixes:
            cumulative += weight
            if u < cumulative:
                prefix = candidate
                break
        name = Name(prefix.components + (b"seq", str(event.index).encode("ascii")))
        self._emit_interest(state, name, seq=event.index, retx=0)
        gap = round(1e9 / spec.rate)
        self._schedule(self.now + gap, _ConsumerTick(event.node, event.index + 1))

    def _emit_interest(self, state: _ConsumerState, name: Name, seq: int, retx: int) -> None:
        spec = state.spec
        if self.config.strategy == "sifah":
            interest = Interest(name, hop_count=HOP_INFINITY)
        else:
            interest = Interest(name, nonce=state.nonce_rng.getrandbits(32))
        fields = [("seq", str(seq)), ("retx", str(retx))] + tr.encode_message(interest)
        self._log(spec.node, tr.GEN, str(name), fields)
        record = state.records.get(name)
        if record is None:
            state.records[name] = _NameRecord(first_emit=self.now)
        else:
            record.emissions += 1
        self._send(spec.node, state.face, interest)
        if spec.max_retx > 0 and state.records[name].retx_used < spec.max_retx:
            self._schedule(self.now + spec.retx_backoff, _ConsumerRetx(spec.node, name))

    def _on_consumer_response(self, node: NodeId, msg: NdoMessage | Nack) -> None:
        state = self.consumers[node]
        record = state.records.get(msg.name)
        if record is None:
            return
        if isinstance(msg, NdoMessage):
            record.responses.append((self.now, "D", None))
        else:
            record.responses.append((self.now, "N", msg.code.value))

    def _on_consumer_retx(self, event: _ConsumerRetx) -> None:
        state = self.consumers[event.node]
        spec = state.spec
        record = state.records.get(event.name)
        if record is None or record.retx_used >= spec.max_retx:
            return
        # Retransmit on NACK or on silence; a data response ends the exchange.
        if any(kind == "D" for _, kind, _ in record.responses):
            return
        record.retx_used += 1
        seq = int(event.name.components[-1])
        self._emit_interest(state, event.name, seq=seq, retx=record.retx_used)

    # -- Topology changes ------------------------------------------------------

    def _on_link_failure(self, event: _LinkFailure) -> None:
        link = self.links[frozenset((event.a, event.b))]
        if not link.alive:
            return
        link.alive = False
        for node, peer in ((event.a, event.b), (event.b, event.a)):
            self._log(node, tr.LINK_DOWN, tr.NO_NAME, [("face", peer)])
            state = self.routers.get(node)
            if state is not None:
                state.fib.mark_face_down(peer)
                self._apply_actions(
                    node, self.strategy.on_link_failure(state, peer, self.now)
                )

    def _on_pit_expiry(self, event: _PitExpiry) -> None:
        state = self.routers.get(event.node)
        if state is None:
            return
        self._apply_actions(
            event.node, self.strategy.on_pit_expire(state, event.name, self.now)
        )


def run(config: RunConfig) -> RunResult:
    """Validate the config, execute the run, and compute metrics."""
    return Simulation(config).run()
