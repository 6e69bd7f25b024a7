"""Declarative scenario files.

Line-oriented text with bracketed sections; ``#`` lines and blank lines are
ignored.  Parsing is total: every rejection names the line and the field.

    [run]
    scenario grid16
    strategy sifah
    duration 10s
    seed 7
    mil 1000ms

    [nodes]
    n00 router

    [links]
    n00 n01 10ms 0.0

    [fib]
    n00 /prefix1 n10 7 1

    [consumers]
    c1 rate=100 prefixes=/prefix1:1,/prefix2:0 phase=0ms

    [producers]
    prod prefixes=/prefix1,/prefix2 payload=64

    [failures]
    b q 5ms

    [sweep]
    loop_prefix /prefix2
    fractions 0 0.1 0.2 0.5 1
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Optional

from .model import MS, NS, SEC, US, Prefix, SimTime
from .simulator import (
    ConfigError,
    ConsumerSpec,
    FailureSpec,
    FibRule,
    LinkSpec,
    ProducerSpec,
    ROLES,
    RunConfig,
    STRATEGIES,
    Topology,
)

_UNITS = {"ns": NS, "us": US, "ms": MS, "s": SEC}


class ScenarioError(Exception):
    def __init__(self, line: int, fieldname: str, message: str):
        super().__init__(f"line {line}: {fieldname}: {message}")
        self.line = line
        self.fieldname = fieldname


def parse_duration(text: str, line: int, fieldname: str) -> SimTime:
    for suffix in ("ns", "us", "ms", "s"):
        if text.endswith(suffix):
            body = text[: -len(suffix)]
            try:
                value = int(body)
            except ValueError:
                raise ScenarioError(line, fieldname, f"bad duration {text!r}") from None
            if value < 0:
                raise ScenarioError(line, fieldname, "duration must be >= 0")
            return value * _UNITS[suffix]
    raise ScenarioError(line, fieldname, f"duration {text!r} needs a unit (ns/us/ms/s)")


def render_duration(ns: SimTime) -> str:
    for suffix, unit in (("s", SEC), ("ms", MS), ("us", US)):
        if ns % unit == 0:
            return f"{ns // unit}{suffix}"
    return f"{ns}ns"


def _parse_float(text: str, line: int, fieldname: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(line, fieldname, f"bad number {text!r}") from None


def _parse_int(text: str, line: int, fieldname: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(line, fieldname, f"bad integer {text!r}") from None


def _parse_prefix(text: str, line: int, fieldname: str) -> Prefix:
    try:
        return Prefix.parse(text)
    except ValueError as exc:
        raise ScenarioError(line, fieldname, str(exc)) from None


@dataclass
class RunSettings:
    strategy: str
    duration: SimTime
    seed: int
    mil: SimTime
    cs_capacity: int = 0
    verifier: str = "always_valid"
    ndn_retx: Optional[SimTime] = None


@dataclass
class SweepSpec:
    loop_prefix: Prefix
    fractions: list[float]


@dataclass
class Scenario:
    name: str
    run: RunSettings
    nodes: list[tuple[str, str]]
    links: list[LinkSpec]
    fib: list[FibRule]
    consumers: list[ConsumerSpec]
    producers: list[ProducerSpec]
    failures: list[FailureSpec] = field(default_factory=list)
    sweep: Optional[SweepSpec] = None

    # -- Rendering -----------------------------------------------------------

    def render(self) -> str:
        out = ["[run]"]
        out.append(f"scenario {self.name}")
        out.append(f"strategy {self.run.strategy}")
        out.append(f"duration {render_duration(self.run.duration)}")
        out.append(f"seed {self.run.seed}")
        out.append(f"mil {render_duration(self.run.mil)}")
        if self.run.cs_capacity:
            out.append(f"cs_capacity {self.run.cs_capacity}")
        if self.run.verifier != "always_valid":
            out.append(f"verifier {self.run.verifier}")
        if self.run.ndn_retx is not None:
            out.append(f"ndn_retx {render_duration(self.run.ndn_retx)}")

        out.append("")
        out.append("[nodes]")
        for node, role in self.nodes:
            out.append(f"{node} {role}")

        out.append("")
        out.append("[links]")
        for link in self.links:
            out.append(f"{link.a} {link.b} {render_duration(link.delay)} {link.loss_rate!r}")

        if self.fib:
            out.append("")
            out.append("[fib]")
            for rule in self.fib:
                out.append(
                    f"{rule.node} {rule.prefix} {rule.face} {rule.hop_count} {rule.rank}"
                )

        if self.consumers:
            out.append("")
            out.append("[consumers]")
            for spec in self.consumers:
                prefixes = ",".join(f"{p}:{w!r}" for p, w in spec.prefixes)
                line = f"{spec.node} rate={spec.rate!r} prefixes={prefixes}"
                if spec.max_retx:
                    line += f" max_retx={spec.max_retx}"
                    line += f" backoff={render_duration(spec.retx_backoff)}"
                if spec.phase:
                    line += f" phase={render_duration(spec.phase)}"
                if spec.stop is not None:
                    line += f" stop={render_duration(spec.stop)}"
                out.append(line)

        if self.producers:
            out.append("")
            out.append("[producers]")
            for spec in self.producers:
                prefixes = ",".join(str(p) for p in spec.prefixes)
                out.append(f"{spec.node} prefixes={prefixes} payload={spec.payload_size}")

        if self.failures:
            out.append("")
            out.append("[failures]")
            for failure in self.failures:
                out.append(f"{failure.a} {failure.b} {render_duration(failure.time)}")

        if self.sweep is not None:
            out.append("")
            out.append("[sweep]")
            out.append(f"loop_prefix {self.sweep.loop_prefix}")
            out.append("fractions " + " ".join(repr(f) for f in self.sweep.fractions))

        return "\n".join(out) + "\n"

    # -- Parsing ---------------------------------------------------------------

    @classmethod
    def parse(cls, text: str, name: str = "scenario") -> "Scenario":
        run_kv: dict[str, tuple[str, int]] = {}
        nodes: list[tuple[str, str]] = []
        links: list[LinkSpec] = []
        fib: list[FibRule] = []
        consumers: list[ConsumerSpec] = []
        producers: list[ProducerSpec] = []
        failures: list[FailureSpec] = []
        sweep_kv: dict[str, tuple[list[str], int]] = {}

        section = None
        known = {"run", "nodes", "links", "fib", "consumers", "producers", "failures", "sweep"}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1]
                if section not in known:
                    raise ScenarioError(lineno, "section", f"unknown section {section!r}")
                continue
            if section is None:
                raise ScenarioError(lineno, "section", "content before any [section]")
            tokens = line.split()
            if section == "run":
                if len(tokens) != 2:
                    raise ScenarioError(lineno, "run", "expected 'key value'")
                if tokens[0] in run_kv:
                    raise ScenarioError(lineno, tokens[0], "duplicate key")
                run_kv[tokens[0]] = (tokens[1], lineno)
            elif section == "nodes":
                if len(tokens) != 2:
                    raise ScenarioError(lineno, "nodes", "expected 'name role'")
                if tokens[1] not in ROLES:
                    raise ScenarioError(lineno, "role", f"unknown role {tokens[1]!r}")
                nodes.append((tokens[0], tokens[1]))
            elif section == "links":
                if len(tokens) != 4:
                    raise ScenarioError(lineno, "links", "expected 'a b delay loss'")
                links.append(
                    LinkSpec(
                        a=tokens[0],
                        b=tokens[1],
                        delay=parse_duration(tokens[2], lineno, "delay"),
                        loss_rate=_parse_float(tokens[3], lineno, "loss"),
                    )
                )
            elif section == "fib":
                if len(tokens) != 5:
                    raise ScenarioError(lineno, "fib", "expected 'node prefix face hop rank'")
                fib.append(
                    FibRule(
                        node=tokens[0],
                        prefix=_parse_prefix(tokens[1], lineno, "prefix"),
                        face=tokens[2],
                        hop_count=_parse_int(tokens[3], lineno, "hop"),
                        rank=_parse_int(tokens[4], lineno, "rank"),
                    )
                )
            elif section == "consumers":
                consumers.append(cls._parse_consumer(tokens, lineno))
            elif section == "producers":
                producers.append(cls._parse_producer(tokens, lineno))
            elif section == "failures":
                if len(tokens) != 3:
                    raise ScenarioError(lineno, "failures", "expected 'a b time'")
                failures.append(
                    FailureSpec(
                        a=tokens[0],
                        b=tokens[1],
                        time=parse_duration(tokens[2], lineno, "time"),
                    )
                )
            elif section == "sweep":
                if tokens[0] in sweep_kv:
                    raise ScenarioError(lineno, tokens[0], "duplicate key")
                sweep_kv[tokens[0]] = (tokens[1:], lineno)

        run = cls._build_run(run_kv)
        if "scenario" in run_kv:
            name = run_kv["scenario"][0]
        sweep = cls._build_sweep(sweep_kv)
        return cls(
            name=name,
            run=run,
            nodes=nodes,
            links=links,
            fib=fib,
            consumers=consumers,
            producers=producers,
            failures=failures,
            sweep=sweep,
        )

    @staticmethod
    def _build_run(kv: dict[str, tuple[str, int]]) -> RunSettings:
        allowed = {"scenario", "strategy", "duration", "seed", "mil", "cs_capacity", "verifier", "ndn_retx"}
        for key, (_, lineno) in kv.items():
            if key not in allowed:
                raise ScenarioError(lineno, key, "unknown run key")
        for key in ("strategy", "duration", "seed", "mil"):
            if key not in kv:
                raise ScenarioError(0, key, "missing required run key")
        strategy, lineno = kv["strategy"]
        if strategy not in STRATEGIES:
            raise ScenarioError(lineno, "strategy", f"unknown strategy {strategy!r}")
        settings = RunSettings(
            strategy=strategy,
            duration=parse_duration(kv["duration"][0], kv["duration"][1], "duration"),
            seed=_parse_int(kv["seed"][0], kv["seed"][1], "seed"),
            mil=parse_duration(kv["mil"][0], kv["mil"][1], "mil"),
        )
        if "cs_capacity" in kv:
            settings.cs_capacity = _parse_int(kv["cs_capacity"][0], kv["cs_capacity"][1], "cs_capacity")
        if "verifier" in kv:
            settings.verifier = kv["verifier"][0]
        if "ndn_retx" in kv:
            settings.ndn_retx = parse_duration(kv["ndn_retx"][0], kv["ndn_retx"][1], "ndn_retx")
        return settings

    @staticmethod
    def _build_sweep(kv: dict[str, tuple[list[str], int]]) -> Optional[SweepSpec]:
        if not kv:
            return None
        for key, (_, lineno) in kv.items():
            if key not in ("loop_prefix", "fractions"):
                raise ScenarioError(lineno, key, "unknown sweep key")
        if "loop_prefix" not in kv or "fractions" not in kv:
            lineno = next(iter(kv.values()))[1]
            raise ScenarioError(lineno, "sweep", "sweep needs loop_prefix and fractions")
        tokens, lineno = kv["loop_prefix"]
        if len(tokens) != 1:
            raise ScenarioError(lineno, "loop_prefix", "expected one prefix")
        prefix = _parse_prefix(tokens[0], lineno, "loop_prefix")
        tokens, lineno = kv["fractions"]
        if not tokens:
            raise ScenarioError(lineno, "fractions", "expected at least one value")
        fractions = [_parse_float(t, lineno, "fractions") for t in tokens]
        for value in fractions:
            if not 0.0 <= value <= 1.0:
                raise ScenarioError(lineno, "fractions", f"{value} outside [0, 1]")
        return SweepSpec(loop_prefix=prefix, fractions=fractions)

    @staticmethod
    def _parse_consumer(tokens: list[str], lineno: int) -> ConsumerSpec:
        node = tokens[0]
        kv = {}
        for token in tokens[1:]:
            key, sep, value = token.partition("=")
            if not sep:
                raise ScenarioError(lineno, key, "expected key=value")
            if key in kv:
                raise ScenarioError(lineno, key, "duplicate key")
            kv[key] = value
        allowed = {"rate", "prefixes", "max_retx", "backoff", "phase", "stop"}
        for key in kv:
            if key not in allowed:
                raise ScenarioError(lineno, key, "unknown consumer key")
        for key in ("rate", "prefixes"):
            if key not in kv:
                raise ScenarioError(lineno, key, "missing consumer key")
        prefixes = []
        for item in kv["prefixes"].split(","):
            text, sep, weight = item.rpartition(":")
            if not sep:
                raise ScenarioError(lineno, "prefixes", f"expected prefix:weight in {item!r}")
            prefixes.append(
                (_parse_prefix(text, lineno, "prefixes"), _parse_float(weight, lineno, "prefixes"))
            )
        spec = ConsumerSpec(
            node=node,
            prefixes=prefixes,
            rate=_parse_float(kv["rate"], lineno, "rate"),
        )
        if "max_retx" in kv:
            spec.max_retx = _parse_int(kv["max_retx"], lineno, "max_retx")
        if "backoff" in kv:
            spec.retx_backoff = parse_duration(kv["backoff"], lineno, "backoff")
        if "phase" in kv:
            spec.phase = parse_duration(kv["phase"], lineno, "phase")
        if "stop" in kv:
            spec.stop = parse_duration(kv["stop"], lineno, "stop")
        return spec

    @staticmethod
    def _parse_producer(tokens: list[str], lineno: int) -> ProducerSpec:
        node = tokens[0]
        kv = {}
        for token in tokens[1:]:
            key, sep, value = token.partition("=")
            if not sep:
                raise ScenarioError(lineno, key, "expected key=value")
            if key in kv:
                raise ScenarioError(lineno, key, "duplicate key")
            kv[key] = value
        allowed = {"prefixes", "payload"}
        for key in kv:
            if key not in allowed:
                raise ScenarioError(lineno, key, "unknown producer key")
        if "prefixes" not in kv:
            raise ScenarioError(lineno, "prefixes", "missing producer key")
        prefixes = [
            _parse_prefix(item, lineno, "prefixes") for item in kv["prefixes"].split(",")
        ]
        spec = ProducerSpec(node=node, prefixes=prefixes)
        if "payload" in kv:
            spec.payload_size = _parse_int(kv["payload"], lineno, "payload")
        return spec

    # -- Conversion -------------------------------------------------------------

    def to_run_config(
        self,
        strategy: Optional[str] = None,
        seed: Optional[int] = None,
        duration: Optional[SimTime] = None,
        mil: Optional[SimTime] = None,
        loop_fraction: Optional[float] = None,
    ) -> RunConfig:
        consumers = [
            ConsumerSpec(
                node=c.node,
                prefixes=list(c.prefixes),
                rate=c.rate,
                max_retx=c.max_retx,
                retx_backoff=c.retx_backoff,
                phase=c.phase,
                stop=c.stop,
            )
            for c in self.consumers
        ]
        if loop_fraction is not None:
            if self.sweep is None:
                raise ConfigError(f"scenario {self.name}: no sweep/loop_prefix defined")
            consumers = [
                self._reweight(c, self.sweep.loop_prefix, loop_fraction) for c in consumers
            ]
        return RunConfig(
            strategy=strategy or self.run.strategy,
            duration=duration if duration is not None else self.run.duration,
            seed=seed if seed is not None else self.run.seed,
            mil=mil if mil is not None else self.run.mil,
            topology=Topology(nodes=dict(self.nodes), links=list(self.links)),
            fib_rules=list(self.fib),
            consumers=consumers,
            producers=list(self.producers),
            failures=list(self.failures),
            cs_capacity=self.run.cs_capacity,
            verifier=self.run.verifier,
            ndn_retx_interval=self.run.ndn_retx,
            name=self.name,
            loop_fraction=loop_fraction,
        )

    def _reweight(
        self, spec: ConsumerSpec, loop_prefix: Prefix, fraction: float
    ) -> ConsumerSpec:
        base = {p: w for p, w in spec.prefixes}
        if loop_prefix not in base:
            raise ConfigError(
                f"consumer {spec.node}: no weight entry for loop prefix {loop_prefix}"
            )
        other_total = sum(w for p, w in spec.prefixes if p != loop_prefix)
        if other_total == 0 and fraction < 1.0:
            raise ConfigError(
                f"consumer {spec.node}: only the loop prefix has weight; "
                f"cannot set fraction {fraction}"
            )
        weights = []
        for prefix, weight in spec.prefixes:
            if prefix == loop_prefix:
                weights.append((prefix, fraction))
            else:
                scaled = weight / other_total * (1.0 - fraction) if other_total else 0.0
                weights.append((prefix, scaled))
        spec.prefixes = weights
        return spec


def load_scenario(path) -> Scenario:
    import os

    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    stem = os.path.splitext(os.path.basename(str(path)))[0]
    return Scenario.parse(text, name=stem)


BUNDLED = ("fig1_ndn_loop", "fig1_singlepath", "fig2_sifah", "grid16")


def bundled_scenario(name: str) -> Scenario:
    if name not in BUNDLED:
        raise ConfigError(f"no bundled scenario named {name!r}")
    text = (
        importlib.resources.files("icnsim.scenarios").joinpath(f"{name}.txt").read_text()
    )
    return Scenario.parse(text, name=name)
