"""Line-oriented run trace.

One event per line, stable field order, suitable for golden-file diffing:

    time_ns node kind name detail...

``detail`` is a sequence of ``key=value`` tokens.  Messages embedded in a
line round-trip losslessly (signatures and payloads are base64).
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .model import Interest, Message, Nack, NackCode, Name, NdoMessage

# Record kinds.
GEN = "gen"              # consumer created an Interest
SEND = "send"            # node handed a message to a link
RECV = "recv"            # message arrived at a node
DROP = "drop"            # message lost (link loss or dead link)
PIT_NEW = "pit_new"
PIT_AGG = "pit_agg"
PIT_OUT = "pit_out"      # out face added to a nonce-based entry
PIT_DEL = "pit_del"
DUP = "dup"              # duplicate nonce detected
REJECT = "reject"        # hop-count admission failed
CS_HIT = "cs_hit"
CS_STORE = "cs_store"
LINK_DOWN = "link_down"

NO_NAME = "-"


def encode_message(msg: Message) -> list[tuple[str, str]]:
    if isinstance(msg, Interest):
        if msg.nonce is not None:
            return [("msg", "I"), ("nonce", f"{msg.nonce:08x}")]
        return [("msg", "I"), ("hop", str(msg.hop_count))]
    if isinstance(msg, NdoMessage):
        fields = [
            ("msg", "D"),
            ("sig", base64.b64encode(msg.signature).decode("ascii")),
            ("payload", base64.b64encode(msg.payload).decode("ascii")),
        ]
        if msg.echo_nonce is not None:
            fields.append(("nonce", f"{msg.echo_nonce:08x}"))
        return fields
    if isinstance(msg, Nack):
        return [("msg", "N"), ("code", msg.code.value)]
    raise TypeError(f"not a message: {msg!r}")


def decode_message(name: Name, fields: dict[str, str]) -> Message:
    kind = fields["msg"]
    if kind == "I":
        if "nonce" in fields:
            return Interest(name, nonce=int(fields["nonce"], 16))
        return Interest(name, hop_count=int(fields["hop"]))
    if kind == "D":
        nonce = int(fields["nonce"], 16) if "nonce" in fields else None
        return NdoMessage(
            name,
            signature=base64.b64decode(fields["sig"]),
            payload=base64.b64decode(fields["payload"]),
            echo_nonce=nonce,
        )
    if kind == "N":
        return Nack(name, NackCode(fields["code"]))
    raise ValueError(f"unknown message token {kind!r}")


@dataclass(frozen=True)
class TraceRecord:
    time: int
    node: str
    kind: str
    name: str  # canonical name text, or "-" when not applicable
    fields: tuple[tuple[str, str], ...] = ()

    def field_map(self) -> dict[str, str]:
        return dict(self.fields)

    def content_name(self) -> Optional[Name]:
        if self.name == NO_NAME:
            return None
        return Name.parse(self.name)

    def message(self) -> Message:
        return decode_message(Name.parse(self.name), self.field_map())

    def render(self) -> str:
        parts = [str(self.time), self.node, self.kind, self.name]
        parts.extend(f"{k}={v}" for k, v in self.fields)
        return " ".join(parts)

    @classmethod
    def parse(cls, line: str) -> "TraceRecord":
        tokens = line.split(" ")
        if len(tokens) < 4:
            raise ValueError(f"malformed trace line: {line!r}")
        fields = []
        for token in tokens[4:]:
            key, _, value = token.partition("=")
            fields.append((key, value))
        return cls(int(tokens[0]), tokens[1], tokens[2], tokens[3], tuple(fields))


class TraceLog:
    """Ordered sequence of trace records for one run."""

    def __init__(self, records: Optional[list[TraceRecord]] = None):
        self.records: list[TraceRecord] = records if records is not None else []

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def text(self) -> str:
        return "".join(rec.render() + "\n" for rec in self.records)

    @classmethod
    def parse(cls, text: str) -> "TraceLog":
        records = [TraceRecord.parse(line) for line in text.splitlines() if line]
        return cls(records)

    def __iter__(self) -> Iterator[TraceRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)
