"""Core data model: content names, prefixes, and the three wire messages.

Names are hierarchical lists of byte-string components.  Prefix matching is
structural (component-wise), never substring-based, so ``/ab`` does not match
``/abc``.  All types here are immutable values and safe to share.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

# Simulated time is integer nanoseconds since run start.
SimTime = int

NS = 1
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000

# Hop counts fit in one byte; 255 is the "infinite" sentinel used by
# consumer-originated requests and compares greater than every routable value.
HOP_INFINITY = 255
MAX_ROUTABLE_HOPS = 254

NONCE_BITS = 32
_SEPARATOR = ord("/")


def check_hop_count(value: int) -> int:
    if not 0 <= value <= HOP_INFINITY:
        raise ValueError(f"hop count {value!r} outside [0, {HOP_INFINITY}]")
    return value


def check_nonce(value: int) -> int:
    if not 0 <= value < (1 << NONCE_BITS):
        raise ValueError(f"nonce {value!r} does not fit in {NONCE_BITS} bits")
    return value


def _check_components(components: tuple[bytes, ...], kind: str) -> None:
    if not components:
        raise ValueError(f"{kind} needs at least one component")
    for comp in components:
        if not isinstance(comp, bytes):
            raise TypeError(f"{kind} component {comp!r} is not bytes")
        if not comp:
            raise ValueError(f"{kind} component must be non-empty")
        if _SEPARATOR in comp:
            raise ValueError(f"{kind} component {comp!r} contains '/'")


def _render_components(components: tuple[bytes, ...]) -> str:
    # Canonical text form: '/'-joined with leading '/'.  Bytes outside the
    # printable token-safe range are %-escaped so the form stays lossless.
    out = []
    for comp in components:
        out.append("/")
        for b in comp:
            ch = chr(b)
            if b in (0x25, 0x2F, 0x20) or not (0x21 <= b <= 0x7E):
                out.append(f"%{b:02x}")
            else:
                out.append(ch)
    return "".join(out)


def _parse_components(text: str, kind: str) -> tuple[bytes, ...]:
    if not text.startswith("/"):
        raise ValueError(f"{kind} text {text!r} must start with '/'")
    components = []
    for token in text[1:].split("/"):
        raw = bytearray()
        i = 0
        while i < len(token):
            ch = token[i]
            if ch == "%":
                if i + 3 > len(token):
                    raise ValueError(f"bad escape in {kind} text {text!r}")
                raw.append(int(token[i + 1 : i + 3], 16))
                i += 3
            else:
                raw.append(ord(ch))
                i += 1
        components.append(bytes(raw))
    return tuple(components)


@dataclass(frozen=True)
class Name:
    """Full name of one data object, e.g. /prefix2/seq/41."""

    components: tuple[bytes, ...]

    def __post_init__(self) -> None:
        _check_components(self.components, "Name")

    @classmethod
    def parse(cls, text: str) -> "Name":
        return cls(_parse_components(text, "Name"))

    def to_prefix(self) -> "Prefix":
        """A Name is its own longest prefix."""
        return Prefix(self.components)

    def __str__(self) -> str:
        return _render_components(self.components)


@dataclass(frozen=True)
class Prefix:
    """Advertised name prefix; matches every Name it is a componentwise prefix of."""

    components: tuple[bytes, ...]

    def __post_init__(self) -> None:
        _check_components(self.components, "Prefix")

    @classmethod
    def parse(cls, text: str) -> "Prefix":
        return cls(_parse_components(text, "Prefix"))

    def matches(self, name: Name) -> bool:
        if len(self.components) > len(name.components):
            return False
        return name.components[: len(self.components)] == self.components

    def __str__(self) -> str:
        return _render_components(self.components)


def longest_prefix_match(name: Name, candidates: Iterable[Prefix]) -> Optional[Prefix]:
    """Matching candidate with the greatest component count, or None."""
    best: Optional[Prefix] = None
    for prefix in candidates:
        if prefix.matches(name):
            if best is None or len(prefix.components) > len(best.components):
                best = prefix
    return best


class NackCode(enum.Enum):
    """Reason carried by a negative acknowledgement.

    The first three arise only under nonce-based forwarding (NDN mode); the
    rest only under hop-count forwarding (SIFAH mode).
    """

    DUPLICATE = "duplicate"
    CONGESTION = "congestion"
    NO_DATA = "no_data"
    LOOP = "loop"
    NO_ROUTE = "no_route"
    INTEREST_EXPIRED = "interest_expired"
    ROUTE_FAILED = "route_failed"


NDN_NACK_CODES = frozenset(
    {NackCode.DUPLICATE, NackCode.CONGESTION, NackCode.NO_DATA}
)
SIFAH_NACK_CODES = frozenset(
    {NackCode.LOOP, NackCode.NO_ROUTE, NackCode.INTEREST_EXPIRED, NackCode.ROUTE_FAILED}
)


@dataclass(frozen=True)
class Interest:
    """A request for one named data object.

    Carries exactly one discriminator: a nonce under CCN/NDN, a hop count
    under SIFAH.
    """

    name: Name
    nonce: Optional[int] = None
    hop_count: Optional[int] = None

    def __post_init__(self) -> None:
        if (self.nonce is None) == (self.hop_count is None):
            raise ValueError("Interest carries exactly one of nonce / hop_count")
        if self.nonce is not None:
            check_nonce(self.nonce)
        if self.hop_count is not None:
            check_hop_count(self.hop_count)


@dataclass(frozen=True)
class NdoMessage:
    """A named data object travelling back along the reverse Interest path."""

    name: Name
    signature: bytes = b""
    payload: bytes = b""
    echo_nonce: Optional[int] = None  # present only in CCN/NDN mode

    def __post_init__(self) -> None:
        if self.echo_nonce is not None:
            check_nonce(self.echo_nonce)


@dataclass(frozen=True)
class Nack:
    """Negative acknowledgement for one name."""

    name: Name
    code: NackCode


Message = Interest | NdoMessage | Nack
