"""Strategy output: an ordered list of actions.

Strategies mutate their router's tables in place and return these records so
the engine can emit messages, arm timers, and append trace lines.  For fixed
(state, message, time) inputs the returned list is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .model import Message, Name, SimTime
from .tables import FaceId


@dataclass(frozen=True)
class Send:
    message: Message
    face: FaceId


@dataclass(frozen=True)
class PitNew:
    """A PIT entry was created."""

    name: Name
    in_face: Optional[FaceId]
    nonce: Optional[int] = None      # nonce-based entry
    hop_in: Optional[int] = None     # hop carried by the admitting Interest
    hop_out: Optional[int] = None    # hop recorded for the forwarded Interest
    out_face: Optional[FaceId] = None


@dataclass(frozen=True)
class PitAggregate:
    """An Interest was absorbed into an existing entry."""

    name: Name
    in_face: FaceId
    nonce: Optional[int] = None
    hop_in: Optional[int] = None


@dataclass(frozen=True)
class PitForward:
    """An out face was added to an existing nonce-based entry."""

    name: Name
    out_face: FaceId
    nonce: int


@dataclass(frozen=True)
class PitDelete:
    name: Name
    reason: str  # ndo | nack | expired | link_down | no_route | congestion | no_data


@dataclass(frozen=True)
class DuplicateDetected:
    """A nonce already pending for the name arrived again."""

    name: Name
    from_face: FaceId
    nonce: int


@dataclass(frozen=True)
class AdmissionReject:
    """Hop-count admission failed; the Interest may be looping."""

    name: Name
    from_face: FaceId
    hop_in: int


@dataclass(frozen=True)
class CsHit:
    name: Name
    face: FaceId


@dataclass(frozen=True)
class CsStore:
    name: Name


@dataclass(frozen=True)
class ArmPitTimer:
    name: Name
    deadline: SimTime


Action = Union[
    Send,
    PitNew,
    PitAggregate,
    PitForward,
    PitDelete,
    DuplicateDetected,
    AdmissionReject,
    CsHit,
    CsStore,
    ArmPitTimer,
]

StrategyActions = list
