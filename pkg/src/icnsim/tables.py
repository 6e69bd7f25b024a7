"""Per-router stores: FIB, PIT (two entry shapes) and content store.

Each set of tables is owned by exactly one simulated router and mutated only
on the simulator's event-dispatch thread.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .model import (
    MAX_ROUTABLE_HOPS,
    Name,
    NdoMessage,
    Prefix,
    SimTime,
    check_hop_count,
    check_nonce,
)

# A face identifies one adjacency at a node: the neighbor it leads to, or a
# locally attached application endpoint.
FaceId = str
NodeId = str


class DuplicatePitEntry(Exception):
    """Raised on pit insert for a name that already has an entry."""


@dataclass
class FibNextHop:
    face: FaceId
    hop_count: int
    rank: int

    def __post_init__(self) -> None:
        check_hop_count(self.hop_count)
        if self.hop_count > MAX_ROUTABLE_HOPS:
            raise ValueError("FIB hop count must be routable (< 255)")
        if self.rank < 1:
            raise ValueError("rank starts at 1")


class FibEntry:
    """Ranked next hops for one prefix, with per-face availability."""

    def __init__(self, prefix: Prefix, next_hops: list[FibNextHop]):
        if not next_hops:
            raise ValueError(f"FIB entry for {prefix} has no next hops")
        ranks = [nh.rank for nh in next_hops]
        if len(set(ranks)) != len(ranks):
            raise ValueError(f"duplicate rank in FIB entry for {prefix}")
        self.prefix = prefix
        self.next_hops = sorted(next_hops, key=lambda nh: nh.rank)
        self.availability: dict[FaceId, bool] = {nh.face: True for nh in self.next_hops}

    def iter_by_rank(self) -> Iterator[FibNextHop]:
        return iter(self.next_hops)

    def is_available(self, face: FaceId) -> bool:
        return self.availability.get(face, False)

    def set_available(self, face: FaceId, available: bool) -> None:
        if face in self.availability:
            self.availability[face] = available

    def hop_via(self, face: FaceId) -> Optional[int]:
        for nh in self.next_hops:
            if nh.face == face:
                return nh.hop_count
        return None


class Fib:
    """Prefix-indexed forwarding table with longest-prefix-match lookup."""

    def __init__(self) -> None:
        self._entries: dict[tuple[bytes, ...], FibEntry] = {}

    def add(self, entry: FibEntry) -> None:
        key = entry.prefix.components
        if key in self._entries:
            raise ValueError(f"FIB already has an entry for {entry.prefix}")
        self._entries[key] = entry

    def lookup(self, name: Name) -> Optional[FibEntry]:
        # Probe prefixes longest-first; one dict access per component length.
        comps = name.components
        for length in range(len(comps), 0, -1):
            entry = self._entries.get(comps[:length])
            if entry is not None:
                return entry
        return None

    def entries(self) -> list[FibEntry]:
        return list(self._entries.values())

    def mark_face_down(self, face: FaceId) -> None:
        for entry in self._entries.values():
            entry.set_available(face, False)

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class NdnPitTuple:
    """One nonce's worth of pending state inside an NDN PIT entry."""

    nonce: int
    in_face: Optional[FaceId]
    out_faces: set[FaceId] = field(default_factory=set)
    retx_deadline: SimTime = 0

    def __post_init__(self) -> None:
        check_nonce(self.nonce)


@dataclass
class PitEntryNdn:
    name: Name
    tuples: list[NdnPitTuple] = field(default_factory=list)
    lifetime_deadline: SimTime = 0

    def find_nonce(self, nonce: int) -> Optional[NdnPitTuple]:
        for tup in self.tuples:
            if tup.nonce == nonce:
                return tup
        return None

    def in_faces(self) -> list[FaceId]:
        seen: list[FaceId] = []
        for tup in self.tuples:
            if tup.in_face is not None and tup.in_face not in seen:
                seen.append(tup.in_face)
        return seen

    def out_faces(self) -> set[FaceId]:
        faces: set[FaceId] = set()
        for tup in self.tuples:
            faces |= tup.out_faces
        return faces

    def retx_deadline(self) -> SimTime:
        # Aggregation re-forwards only once the most recently armed deadline
        # passed; tuples that were never forwarded arm nothing.
        armed = [tup.retx_deadline for tup in self.tuples if tup.out_faces]
        return max(armed) if armed else 0


@dataclass
class PitEntrySifah:
    name: Name
    out_hop_count: int
    in_set: set[FaceId]
    out_set: set[FaceId]
    lifetime_deadline: SimTime

    def __post_init__(self) -> None:
        check_hop_count(self.out_hop_count)
        if self.out_hop_count > MAX_ROUTABLE_HOPS:
            raise ValueError("pending out hop count must be routable")
        if not self.out_set:
            raise ValueError("pit entry created without an out face")


PitEntry = PitEntryNdn | PitEntrySifah


class Pit:
    """Pending Interest table, keyed by exact name (never prefix match)."""

    def __init__(self) -> None:
        self._entries: dict[Name, PitEntry] = {}

    def insert(self, entry: PitEntry) -> None:
        if entry.name in self._entries:
            raise DuplicatePitEntry(str(entry.name))
        self._entries[entry.name] = entry

    def find(self, name: Name) -> Optional[PitEntry]:
        return self._entries.get(name)

    def remove(self, name: Name) -> None:
        self._entries.pop(name, None)

    def names(self) -> list[Name]:
        return list(self._entries.keys())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: Name) -> bool:
        return name in self._entries


class ContentStore:
    """LRU cache of data objects; capacity 0 disables caching entirely."""

    def __init__(self, capacity: int = 0):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self._entries: OrderedDict[Name, NdoMessage] = OrderedDict()

    def insert(self, ndo: NdoMessage) -> bool:
        if self.capacity == 0:
            return False
        if ndo.name in self._entries:
            self._entries.move_to_end(ndo.name)
            self._entries[ndo.name] = ndo
            return True
        self._entries[ndo.name] = ndo
        if len(self._entries) > self.capacity:
            self._entries.popitem(last=False)
        return True

    def lookup(self, name: Name) -> Optional[NdoMessage]:
        ndo = self._entries.get(name)
        if ndo is not None:
            self._entries.move_to_end(name)
        return ndo

    def __len__(self) -> int:
        return len(self._entries)


@dataclass
class RouterState:
    """The mutable table set owned by one router."""

    node: NodeId
    fib: Fib = field(default_factory=Fib)
    pit: Pit = field(default_factory=Pit)
    cs: ContentStore = field(default_factory=ContentStore)
