"""Hop-count-gated Interest forwarding (SIFAH).

A router accepts a fresh Interest only if the sender's stated hop count
strictly exceeds the router's own hop count to the content through some
ranked FIB next hop, and aggregates onto an existing entry only if the
stated hop count strictly exceeds the hop count the router itself used when
it forwarded.  Rejections, missing routes, expirations and link failures all
answer with NACKs, so every request is eventually answered.
"""

from __future__ import annotations

import hashlib
from typing import Callable, Optional

from .actions import (
    Action,
    AdmissionReject,
    ArmPitTimer,
    CsHit,
    CsStore,
    PitAggregate,
    PitDelete,
    PitNew,
    Send,
)
from .model import Interest, Nack, NackCode, Name, NdoMessage, SimTime
from .tables import FaceId, FibEntry, PitEntrySifah, RouterState

Verifier = Callable[[NdoMessage], bool]


def verify_always(ndo: NdoMessage) -> bool:
    return True


def verify_never(ndo: NdoMessage) -> bool:
    return False


def verify_payload_hash(ndo: NdoMessage) -> bool:
    return ndo.signature == hashlib.sha256(ndo.payload).digest()


VERIFIERS: dict[str, Verifier] = {
    "always_valid": verify_always,
    "always_invalid": verify_never,
    "hash_check": verify_payload_hash,
}


def hfar_admit_new(fib_entry: FibEntry, incoming_hop: int) -> Optional[FaceId]:
    """First available next hop, by rank, strictly closer than the sender was.

    Faces marked unavailable are skipped: a withdrawn adjacency no longer
    counts as a route to the content.
    """
    for nh in fib_entry.iter_by_rank():
        if not fib_entry.is_available(nh.face):
            continue
        if incoming_hop > nh.hop_count:
            return nh.face
    return None


def hfar_admit_aggregate(entry: PitEntrySifah, incoming_hop: int) -> bool:
    """True when the sender was farther from the content than this router."""
    return incoming_hop > entry.out_hop_count


class SifahStrategy:

    kind = "sifah"

    def __init__(self, mil: SimTime, verifier: Verifier = verify_always):
        self.mil = mil
        self.verifier = verifier

    # -- Interests ---------------------------------------------------------

    def process_interest(
        self, state: RouterState, interest: Interest, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        assert interest.hop_count is not None, "hop-count strategy needs a hop count"
        actions: list[Action] = []
        name = interest.name
        hop_in = interest.hop_count

        cached = state.cs.lookup(name)
        if cached is not None:
            actions.append(CsHit(name, from_face))
            actions.append(Send(NdoMessage(name, cached.signature, cached.payload), from_face))
            return actions

        entry = state.pit.find(name)
        if entry is None:
            fib_entry = state.fib.lookup(name)
            if fib_entry is None:
                actions.append(Send(Nack(name, NackCode.NO_ROUTE), from_face))
                return actions
            if hfar_admit_new(fib_entry, hop_in) is None:
                actions.append(AdmissionReject(name, from_face, hop_in))
                actions.append(Send(Nack(name, NackCode.LOOP), from_face))
                return actions
            actions.extend(self.forward(state, interest, from_face, now))
            return actions

        assert isinstance(entry, PitEntrySifah)
        if hfar_admit_aggregate(entry, hop_in):
            entry.in_set.add(from_face)
            actions.append(PitAggregate(name, in_face=from_face, hop_in=hop_in))
            return actions

        actions.append(AdmissionReject(name, from_face, hop_in))
        actions.append(Send(Nack(name, NackCode.LOOP), from_face))
        return actions

    def forward(
        self, state: RouterState, interest: Interest, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        """Create the pending entry on the best admissible next hop."""
        assert interest.hop_count is not None
        actions: list[Action] = []
        name = interest.name
        fib_entry = state.fib.lookup(name)
        assert fib_entry is not None, "forward requires a FIB entry"

        for nh in fib_entry.iter_by_rank():
            if not fib_entry.is_available(nh.face):
                continue
            if interest.hop_count > nh.hop_count:
                entry = PitEntrySifah(
                    name=name,
                    out_hop_count=nh.hop_count,
                    in_set={from_face},
                    out_set={nh.face},
                    lifetime_deadline=now + self.mil,
                )
                state.pit.insert(entry)
                actions.append(
                    PitNew(
                        name,
                        in_face=from_face,
                        hop_in=interest.hop_count,
                        hop_out=nh.hop_count,
                        out_face=nh.face,
                    )
                )
                actions.append(ArmPitTimer(name, entry.lifetime_deadline))
                actions.append(Send(Interest(name, hop_count=nh.hop_count), nh.face))
                return actions

        # No admissible next hop left; answer the one live requester.
        actions.append(Send(Nack(name, NackCode.NO_ROUTE), from_face))
        return actions

    # -- Data and NACK return path -----------------------------------------

    def process_ndo(
        self, state: RouterState, ndo: NdoMessage, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        if not self.verifier(ndo):
            return []
        actions: list[Action] = []
        entry = state.pit.find(ndo.name)
        if entry is None or not isinstance(entry, PitEntrySifah):
            return actions
        if from_face not in entry.out_set:
            return actions

        for face in sorted(entry.in_set):
            actions.append(Send(NdoMessage(ndo.name, ndo.signature, ndo.payload), face))
        if state.cs.insert(NdoMessage(ndo.name, ndo.signature, ndo.payload)):
            actions.append(CsStore(ndo.name))
        state.pit.remove(ndo.name)
        actions.append(PitDelete(ndo.name, "ndo"))
        return actions

    def process_nack(
        self, state: RouterState, nack: Nack, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        actions: list[Action] = []
        entry = state.pit.find(nack.name)
        if entry is None or not isinstance(entry, PitEntrySifah):
            return actions
        if from_face not in entry.out_set:
            return actions
        for face in sorted(entry.in_set):
            actions.append(Send(Nack(nack.name, nack.code), face))
        state.pit.remove(nack.name)
        actions.append(PitDelete(nack.name, "nack"))
        return actions

    # -- Timers and topology -----------------------------------------------

    def on_pit_expire(self, state: RouterState, name: Name, now: SimTime) -> list[Action]:
        entry = state.pit.find(name)
        if entry is None or entry.lifetime_deadline > now:
            return []
        assert isinstance(entry, PitEntrySifah)
        actions: list[Action] = []
        for face in sorted(entry.in_set):
            actions.append(Send(Nack(name, NackCode.INTEREST_EXPIRED), face))
        state.pit.remove(name)
        actions.append(PitDelete(name, "expired"))
        return actions

    def on_link_failure(self, state: RouterState, face: FaceId, now: SimTime) -> list[Action]:
        actions: list[Action] = []
        for name in state.pit.names():
            entry = state.pit.find(name)
            assert isinstance(entry, PitEntrySifah)
            if face in entry.in_set:
                entry.in_set.discard(face)
                if not entry.in_set:
                    state.pit.remove(name)
                    actions.append(PitDelete(name, "link_down"))
                    continue
            if face in entry.out_set:
                entry.out_set.discard(face)
                if not entry.out_set:
                    for requester in sorted(entry.in_set):
                        actions.append(Send(Nack(name, NackCode.ROUTE_FAILED), requester))
                    state.pit.remove(name)
                    actions.append(PitDelete(name, "link_down"))
        return actions
