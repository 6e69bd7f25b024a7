"""Nonce-based Interest processing with rank-ordered forwarding.

One implementation covers both classic variants: with ``nacks_enabled`` the
router answers duplicates, missing routes and exhausted next hops with NACKs
(NDN behavior); without it every NACK emission is suppressed and the control
flow is otherwise identical (original CCN behavior).
"""

from __future__ import annotations

from typing import Optional

from .actions import (
    Action,
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
from .model import Interest, Nack, NackCode, Name, NdoMessage, SimTime
from .tables import FaceId, NdnPitTuple, PitEntryNdn, RouterState


class NdnStrategy:
    """Per-router message handlers shared by every router in one run."""

    kind = "ndn"

    def __init__(self, nacks_enabled: bool, mil: SimTime, retx_interval: Optional[SimTime] = None):
        self.nacks_enabled = nacks_enabled
        self.mil = mil
        # Default: aggregated Interests are never re-forwarded within one
        # entry lifetime.
        self.retx_interval = mil if retx_interval is None else retx_interval

    # -- Interests ---------------------------------------------------------

    def process_interest(
        self, state: RouterState, interest: Interest, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        assert interest.nonce is not None, "nonce-based strategy needs a nonce"
        actions: list[Action] = []
        name = interest.name

        cached = state.cs.lookup(name)
        if cached is not None:
            actions.append(CsHit(name, from_face))
            reply = NdoMessage(name, cached.signature, cached.payload, echo_nonce=interest.nonce)
            actions.append(Send(reply, from_face))
            return actions

        entry = state.pit.find(name)
        if entry is None:
            entry = PitEntryNdn(name=name, lifetime_deadline=now + self.mil)
            tup = NdnPitTuple(
                nonce=interest.nonce, in_face=from_face, retx_deadline=entry.lifetime_deadline
            )
            entry.tuples.append(tup)
            state.pit.insert(entry)
            actions.append(PitNew(name, in_face=from_face, nonce=interest.nonce))
            actions.append(ArmPitTimer(name, entry.lifetime_deadline))
            actions.extend(self.forward(state, entry, tup, now))
            return actions

        assert isinstance(entry, PitEntryNdn)
        if entry.find_nonce(interest.nonce) is not None:
            # Same nonce already pending: duplicate Interest.
            actions.append(DuplicateDetected(name, from_face, interest.nonce))
            if self.nacks_enabled:
                actions.append(Send(Nack(name, NackCode.DUPLICATE), from_face))
            return actions

        # Unseen nonce: aggregate.
        tup = NdnPitTuple(
            nonce=interest.nonce, in_face=from_face, retx_deadline=entry.lifetime_deadline
        )
        entry.tuples.append(tup)
        actions.append(PitAggregate(name, in_face=from_face, nonce=interest.nonce))
        if entry.retx_deadline() <= now:
            actions.extend(self.forward(state, entry, tup, now))
        return actions

    def forward(
        self, state: RouterState, entry: PitEntryNdn, tup: NdnPitTuple, now: SimTime
    ) -> list[Action]:
        """Pick the first eligible next hop by rank and send on it."""
        actions: list[Action] = []
        name = entry.name
        fib_entry = state.fib.lookup(name)
        if fib_entry is None:
            if self.nacks_enabled and tup.in_face is not None:
                actions.append(Send(Nack(name, NackCode.NO_DATA), tup.in_face))
            state.pit.remove(name)
            actions.append(PitDelete(name, "no_data"))
            return actions

        in_faces = {t.in_face for t in entry.tuples if t.in_face is not None}
        out_faces = entry.out_faces()
        for nh in fib_entry.iter_by_rank():
            if nh.face in in_faces or nh.face in out_faces:
                continue
            if not fib_entry.is_available(nh.face):
                continue
            tup.out_faces.add(nh.face)
            tup.retx_deadline = now + self.retx_interval
            actions.append(PitForward(name, out_face=nh.face, nonce=tup.nonce))
            actions.append(Send(Interest(name, nonce=tup.nonce), nh.face))
            return actions

        # Every candidate face is excluded or down.
        if self.nacks_enabled and tup.in_face is not None:
            actions.append(Send(Nack(name, NackCode.CONGESTION), tup.in_face))
        state.pit.remove(name)
        actions.append(PitDelete(name, "congestion"))
        return actions

    # -- Data and NACK return path -----------------------------------------

    def process_ndo(
        self, state: RouterState, ndo: NdoMessage, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        actions: list[Action] = []
        entry = state.pit.find(ndo.name)
        if entry is None or not isinstance(entry, PitEntryNdn):
            return actions
        if from_face not in entry.out_faces():
            return actions  # unsolicited data

        for face in entry.in_faces():
            # Echo the newest nonce recorded for that requester.
            nonce = next(
                (t.nonce for t in reversed(entry.tuples) if t.in_face == face), None
            )
            reply = NdoMessage(ndo.name, ndo.signature, ndo.payload, echo_nonce=nonce)
            actions.append(Send(reply, face))
        if state.cs.insert(NdoMessage(ndo.name, ndo.signature, ndo.payload)):
            actions.append(CsStore(ndo.name))
        state.pit.remove(ndo.name)
        actions.append(PitDelete(ndo.name, "ndo"))
        return actions

    def process_nack(
        self, state: RouterState, nack: Nack, from_face: FaceId, now: SimTime
    ) -> list[Action]:
        if not self.nacks_enabled:
            return []
        actions: list[Action] = []
        entry = state.pit.find(nack.name)
        if entry is None or not isinstance(entry, PitEntryNdn):
            return actions
        if from_face not in entry.out_faces():
            return actions
        for face in entry.in_faces():
            actions.append(Send(Nack(nack.name, nack.code), face))
        state.pit.remove(nack.name)
        actions.append(PitDelete(nack.name, "nack"))
        return actions

    # -- Timers and topology -----------------------------------------------

    def on_pit_expire(self, state: RouterState, name: Name, now: SimTime) -> list[Action]:
        entry = state.pit.find(name)
        if entry is None or entry.lifetime_deadline > now:
            return []
        # Expiry is silent for nonce-based entries.
        state.pit.remove(name)
        return [PitDelete(name, "expired")]

    def on_link_failure(self, state: RouterState, face: FaceId, now: SimTime) -> list[Action]:
        # No PIT cleanup: pending entries just wait out their lifetime.
        return []
