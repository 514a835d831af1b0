"""Logical clocks: Lamport stamps, unique tags and vector clocks."""

from __future__ import annotations

from typing import Dict, Iterable, NamedTuple, Optional


class Stamp(NamedTuple):
    """Lamport time with a replica-id tie-break; totally ordered."""

    lamport: int
    replica_id: str

    def encode(self) -> str:
        return f"{self.lamport}@{self.replica_id}"


class Tag(NamedTuple):
    """Globally unique add-tag for the observed-remove set."""

    replica_id: str
    seq: int

    def encode(self) -> str:
        return f"{self.replica_id}.{self.seq}"


class ReplicaClock:
    """Per-replica source of stamps and tags.

    The Lamport counter must observe every remote stamp so that a local
    write always dominates whatever the replica has already seen.
    """

    def __init__(self, replica_id: str):
        self.replica_id = replica_id
        self.lamport = 0
        self.seq = 0

    def stamp(self) -> Stamp:
        self.lamport += 1
        return Stamp(self.lamport, self.replica_id)

    def tag(self) -> Tag:
        self.seq += 1
        return Tag(self.replica_id, self.seq)

    def observe(self, stamp: Optional[Stamp]) -> None:
        if stamp is not None and stamp.lamport > self.lamport:
            self.lamport = stamp.lamport


VectorClock = Dict[str, int]


def vc_leq(a: VectorClock, b: VectorClock) -> bool:
    return all(v <= b.get(k, 0) for k, v in a.items())


def vc_deliverable(deps: VectorClock, sender: str, local: VectorClock) -> bool:
    """Causal-broadcast delivery test.

    ``deps[sender]`` is the sequence number of the message itself; every
    other entry must already be covered by ``local``.
    """
    if deps.get(sender, 0) != local.get(sender, 0) + 1:
        return False
    for k, v in deps.items():
        if k != sender and v > local.get(k, 0):
            return False
    return True


def vc_encode(vc: VectorClock, ids: Optional[Iterable[str]] = None) -> str:
    keys = sorted(vc) if ids is None else list(ids)
    return "[" + ",".join(f"{k}:{vc.get(k, 0)}" for k in keys) + "]"
