"""Operation-based set CRDTs: G-Set, 2P-Set, LWW-Set, C-Set and OR-Set.

Every variant exposes the same surface.  ``local_add`` / ``local_remove``
check the sequential precondition against ``lookup()``, build the downstream
message, apply it locally and return it for broadcast.  ``apply`` integrates
a message produced elsewhere.  Delivery is exactly-once; OR-Set and 2P-Set
additionally expect causal order, which the simulator provides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Hashable, NamedTuple, Optional, Set, Tuple

from .clocks import ReplicaClock, Stamp, Tag
from .errors import ContractViolation, PreconditionError
from .fs_model import FileType, Path, render_path


class ElementKey(NamedTuple):
    """A replicated element: its absolute path together with its type."""

    path: Path
    ftype: FileType

    @property
    def name(self) -> str:
        return self.path[-1] if self.path else ""

    @property
    def parent(self) -> Path:
        return self.path[:-1]

    def encode(self) -> str:
        return f"{render_path(self.path)}:{self.ftype.value}"


@dataclass(frozen=True)
class SetOp:
    """Downstream message of a set CRDT.

    Only the fields relevant to ``variant`` are populated: ``stamp`` for LWW,
    ``delta`` for C-Set, ``tags`` for OR-Set (one tag on add, the observed
    tags on remove).
    """

    variant: str
    kind: str  # "add" | "remove"
    element: Hashable
    stamp: Optional[Stamp] = None
    delta: Optional[int] = None
    tags: Tuple[Tag, ...] = ()

    def encode(self) -> str:
        elem = self.element.encode() if hasattr(self.element, "encode") else repr(self.element)
        parts = [self.variant, self.kind, elem]
        if self.stamp is not None:
            parts.append("stamp=" + self.stamp.encode())
        if self.delta is not None:
            parts.append(f"delta={self.delta:+d}")
        if self.variant == "or":
            parts.append("tags={" + ",".join(t.encode() for t in self.tags) + "}")
        return " ".join(parts)


class SetCrdt:
    variant = ""

    def lookup(self) -> FrozenSet:
        raise NotImplementedError

    def contains(self, e) -> bool:
        return e in self.lookup()

    def check_add(self, e) -> None:
        """Raise if a local add of ``e`` would be rejected; no side effects."""
        if self.contains(e):
            raise PreconditionError("a not in S", f"{self.variant}-set add")

    def check_remove(self, e) -> None:
        if not self.contains(e):
            raise PreconditionError("a in S", f"{self.variant}-set remove")

    def local_add(self, e, clock: ReplicaClock) -> SetOp:
        self.check_add(e)
        op = self._prepare_add(e, clock)
        self.apply(op)
        return op

    def local_remove(self, e, clock: ReplicaClock) -> SetOp:
        self.check_remove(e)
        op = self._prepare_remove(e, clock)
        self.apply(op)
        return op

    def apply(self, op: SetOp) -> None:
        raise NotImplementedError

    def _prepare_add(self, e, clock: ReplicaClock) -> SetOp:
        return SetOp(self.variant, "add", e)

    def _prepare_remove(self, e, clock: ReplicaClock) -> SetOp:
        return SetOp(self.variant, "remove", e)

    def _check_variant(self, op: SetOp) -> None:
        if op.variant != self.variant:
            raise ContractViolation(f"{op.variant}-set message delivered to {self.variant}-set")


class GSet(SetCrdt):
    """Grow-only: removal is never permitted."""

    variant = "g"

    def __init__(self):
        self.added: Set = set()

    def lookup(self) -> FrozenSet:
        return frozenset(self.added)

    def contains(self, e) -> bool:
        return e in self.added

    def check_remove(self, e) -> None:
        raise PreconditionError("G-Set elements cannot be removed")

    def apply(self, op: SetOp) -> None:
        self._check_variant(op)
        if op.kind != "add":
            raise ContractViolation("remove delivered to a G-Set")
        self.added.add(op.element)


class TwoPSet(SetCrdt):
    """Two-phase set: a removed element can never be added again."""

    variant = "2p"

    def __init__(self):
        self.added: Set = set()
        self.removed: Set = set()

    def lookup(self) -> FrozenSet:
        return frozenset(self.added - self.removed)

    def contains(self, e) -> bool:
        return e in self.added and e not in self.removed

    def check_add(self, e) -> None:
        if e in self.removed:
            raise PreconditionError("a never removed", "2P-Set re-add")
        super().check_add(e)

    def apply(self, op: SetOp) -> None:
        self._check_variant(op)
        (self.added if op.kind == "add" else self.removed).add(op.element)


class LWWSet(SetCrdt):
    """Each element carries the stamp and visibility of its latest operation."""

    variant = "lww"

    def __init__(self):
        self.entries: Dict[object, Tuple[Stamp, bool]] = {}

    def lookup(self) -> FrozenSet:
        return frozenset(e for e, (_, vis) in self.entries.items() if vis)

    def contains(self, e) -> bool:
        entry = self.entries.get(e)
        return entry is not None and entry[1]

    def _prepare_add(self, e, clock):
        return SetOp(self.variant, "add", e, stamp=clock.stamp())

    def _prepare_remove(self, e, clock):
        return SetOp(self.variant, "remove", e, stamp=clock.stamp())

    def apply(self, op: SetOp) -> None:
        self._check_variant(op)
        current = self.entries.get(op.element)
        if current is None or op.stamp > current[0]:
            self.entries[op.element] = (op.stamp, op.kind == "add")


class CSet(SetCrdt):
    """Counter set; remote application adds the carried delta."""

    variant = "c"

    def __init__(self):
        self.counters: Dict[object, int] = {}

    def lookup(self) -> FrozenSet:
        return frozenset(e for e, c in self.counters.items() if c > 0)

    def contains(self, e) -> bool:
        return self.counters.get(e, 0) > 0

    def counter(self, e) -> int:
        return self.counters.get(e, 0)

    def _prepare_add(self, e, clock):
        return SetOp(self.variant, "add", e, delta=1 - self.counter(e))

    def _prepare_remove(self, e, clock):
        return SetOp(self.variant, "remove", e, delta=-self.counter(e))

    def apply(self, op: SetOp) -> None:
        self._check_variant(op)
        self.counters[op.element] = self.counters.get(op.element, 0) + op.delta


class ORSet(SetCrdt):
    """Observed-remove set: a remove only cancels the tags it has seen."""

    variant = "or"

    def __init__(self):
        self.tags: Dict[object, Set[Tag]] = {}
        self._seen: Set[Tag] = set()

    def lookup(self) -> FrozenSet:
        return frozenset(e for e, ts in self.tags.items() if ts)

    def contains(self, e) -> bool:
        return bool(self.tags.get(e))

    def _prepare_add(self, e, clock):
        return SetOp(self.variant, "add", e, tags=(clock.tag(),))

    def _prepare_remove(self, e, clock):
        return SetOp(self.variant, "remove", e, tags=tuple(sorted(self.tags[e])))

    def apply(self, op: SetOp) -> None:
        self._check_variant(op)
        if op.kind == "add":
            (tag,) = op.tags
            if tag in self._seen:
                raise ContractViolation(f"tag {tag.encode()} delivered twice")
            self._seen.add(tag)
            self.tags.setdefault(op.element, set()).add(tag)
            return
        unknown = [t for t in op.tags if t not in self._seen]
        if unknown:
            raise ContractViolation(
                "remove observed undelivered tags " + ",".join(t.encode() for t in unknown)
            )
        live = self.tags.get(op.element)
        if live:
            live.difference_update(op.tags)


VARIANTS = {cls.variant: cls for cls in (GSet, TwoPSet, LWWSet, CSet, ORSet)}


def make_set(variant: str) -> SetCrdt:
    try:
        return VARIANTS[variant]()
    except KeyError:
        raise ValueError(f"unknown set variant {variant!r}; expected one of {sorted(VARIANTS)}") from None
