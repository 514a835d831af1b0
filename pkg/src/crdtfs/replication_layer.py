"""Bottom layer: a set CRDT of element keys plus a key -> content CRDT map.

This is the only layer that produces or consumes replication messages.
Content entries are kept when their key leaves the set, so a later re-add
sees every update that was delivered in between.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Union

from .clocks import ReplicaClock
from .content_crdts import ContentOp, ContentState, RegisterWrite, new_content
from .errors import PreconditionError
from .fs_model import Edit, FileType, edit_applicable, render_path
from .set_crdts import ElementKey, SetCrdt, SetOp, make_set


@dataclass(frozen=True)
class SetMsg:
    op: SetOp

    @property
    def key(self) -> ElementKey:
        return self.op.element

    def encode(self) -> str:
        return "set " + self.op.encode()


@dataclass(frozen=True)
class ContentMsg:
    key: ElementKey
    op: ContentOp

    def encode(self) -> str:
        return f"content {self.key.encode()} {self.op.encode()}"


ReplMsg = Union[SetMsg, ContentMsg]


class KeyOp(NamedTuple):
    """A local operation addressed to the replication layer."""

    kind: str  # "add" | "remove" | "update"
    key: ElementKey
    edit: Optional[Edit] = None

    def render(self) -> str:
        s = f"{self.kind} {render_path(self.key.path)} {self.key.ftype}"
        return s + (f" {self.edit.render()}" if self.edit is not None else "")


class ReplicationLayer:
    def __init__(self, replica_id: str, variant: str = "or", clock: Optional[ReplicaClock] = None):
        self.replica_id = replica_id
        self.variant = variant
        self.clock = clock or ReplicaClock(replica_id)
        self.elements: SetCrdt = make_set(variant)
        self.contents: Dict[ElementKey, ContentState] = {}

    def _content(self, key: ElementKey) -> ContentState:
        state = self.contents.get(key)
        if state is None:
            state = self.contents[key] = new_content(key.ftype)
        return state

    def contains(self, key: ElementKey) -> bool:
        return self.elements.contains(key)

    # -- local operations ------------------------------------------------------

    def local_add(self, key: ElementKey) -> List[ReplMsg]:
        op = self.elements.local_add(key, self.clock)
        msgs: List[ReplMsg] = [SetMsg(op)]
        if key.ftype is not FileType.DIRECTORY:
            msgs += [ContentMsg(key, c) for c in self._content(key).clear_ops(self.clock)]
        return msgs

    def local_remove(self, key: ElementKey) -> List[ReplMsg]:
        return [SetMsg(self.elements.local_remove(key, self.clock))]

    def local_update(self, key: ElementKey, edit: Edit) -> List[ReplMsg]:
        if not self.elements.contains(key):
            raise PreconditionError("exists(p, S)", key.encode())
        if not edit_applicable(edit, key.ftype):
            raise PreconditionError("u applicable on type(content(p, S))", key.encode())
        return [ContentMsg(key, c) for c in self._content(key).local_edit(edit, self.clock)]

    def check(self, op: KeyOp) -> None:
        """Raise if the set CRDT would refuse ``op``; nothing is changed."""
        if op.kind == "add":
            self.elements.check_add(op.key)
        elif op.kind == "remove":
            self.elements.check_remove(op.key)

    def local(self, op: KeyOp) -> List[ReplMsg]:
        if op.kind == "add":
            return self.local_add(op.key)
        if op.kind == "remove":
            return self.local_remove(op.key)
        return self.local_update(op.key, op.edit)

    # -- downstream ------------------------------------------------------------

    def apply(self, msg: ReplMsg) -> None:
        if isinstance(msg, SetMsg):
            self.clock.observe(msg.op.stamp)
            self.elements.apply(msg.op)
        else:
            if isinstance(msg.op, RegisterWrite):
                self.clock.observe(msg.op.stamp)
            # no membership check: updates to removed keys land in the tombstone
            self._content(msg.key).apply(msg.op)

    # -- lookup ------------------------------------------------------------------

    def value_of(self, key: ElementKey):
        if key.ftype is FileType.DIRECTORY:
            return None
        state = self.contents.get(key)
        if state is None:
            return new_content(key.ftype).value()
        return state.value()

    def lookup(self) -> Dict[ElementKey, object]:
        return {k: self.value_of(k) for k in self.elements.lookup()}

