"""Per-file content CRDTs.

Binary files use a last-writer-wins register (Thomas write rule); text files
use a Logoot-style sequence with dense position identifiers.  Both expose
``local_edit``, ``apply``, ``clear_ops`` and ``value``.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .clocks import ReplicaClock, Stamp
from .errors import ContractViolation, PreconditionError
from .fs_model import Delete, Edit, FileType, Insert, Write

# A position identifier is a tuple of (digit, replica_id) pairs compared
# lexicographically; the empty tuple sorts before every real identifier.
PositionId = Tuple[Tuple[int, str], ...]

BASE = 1 << 32
_FLOOR = (0, "")  # virtual pair below every real pair


def render_position(pid: PositionId) -> str:
    return ".".join(f"{d}:{r}" for d, r in pid)


def allocate_between(left: PositionId, right: Optional[PositionId], replica_id: str) -> PositionId:
    """Return a fresh identifier strictly between ``left`` and ``right``.

    ``right=None`` stands for the end of the document.  The result copies a
    prefix of ``left`` and always ends with a pair owned by ``replica_id``,
    so identifiers minted by different replicas never coincide.
    """
    if not replica_id:
        raise ValueError("replica_id must be non-empty")
    if right is not None and not left < right:
        raise ValueError("left must sort before right")
    prefix: List[Tuple[int, str]] = []
    tied = right is not None  # prefix equals right[:depth]
    depth = 0
    while True:
        lower = left[depth] if depth < len(left) else None
        upper = right[depth] if tied else None
        lo = lower[0] if lower is not None else _FLOOR[0] - 1
        hi = upper[0] if upper is not None else BASE
        if hi - lo >= 2:
            return tuple(prefix) + ((lo + (hi - lo) // 2, replica_id),)
        if lower is None:
            # left is exhausted and right's digit here is 0: step below it.
            prefix.append(_FLOOR)
            tied = tied and upper == _FLOOR
        else:
            prefix.append(lower)
            tied = tied and lower == upper
        depth += 1


@dataclass(frozen=True)
class RegisterWrite:
    value: bytes
    stamp: Stamp

    def encode(self) -> str:
        return f"write 0x{self.value.hex()} stamp={self.stamp.encode()}"


@dataclass(frozen=True)
class SeqInsert:
    pos: PositionId
    atom: str

    def encode(self) -> str:
        return f"ins {render_position(self.pos)} {self.atom!r}"


@dataclass(frozen=True)
class SeqDelete:
    pos: PositionId

    def encode(self) -> str:
        return f"del {render_position(self.pos)}"


ContentOp = Union[RegisterWrite, SeqInsert, SeqDelete]


class LwwRegister:
    algorithm = "lww"

    def __init__(self):
        self.data = b""
        self.stamp: Optional[Stamp] = None

    def value(self) -> bytes:
        return self.data

    def local_edit(self, edit: Edit, clock: ReplicaClock) -> List[ContentOp]:
        if not isinstance(edit, Write):
            raise PreconditionError("u applicable on type(content(p, S))", "binary files take writes")
        op = RegisterWrite(edit.data, clock.stamp())
        self.apply(op)
        return [op]

    def clear_ops(self, clock: ReplicaClock) -> List[ContentOp]:
        op = RegisterWrite(b"", clock.stamp())
        self.apply(op)
        return [op]

    def apply(self, op: ContentOp) -> None:
        if not isinstance(op, RegisterWrite):
            raise ContractViolation("sequence op delivered to a register")
        if self.stamp is None or op.stamp > self.stamp:
            self.data, self.stamp = op.value, op.stamp
        elif op.stamp == self.stamp:
            raise ContractViolation(f"write {op.stamp.encode()} delivered twice")


class LogootSequence:
    """Ordered atoms keyed by position id; deleted atoms stay as tombstones."""

    algorithm = "logoot"

    def __init__(self):
        self.order: List[PositionId] = []
        self.atoms: Dict[PositionId, List] = {}  # pid -> [char, live]

    def value(self) -> str:
        atoms = self.atoms
        return "".join(atoms[p][0] for p in self.order if atoms[p][1])

    def visible_ids(self) -> List[PositionId]:
        return [p for p in self.order if self.atoms[p][1]]

    def local_edit(self, edit: Edit, clock: ReplicaClock) -> List[ContentOp]:
        visible = self.visible_ids()
        if isinstance(edit, Insert):
            if not 0 <= edit.index <= len(visible):
                raise PreconditionError("u applicable on content(p, S)", f"insert index {edit.index}")
            ops: List[ContentOp] = []
            left: PositionId = visible[edit.index - 1] if edit.index > 0 else ()
            for ch in edit.text:
                # right neighbour is the next id in full order, tombstones included
                i = bisect.bisect_right(self.order, left)
                right = self.order[i] if i < len(self.order) else None
                pid = allocate_between(left, right, clock.replica_id)
                op = SeqInsert(pid, ch)
                self.apply(op)
                ops.append(op)
                left = pid
            return ops
        if isinstance(edit, Delete):
            if not 0 <= edit.index < len(visible):
                raise PreconditionError("u applicable on content(p, S)", f"delete index {edit.index}")
            op = SeqDelete(visible[edit.index])
            self.apply(op)
            return [op]
        raise PreconditionError("u applicable on type(content(p, S))", "text files take ins/del")

    def clear_ops(self, clock: ReplicaClock) -> List[ContentOp]:
        ops = [SeqDelete(p) for p in self.visible_ids()]
        for op in ops:
            self.apply(op)
        return ops

    def apply(self, op: ContentOp) -> None:
        if isinstance(op, SeqInsert):
            if op.pos in self.atoms:
                raise ContractViolation(f"position {render_position(op.pos)} inserted twice")
            bisect.insort(self.order, op.pos)
            self.atoms[op.pos] = [op.atom, True]
        elif isinstance(op, SeqDelete):
            atom = self.atoms.get(op.pos)
            if atom is None:
                raise ContractViolation(f"delete of unknown position {render_position(op.pos)}")
            atom[1] = False
        else:
            raise ContractViolation("register op delivered to a sequence")


ContentState = Union[LwwRegister, LogootSequence]


def new_content(ftype: FileType) -> ContentState:
    if ftype is FileType.TEXT:
        return LogootSequence()
    if ftype is FileType.BINARY:
        return LwwRegister()
    raise ValueError("directories carry no content")
