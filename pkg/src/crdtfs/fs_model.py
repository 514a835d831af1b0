"""Sequential file-system model: paths, trees, predicates and the conflict taxonomy.

The tree built here is the plain, user-visible file system.  It is used as
the output type of the naming layer and, through :func:`apply_post`, as a
sequential oracle in tests.  It is never replicated.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

from .errors import NotFoundError, PathError, PreconditionError

Path = Tuple[str, ...]
ROOT: Path = ()
SEP = "/"


class FileType(str, enum.Enum):
    DIRECTORY = "directory"
    TEXT = "text"
    BINARY = "binary"

    def __str__(self) -> str:
        return self.value


# --- user-level content edits -------------------------------------------------


@dataclass(frozen=True)
class Insert:
    """Insert ``text`` so that its first character lands at visible ``index``."""

    index: int
    text: str

    def render(self) -> str:
        return f"ins {self.index} {self.text}"


@dataclass(frozen=True)
class Delete:
    index: int

    def render(self) -> str:
        return f"del {self.index}"


@dataclass(frozen=True)
class Write:
    data: bytes

    def render(self) -> str:
        return f"write {self.data.decode('utf-8', 'backslashreplace')}"


Edit = Union[Insert, Delete, Write]


def edit_applicable(edit: Edit, ftype: FileType) -> bool:
    if ftype is FileType.TEXT:
        return isinstance(edit, (Insert, Delete))
    if ftype is FileType.BINARY:
        return isinstance(edit, Write)
    return False


def apply_edit(content, edit: Edit):
    """Sequential semantics of an edit; raises ``IndexError`` when out of range."""
    if isinstance(edit, Insert):
        if not 0 <= edit.index <= len(content):
            raise IndexError(f"insert index {edit.index} out of range 0..{len(content)}")
        return content[: edit.index] + edit.text + content[edit.index :]
    if isinstance(edit, Delete):
        if not 0 <= edit.index < len(content):
            raise IndexError(f"delete index {edit.index} out of range 0..{len(content) - 1}")
        return content[: edit.index] + content[edit.index + 1 :]
    return edit.data


def empty_content(ftype: FileType):
    if ftype is FileType.TEXT:
        return ""
    if ftype is FileType.BINARY:
        return b""
    return None


def is_empty(content) -> bool:
    if isinstance(content, dict):
        return not content
    return content is None or len(content) == 0


# --- paths ---------------------------------------------------------------------


def parse_path(text: str) -> Path:
    if not text.startswith(SEP):
        raise PathError(text, 0, "missing leading separator")
    if text == SEP:
        return ROOT
    segments = []
    pos = 1
    for seg in text[1:].split(SEP):
        if not seg:
            raise PathError(text, pos, "empty segment")
        segments.append(seg)
        pos += len(seg) + 1
    return tuple(segments)


def render_path(path: Path) -> str:
    return SEP + SEP.join(path)


def is_prefix(short: Path, long: Path) -> bool:
    """Non-strict prefix test."""
    return len(short) <= len(long) and long[: len(short)] == short


def check_name(name: str) -> None:
    if not name or SEP in name:
        raise PathError(name, 0, "invalid element name")


# --- trees ---------------------------------------------------------------------


@dataclass
class FsNode:
    name: str
    ftype: FileType
    content: Union[str, bytes, None] = None
    children: Dict[str, "FsNode"] = field(default_factory=dict)
    decorated: bool = False

    @property
    def is_dir(self) -> bool:
        return self.ftype is FileType.DIRECTORY

    def copy(self) -> "FsNode":
        return FsNode(
            self.name,
            self.ftype,
            self.content,
            {k: v.copy() for k, v in self.children.items()},
            self.decorated,
        )


FsTree = FsNode


def new_tree() -> FsTree:
    return FsNode("", FileType.DIRECTORY)


def _node_at(path: Path, tree: FsTree) -> Optional[FsNode]:
    node = tree
    for seg in path:
        if not node.is_dir or seg not in node.children:
            return None
        node = node.children[seg]
    return node


def exists(path: Path, tree: FsTree) -> bool:
    return _node_at(path, tree) is not None


def content_at(path: Path, tree: FsTree):
    node = _node_at(path, tree)
    if node is None:
        raise NotFoundError(f"no element at {render_path(path)}")
    return node.children if node.is_dir else node.content


def type_at(path: Path, tree: FsTree) -> FileType:
    node = _node_at(path, tree)
    if node is None:
        raise NotFoundError(f"no element at {render_path(path)}")
    return node.ftype


def walk(tree: FsTree, prefix: Path = ROOT) -> Iterator[Tuple[Path, FsNode]]:
    """Yield ``(path, node)`` for every non-root element, parents first."""
    for name in sorted(tree.children):
        child = tree.children[name]
        p = prefix + (name,)
        yield p, child
        if child.is_dir:
            yield from walk(child, p)


def render_content(ftype: FileType, content) -> str:
    if ftype is FileType.TEXT:
        return json.dumps(content, ensure_ascii=False)
    if ftype is FileType.BINARY:
        return "0x" + bytes(content).hex()
    return ""


def dump_tree(tree: FsTree) -> str:
    """Indented dump, one node per line; byte-stable."""
    lines: List[str] = ["/ [directory]"]

    def rec(node: FsNode, depth: int) -> None:
        for name in sorted(node.children):
            child = node.children[name]
            line = "  " * depth + f"{name} [{child.ftype.value}]"
            if child.decorated:
                line += " (conflict)"
            if not child.is_dir:
                line += " = " + render_content(child.ftype, child.content)
            lines.append(line)
            if child.is_dir:
                rec(child, depth + 1)

    rec(tree, 1)
    return "\n".join(lines) + "\n"


def dump_flat(tree: FsTree) -> str:
    lines = []
    for path, node in walk(tree):
        line = f"{render_path(path)} [{node.ftype.value}]"
        if node.decorated:
            line += " (conflict)"
        if not node.is_dir:
            line += " = " + render_content(node.ftype, node.content)
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


# --- operations ----------------------------------------------------------------


@dataclass(frozen=True)
class AddOp:
    parent: Path
    name: str
    ftype: FileType

    @property
    def path(self) -> Path:
        return self.parent + (self.name,)

    def render(self) -> str:
        return f"add {render_path(self.path)} {self.ftype}"


@dataclass(frozen=True)
class RemoveOp:
    path: Path

    def render(self) -> str:
        return f"rmv {render_path(self.path)}"


@dataclass(frozen=True)
class UpdateOp:
    path: Path
    edit: Edit

    def render(self) -> str:
        return f"upd {render_path(self.path)} {self.edit.render()}"


FsOp = Union[AddOp, RemoveOp, UpdateOp]


class ConflictKind(str, enum.Enum):
    ADD_REMOVE_SAME = "AddRemoveSame"
    ADD_REMOVE_ANCESTOR = "AddRemoveAncestor"
    ADD_ADD_NAME = "AddAddName"
    UPDATE_REMOVE_ANCESTOR = "UpdateRemoveAncestor"
    NONE = "None"


def classify_conflict(a: FsOp, b: FsOp) -> ConflictKind:
    """Classify a pair of concurrent operations; symmetric in its arguments."""
    if isinstance(b, AddOp) and not isinstance(a, AddOp):
        a, b = b, a
    if isinstance(b, UpdateOp) and isinstance(a, RemoveOp):
        a, b = b, a
    if isinstance(a, AddOp):
        if isinstance(b, AddOp):
            if a.parent == b.parent and a.name == b.name:
                return ConflictKind.ADD_ADD_NAME
        elif isinstance(b, RemoveOp):
            if b.path == a.path:
                return ConflictKind.ADD_REMOVE_SAME
            if is_prefix(b.path, a.parent):
                return ConflictKind.ADD_REMOVE_ANCESTOR
    elif isinstance(a, UpdateOp) and isinstance(b, RemoveOp):
        if is_prefix(b.path, a.path):
            return ConflictKind.UPDATE_REMOVE_ANCESTOR
    return ConflictKind.NONE


def violated_clause(op: FsOp, tree: FsTree) -> Optional[str]:
    """Return the first failing precondition clause, or None."""
    if isinstance(op, AddOp):
        if not exists(op.parent, tree):
            return "exists(p, S)"
        if type_at(op.parent, tree) is not FileType.DIRECTORY:
            return "type(content(p, S)) = directory"
        if exists(op.path, tree):
            return "not exists(p.n, S)"
        return None
    if isinstance(op, RemoveOp):
        if not op.path:
            return "p is not the root"
        return None if exists(op.path, tree) else "exists(p, S)"
    if not exists(op.path, tree):
        return "exists(p, S)"
    node = _node_at(op.path, tree)
    if not edit_applicable(op.edit, node.ftype):
        return "u applicable on type(content(p, S))"
    try:
        apply_edit(node.content, op.edit)
    except IndexError:
        return "u applicable on content(p, S)"
    return None


def check_pre(op: FsOp, tree: FsTree) -> bool:
    return violated_clause(op, tree) is None


def apply_post(op: FsOp, tree: FsTree) -> FsTree:
    """Apply ``op`` to a copy of ``tree`` under sequential semantics."""
    clause = violated_clause(op, tree)
    if clause is not None:
        raise PreconditionError(clause, op.render())
    out = tree.copy()
    if isinstance(op, AddOp):
        parent = _node_at(op.parent, out)
        parent.children[op.name] = FsNode(op.name, op.ftype, empty_content(op.ftype))
    elif isinstance(op, RemoveOp):
        parent = _node_at(op.path[:-1], out)
        del parent.children[op.path[-1]]
    else:
        node = _node_at(op.path, out)
        node.content = apply_edit(node.content, op.edit)
    return out


def violated_post(op: FsOp, before: FsTree, after: FsTree) -> List[str]:
    """Post-condition clauses that do not hold for ``before -> after``."""
    bad = []
    if isinstance(op, AddOp):
        if not exists(op.path, after):
            bad.append("exists(p.n, S)")
        else:
            if type_at(op.path, after) is not op.ftype:
                bad.append("type(content(p.n, S)) = t")
            if not is_empty(content_at(op.path, after)):
                bad.append("isEmpty(content(p.n, S))")
    elif isinstance(op, RemoveOp):
        if exists(op.path, after):
            bad.append("not exists(p, S)")
    else:
        if not exists(op.path, after):
            bad.append("exists(p, S)")
        elif content_at(op.path, after) != apply_edit(content_at(op.path, before), op.edit):
            bad.append("content(p, S)' = content(p, S) o u")
    return bad
