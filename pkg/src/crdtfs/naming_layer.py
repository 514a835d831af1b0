"""Top layer: give every directory unique child names.

``avoid`` restricts operations so that clashes cannot arise: the type of an
element is fixed by its name extension, so two concurrent adds of one name
always target the same key.  ``rename`` lets clashes happen and decorates
the clashing names until a user resolves them by choosing or merging.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from .errors import NotFoundError, PreconditionError
from .fs_model import (
    ROOT,
    AddOp,
    FileType,
    FsNode,
    FsOp,
    FsTree,
    Insert,
    Path,
    Write,
    exists,
    render_path,
    violated_clause,
)
from .hierarchy_layer import COMPACT, ROOT_POLICY, ViewNode, adapt_remove
from .replication_layer import KeyOp

AVOID = "avoid"
RENAME = "rename"
BY_TYPE = "by_type_algorithm"
BY_ORIGIN = "by_origin_path"

TEXT_EXTENSIONS = frozenset(
    {"c", "h", "cc", "cpp", "java", "py", "js", "ts", "txt", "md", "tex", "xml", "html", "json", "csv"}
)
BINARY_EXTENSIONS = frozenset(
    {"mp3", "avi", "mp4", "class", "o", "so", "png", "jpg", "gif", "pdf", "zip", "bin", "exe", "jar"}
)


@dataclass(frozen=True)
class NamingConfig:
    method: str = RENAME
    decorator: str = BY_ORIGIN
    text_extensions: FrozenSet[str] = field(default=TEXT_EXTENSIONS)

    def __post_init__(self):
        if self.method not in (AVOID, RENAME):
            raise ValueError(f"unknown naming method {self.method!r}")
        if self.decorator not in (BY_TYPE, BY_ORIGIN):
            raise ValueError(f"unknown decorator {self.decorator!r}")

    def check_policy(self, mode: str) -> None:
        if self.method == AVOID and mode in (ROOT_POLICY, COMPACT):
            raise ValueError(f"the avoid naming method is not permitted with the {mode} policy")


def type_of_name(name: str, text_extensions: FrozenSet[str] = TEXT_EXTENSIONS) -> FileType:
    """Extensionless names are directories; text extensions are text; the rest binary."""
    stem, dot, ext = name.rpartition(".")
    if not dot or not stem or not ext:
        return FileType.DIRECTORY
    return FileType.TEXT if ext.lower() in text_extensions else FileType.BINARY


@dataclass(frozen=True)
class NameBinding:
    displayed: str
    origin: Path
    ftype: FileType
    decorated: bool


ALGORITHM_NAMES = {FileType.TEXT: "logoot", FileType.BINARY: "lww", FileType.DIRECTORY: "dir"}


def _origin_suffix(node: ViewNode) -> str:
    return render_path(node.origin[:-1]).replace("/", "_")


def _display_names(children: List[ViewNode], decorator: str) -> List[Tuple[str, bool]]:
    if len({c.name for c in children}) == len(children):
        return [(c.name, False) for c in children]
    groups: Dict[str, List[int]] = defaultdict(list)
    for i, c in enumerate(children):
        groups[c.name].append(i)
    names: List[Optional[str]] = [None] * len(children)
    decorated = [False] * len(children)
    for name, idx in groups.items():
        if len(idx) == 1:
            names[idx[0]] = name
            continue
        first, second = (
            (lambda c: ALGORITHM_NAMES[c.ftype], _origin_suffix)
            if decorator == BY_TYPE
            else (_origin_suffix, lambda c: ALGORITHM_NAMES[c.ftype])
        )
        suffixes = {i: first(children[i]) for i in idx}
        counts: Dict[str, int] = defaultdict(int)
        for s in suffixes.values():
            counts[s] += 1
        for i in idx:
            s = suffixes[i]
            if counts[s] > 1:
                s = f"{s}.{second(children[i])}"
            names[i] = f"{name}.{s}"
            decorated[i] = True
    # a decorated name may still hit an unrelated sibling: number the later ones
    taken: Dict[str, int] = {}
    order = sorted(range(len(children)), key=lambda i: (decorated[i], children[i].sort_key()))
    for i in order:
        n = names[i]
        if n in taken:
            k = 1
            while f"{n}~{k}" in taken:
                k += 1
            n = f"{n}~{k}"
            decorated[i] = True
        taken[n] = i
        names[i] = n
    return list(zip(names, decorated))


def fs_view(view: ViewNode, cfg: NamingConfig) -> Tuple[FsTree, Dict[Path, Tuple[NameBinding, ViewNode]]]:
    """Project a view onto a file system with unique sibling names.

    Returns the tree and an index from displayed path to the binding and the
    view node it stands for.
    """
    index: Dict[Path, Tuple[NameBinding, ViewNode]] = {ROOT: (NameBinding("", ROOT, FileType.DIRECTORY, False), view)}

    def rec(vnode: ViewNode, fnode: FsNode, path: Path) -> None:
        kids = sorted(vnode.children, key=ViewNode.sort_key)
        for child, (shown, deco) in zip(kids, _display_names(kids, cfg.decorator)):
            assert shown not in fnode.children, f"duplicate sibling name {shown!r}"
            fchild = FsNode(shown, child.ftype, child.content, decorated=deco)
            fnode.children[shown] = fchild
            cpath = path + (shown,)
            index[cpath] = (NameBinding(shown, child.origin, child.ftype, deco), child)
            if child.is_dir:
                rec(child, fchild, cpath)

    tree = FsNode("", FileType.DIRECTORY)
    rec(view, tree, ROOT)
    return tree, index


def violated_clause_avoid(op: FsOp, tree: FsTree, cfg: NamingConfig = NamingConfig(AVOID)) -> Optional[str]:
    if isinstance(op, AddOp):
        if type_of_name(op.name, cfg.text_extensions) is not op.ftype:
            return "t = type_of_name(n)"
        if exists(op.parent, tree) and exists(op.path, tree):
            return "not exists(p.n, S)"
    return violated_clause(op, tree)


def check_pre_avoid(op: FsOp, tree: FsTree, cfg: NamingConfig = NamingConfig(AVOID)) -> bool:
    return violated_clause_avoid(op, tree, cfg) is None


def conflicting(index: Mapping[Path, Tuple[NameBinding, ViewNode]], directory: Path, name: str) -> List[ViewNode]:
    entry = index.get(directory)
    if entry is None or not entry[1].is_dir:
        raise NotFoundError(f"no directory at {render_path(directory)}")
    return sorted((c for c in entry[1].children if c.name == name), key=ViewNode.sort_key)


def plan_choose(siblings: List[ViewNode], origin: Path, ftype: Optional[FileType] = None) -> List[KeyOp]:
    keep = [s for s in siblings if s.origin == origin and (ftype is None or s.ftype is ftype)]
    if not keep:
        raise NotFoundError(f"no conflicting element with origin {render_path(origin)}")
    if len(keep) > 1:
        raise PreconditionError("origin identifies one element", "pass the type as well")
    ops: List[KeyOp] = []
    for s in siblings:
        if s is not keep[0]:
            ops += adapt_remove(s)
    return ops


def plan_merge(siblings: List[ViewNode], stamps: Mapping) -> List[KeyOp]:
    """Fold every sibling into the one with the smallest origin.

    Text is appended in sibling order; for binary files the content with the
    greatest write stamp survives.
    """
    types = {s.ftype for s in siblings}
    if len(types) != 1:
        raise PreconditionError("merged elements share one type")
    (ftype,) = types
    if ftype is FileType.DIRECTORY:
        raise PreconditionError("merged elements are files", "directories can only be chosen")
    winner, losers = siblings[0], siblings[1:]
    ops: List[KeyOp] = []
    if ftype is FileType.TEXT:
        length = len(winner.content)
        for s in losers:
            if s.content:
                ops.append(KeyOp("update", winner.key, Insert(length, s.content)))
                length += len(s.content)
    else:
        best = max(siblings, key=lambda s: (stamps.get(s.key) is not None, stamps.get(s.key)))
        if best is not winner:
            ops.append(KeyOp("update", winner.key, Write(best.content)))
    for s in losers:
        ops.append(KeyOp("remove", s.key))
    return ops
