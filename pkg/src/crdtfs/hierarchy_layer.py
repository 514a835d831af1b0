"""Middle layer: turn the replicated key set into a connected tree view.

Two families of modes.  ``leaf_only`` stores files only and synthesizes
every directory from file paths.  The policy modes keep directory keys and
decide where orphans (keys whose parent directory key is absent) appear:

* ``skip``     - orphans are hidden;
* ``reappear`` - orphans stay at their original path, missing ancestors are
  recreated, and recreated directories left empty are pruned;
* ``root``     - orphans hang directly under the root;
* ``compact``  - orphans hang under their longest connected prefix.

An orphan carries the subtree of keys whose parents do exist, so a
directory added concurrently with the removal of its ancestor moves as a
whole.  Every node records its ``origin``: the key path in the set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .errors import AmbiguityError, NotFoundError, PreconditionError
from .fs_model import ROOT, Edit, FileType, Path, render_content, render_path
from .replication_layer import KeyOp
from .set_crdts import ElementKey

LEAF_ONLY = "leaf_only"
SKIP = "skip"
REAPPEAR = "reappear"
ROOT_POLICY = "root"
COMPACT = "compact"
MODES = (LEAF_ONLY, SKIP, REAPPEAR, ROOT_POLICY, COMPACT)

DIR = FileType.DIRECTORY


@dataclass(frozen=True)
class HierarchyConfig:
    mode: str = COMPACT
    incremental: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown hierarchy mode {self.mode!r}; expected one of {MODES}")


@dataclass(eq=False)
class ViewNode:
    name: str
    ftype: FileType
    origin: Path
    content: object = None
    children: List["ViewNode"] = field(default_factory=list)
    synthetic: bool = False  # directory not backed by a set key

    @property
    def is_dir(self) -> bool:
        return self.ftype is DIR

    @property
    def key(self) -> ElementKey:
        return ElementKey(self.origin, self.ftype)

    def sort_key(self) -> Tuple[str, str, str]:
        key = self.__dict__.get("_sort_key")
        if key is None:
            key = self.__dict__["_sort_key"] = (self.name, self.ftype.value, render_path(self.origin))
        return key


def new_root() -> ViewNode:
    return ViewNode("", DIR, ROOT)


def canonical(node: ViewNode, prune=None) -> Optional[ViewNode]:
    """Deep copy with sorted children; ``prune(node, ancestors_synthetic)``
    says whether an empty node should disappear."""

    def rec(n: ViewNode, under_synth: bool) -> Optional[ViewNode]:
        kids = []
        for c in n.children:
            cc = rec(c, under_synth or n.synthetic)
            if cc is not None:
                kids.append(cc)
        kids.sort(key=ViewNode.sort_key)
        if prune is not None and n.origin and n.is_dir and not kids and prune(n, under_synth):
            return None
        return ViewNode(n.name, n.ftype, n.origin, n.content, kids, n.synthetic)

    return rec(node, False)


def dump_view(root: ViewNode) -> str:
    lines = ["/ [directory] (origin=/)"]

    def rec(node: ViewNode, depth: int) -> None:
        for c in sorted(node.children, key=ViewNode.sort_key):
            line = "  " * depth + f"{c.name} [{c.ftype.value}] (origin={render_path(c.origin)})"
            if not c.is_dir:
                line += " = " + render_content(c.ftype, c.content)
            lines.append(line)
            rec(c, depth + 1)

    rec(root, 1)
    return "\n".join(lines) + "\n"


def iter_nodes(root: ViewNode):
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children)


# --- orphan analysis ------------------------------------------------------------


def orphans(keys: Iterable[ElementKey]) -> Set[ElementKey]:
    """Keys not connected to the root through directory keys (transitive)."""
    keys = list(keys)
    dirs = {k.path for k in keys if k.ftype is DIR}
    memo: Dict[Path, bool] = {ROOT: True}

    def connected(p: Path) -> bool:
        hit = memo.get(p)
        if hit is None:
            hit = memo[p] = p in dirs and connected(p[:-1])
        return hit

    return {k for k in keys if not connected(k.parent)}


def build_view(entries: Mapping[ElementKey, object], mode: str) -> ViewNode:
    """Compute the view from scratch (non-incremental evaluation)."""
    root = new_root()
    if mode == LEAF_ONLY:
        interiors: Dict[Path, ViewNode] = {ROOT: root}

        def interior(p: Path) -> ViewNode:
            node = interiors.get(p)
            if node is None:
                node = interiors[p] = ViewNode(p[-1], DIR, p, synthetic=True)
                interior(p[:-1]).children.append(node)
            return node

        for k in sorted(entries):
            if k.ftype is DIR:
                raise ValueError(f"directory key {k.encode()} in leaf-only mode")
            interior(k.parent).children.append(ViewNode(k.name, k.ftype, k.path, entries[k]))
        return canonical(root)

    dirs = {k.path for k in entries if k.ftype is DIR}
    nodes = {k: ViewNode(k.name, k.ftype, k.path, entries[k]) for k in entries}
    recreated: Dict[Path, ViewNode] = {}

    def dir_node(p: Path) -> ViewNode:
        if p == ROOT:
            return root
        if p in dirs:
            return nodes[ElementKey(p, DIR)]
        node = recreated.get(p)
        if node is None:
            node = recreated[p] = ViewNode(p[-1], DIR, p, synthetic=True)
            dir_node(p[:-1]).children.append(node)
        return node

    for k in sorted(entries):
        pp = k.parent
        if pp == ROOT or pp in dirs:
            dir_node(pp).children.append(nodes[k])
        elif mode == SKIP:
            continue
        elif mode == ROOT_POLICY:
            root.children.append(nodes[k])
        elif mode == COMPACT:
            depth = 0
            while depth < len(pp) and pp[: depth + 1] in dirs:
                depth += 1
            dir_node(pp[:depth]).children.append(nodes[k])
        else:
            dir_node(pp).children.append(nodes[k])

    if mode == REAPPEAR:
        orphaned = orphans(entries)
        return canonical(root, lambda n, _: n.synthetic or n.key in orphaned)
    return canonical(root)


class IncrementalView:
    """View maintained under single-key deltas.

    Only the keys whose placement can change are moved: the key itself and,
    for a directory key at ``P``, the keys strictly below ``P`` that are its
    children or direct orphans.  :meth:`tree` must always equal
    :func:`build_view` on the same entries.
    """

    def __init__(self, mode: str):
        HierarchyConfig(mode)
        self.mode = mode
        self.root = new_root()
        self.entries: Dict[ElementKey, object] = {}
        self.dirs: Set[Path] = set()
        self.nodes: Dict[ElementKey, ViewNode] = {}
        self.parent: Dict[ElementKey, Optional[ViewNode]] = {}
        self.synth: Dict[Path, ViewNode] = {}
        self.synth_parent: Dict[Path, ViewNode] = {}
        self.below: Dict[Path, Set[ElementKey]] = {}

    # -- deltas ------------------------------------------------------------------

    def add(self, key: ElementKey, content=None) -> None:
        assert key not in self.entries, f"incremental cache desync: {key.encode()} present"
        if self.mode == LEAF_ONLY and key.ftype is DIR:
            raise ValueError(f"directory key {key.encode()} in leaf-only mode")
        self.entries[key] = content
        for i in range(1, len(key.path)):
            self.below.setdefault(key.path[:i], set()).add(key)
        self.nodes[key] = ViewNode(key.name, key.ftype, key.path, content)
        if key.ftype is DIR:
            self.dirs.add(key.path)
            self._replace_under(key.path)
        self._attach(key)

    def remove(self, key: ElementKey) -> None:
        assert key in self.entries, f"incremental cache desync: {key.encode()} absent"
        self._detach(key)
        del self.entries[key], self.nodes[key], self.parent[key]
        for i in range(1, len(key.path)):
            bucket = self.below[key.path[:i]]
            bucket.discard(key)
            if not bucket:
                del self.below[key.path[:i]]
        if key.ftype is DIR:
            self.dirs.discard(key.path)
            self._replace_under(key.path)

    def set_content(self, key: ElementKey, content) -> None:
        assert key in self.entries, f"incremental cache desync: {key.encode()} absent"
        self.entries[key] = content
        self.nodes[key].content = content

    def sync(self, entries: Mapping[ElementKey, object]) -> None:
        """Apply whatever deltas turn the cached entries into ``entries``."""
        for k in [k for k in self.entries if k not in entries]:
            self.remove(k)
        for k, v in entries.items():
            if k not in self.entries:
                self.add(k, v)
            elif self.entries[k] != v:
                self.set_content(k, v)

    # -- placement ---------------------------------------------------------------

    def _dir_node(self, p: Path) -> ViewNode:
        if p == ROOT:
            return self.root
        if p in self.dirs:
            return self.nodes[ElementKey(p, DIR)]
        node = self.synth.get(p)
        if node is None:
            node = self.synth[p] = ViewNode(p[-1], DIR, p, synthetic=True)
            parent = self._dir_node(p[:-1])
            parent.children.append(node)
            self.synth_parent[p] = parent
        return node

    def _target(self, key: ElementKey) -> Optional[ViewNode]:
        pp = key.parent
        if pp == ROOT or pp in self.dirs or self.mode in (LEAF_ONLY, REAPPEAR):
            return self._dir_node(pp)
        if self.mode == SKIP:
            return None
        if self.mode == ROOT_POLICY:
            return self.root
        depth = 0
        while depth < len(pp) and pp[: depth + 1] in self.dirs:
            depth += 1
        return self._dir_node(pp[:depth])

    def _attach(self, key: ElementKey) -> None:
        target = self._target(key)
        if target is not None:
            target.children.append(self.nodes[key])
        self.parent[key] = target

    def _detach(self, key: ElementKey) -> None:
        p = self.parent.get(key)
        if p is None:
            return
        p.children.remove(self.nodes[key])
        self.parent[key] = None
        self._collect(p)

    def _collect(self, node: ViewNode) -> None:
        # drop synthesized directories that no longer hold anything
        while node.synthetic and not node.children and self.synth.get(node.origin) is node:
            parent = self.synth_parent.pop(node.origin)
            del self.synth[node.origin]
            parent.children.remove(node)
            node = parent

    def _replace_under(self, p: Path) -> None:
        if self.mode == REAPPEAR:
            n = len(p)
            for q in [q for q in self.synth if q[:n] == p]:
                node = self.synth.pop(q, None)
                if node is None:
                    continue  # already collected along with a removed child
                parent = self.synth_parent.pop(q)
                if parent.children and any(c is node for c in parent.children):
                    parent.children.remove(node)
                if parent.synthetic and self.synth.get(parent.origin) is parent:
                    self._collect(parent)
        dirs = self.dirs
        moved = [k for k in self.below.get(p, ()) if k.parent == p or k.parent not in dirs]
        for k in sorted(moved):
            self._detach(k)
        for k in sorted(moved):
            self._attach(k)

    # -- output ------------------------------------------------------------------

    def tree(self) -> ViewNode:
        if self.mode == REAPPEAR:
            return canonical(self.root, lambda n, under_synth: n.synthetic or under_synth)
        return canonical(self.root)


# --- update adaptation ----------------------------------------------------------


def resolve(root: ViewNode, path: Path, ftype: Optional[FileType] = None,
            origin: Optional[Path] = None) -> ViewNode:
    node = root
    for i, seg in enumerate(path):
        last = i == len(path) - 1
        cands = [c for c in node.children if c.name == seg]
        if not last:
            cands = [c for c in cands if c.is_dir]
        else:
            if ftype is not None:
                cands = [c for c in cands if c.ftype is ftype]
            if origin is not None:
                cands = [c for c in cands if c.origin == origin]
        if not cands:
            raise NotFoundError(f"no view node at {render_path(path[: i + 1])}")
        if len(cands) > 1:
            raise AmbiguityError(
                f"{render_path(path[: i + 1])} names {len(cands)} nodes; pass the origin path to choose"
            )
        node = cands[0]
    return node


def adapt_add(parent: ViewNode, name: str, ftype: FileType, mode: str,
              extra: Path = ROOT) -> KeyOp:
    """Translate ``add`` under a view directory into a set-level add."""
    if not parent.is_dir:
        raise PreconditionError("type(content(p, S)) = directory")
    if mode == LEAF_ONLY:
        if ftype is DIR:
            raise PreconditionError("t != directory", "leaf-only mode stores files only")
        return KeyOp("add", ElementKey(parent.origin + extra + (name,), ftype))
    if extra:
        raise NotFoundError(f"no view node at {render_path(parent.origin + extra[:1])}")
    if parent.synthetic:
        raise PreconditionError("exists(p, S)", f"{render_path(parent.origin)} is a recreated directory")
    return KeyOp("add", ElementKey(parent.origin + (name,), ftype))


def adapt_remove(node: ViewNode) -> List[KeyOp]:
    """Remove every key shown in the subtree, children before parents."""
    if not node.origin:
        raise PreconditionError("p is not the root")
    ops: List[KeyOp] = []

    def rec(n: ViewNode) -> None:
        for c in sorted(n.children, key=ViewNode.sort_key):
            rec(c)
        if not n.synthetic:
            ops.append(KeyOp("remove", n.key))

    rec(node)
    return ops


def adapt_update(node: ViewNode, edit: Edit) -> KeyOp:
    if node.is_dir:
        raise PreconditionError("u applicable on type(content(p, S))", "directories have no content")
    return KeyOp("update", node.key, edit)


@dataclass(frozen=True)
class ViewAdd:
    parent: Path
    name: str
    ftype: FileType


@dataclass(frozen=True)
class ViewRemove:
    path: Path
    ftype: FileType
    origin: Optional[Path] = None


@dataclass(frozen=True)
class ViewUpdate:
    path: Path
    ftype: FileType
    origin: Optional[Path]
    edit: Edit


def adapt(op, root: ViewNode, mode: str) -> List[KeyOp]:
    """Adapt a view-level operation into replication-layer operations."""
    if isinstance(op, ViewAdd):
        node, depth = root, 0
        for seg in op.parent:
            dirs = [c for c in node.children if c.name == seg and c.is_dir]
            if len(dirs) > 1:
                raise AmbiguityError(f"{render_path(op.parent[: depth + 1])} is ambiguous")
            if not dirs:
                if any(c.name == seg for c in node.children):
                    raise PreconditionError("type(content(p, S)) = directory")
                break
            node, depth = dirs[0], depth + 1
        return [adapt_add(node, op.name, op.ftype, mode, extra=op.parent[depth:])]
    if isinstance(op, ViewRemove):
        return adapt_remove(resolve(root, op.path, op.ftype, op.origin))
    node = resolve(root, op.path, op.ftype, op.origin)
    return [adapt_update(node, op.edit)]
