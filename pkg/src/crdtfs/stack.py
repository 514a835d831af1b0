"""One replica's full layer stack: replication, hierarchy and naming."""

from __future__ import annotations

from itertools import zip_longest
from typing import Dict, List, Optional, Tuple

from .errors import PreconditionError
from .fs_model import (
    AddOp,
    FileType,
    FsOp,
    FsTree,
    Path,
    RemoveOp,
    check_name,
    dump_flat,
    dump_tree,
    violated_clause,
)
from .hierarchy_layer import (
    LEAF_ONLY,
    REAPPEAR,
    HierarchyConfig,
    IncrementalView,
    ViewNode,
    adapt_add,
    adapt_remove,
    adapt_update,
    build_view,
    dump_view,
)
from .naming_layer import (
    AVOID,
    NameBinding,
    NamingConfig,
    conflicting,
    fs_view,
    plan_choose,
    plan_merge,
    type_of_name,
)
from .content_crdts import LwwRegister
from .replication_layer import KeyOp, ReplicationLayer, ReplMsg
from .set_crdts import ElementKey


class FsStack:
    def __init__(self, replica_id: str, variant: str = "or",
                 hierarchy: HierarchyConfig = HierarchyConfig(),
                 naming: NamingConfig = NamingConfig()):
        naming.check_policy(hierarchy.mode)
        self.replica_id = replica_id
        self.hierarchy = hierarchy
        self.naming = naming
        self.repl = ReplicationLayer(replica_id, variant)
        self._inc = IncrementalView(hierarchy.mode) if hierarchy.incremental else None
        self._fs: Optional[Tuple[FsTree, Dict]] = None

    @property
    def mode(self) -> str:
        return self.hierarchy.mode

    # -- lookups -----------------------------------------------------------------

    def view(self) -> ViewNode:
        if self._inc is not None:
            return self._inc.tree()
        return build_view(self.repl.lookup(), self.mode)

    def full_view(self) -> ViewNode:
        return build_view(self.repl.lookup(), self.mode)

    def fs(self) -> Tuple[FsTree, Dict[Path, Tuple[NameBinding, ViewNode]]]:
        if self._fs is None:
            inc = self._inc
            # outside reappear mode the live incremental tree needs no pruning;
            # the naming layer only reads it, so skip the defensive copy
            view = inc.root if inc is not None and self.mode != REAPPEAR else self.view()
            self._fs = fs_view(view, self.naming)
        return self._fs

    def dump(self, fmt: str = "tree") -> str:
        tree = self.fs()[0]
        return dump_flat(tree) if fmt == "flat" else dump_tree(tree)

    def check_views(self) -> Optional[str]:
        """Compare the cached view with a full recomputation; None if equal."""
        if self._inc is None:
            return None
        a, b = dump_view(self._inc.tree()), dump_view(self.full_view())
        if a == b:
            return None
        for la, lb in zip_longest(a.splitlines(), b.splitlines(), fillvalue="<none>"):
            if la != lb:
                return f"incremental {la!r} != recomputed {lb!r}"
        return "views differ"

    # -- local operations ----------------------------------------------------------

    def local(self, op: FsOp) -> List[ReplMsg]:
        tree, index = self.fs()
        if isinstance(op, AddOp):
            kops = [self._adapt_add(op, tree, index)]
        else:
            clause = violated_clause(op, tree)
            if clause is not None:
                raise PreconditionError(clause, op.render())
            node = index[op.path][1]
            kops = adapt_remove(node) if isinstance(op, RemoveOp) else [adapt_update(node, op.edit)]
        return self._run(kops)

    def _adapt_add(self, op: AddOp, tree: FsTree, index) -> KeyOp:
        check_name(op.name)
        if self.naming.method == AVOID:
            if type_of_name(op.name, self.naming.text_extensions) is not op.ftype:
                raise PreconditionError("t = type_of_name(n)", op.render())
        depth = 0
        while depth < len(op.parent) and op.parent[: depth + 1] in index:
            depth += 1
        known, extra = op.parent[:depth], op.parent[depth:]
        if extra and self.mode != LEAF_ONLY:
            raise PreconditionError("exists(p, S)", op.render())
        if known not in index or not index[known][1].is_dir:
            raise PreconditionError("type(content(p, S)) = directory", op.render())
        if not extra and op.path in index:
            raise PreconditionError("not exists(p.n, S)", op.render())
        for seg in extra:
            check_name(seg)
            if self.naming.method == AVOID and type_of_name(seg, self.naming.text_extensions) is not FileType.DIRECTORY:
                raise PreconditionError("directories carry no extension", op.render())
        return adapt_add(index[known][1], op.name, op.ftype, self.mode, extra=extra)

    def resolve(self, directory: Path, name: str, origin: Optional[Path] = None,
                ftype: Optional[FileType] = None) -> List[ReplMsg]:
        """Settle a name conflict: keep ``origin`` or, when it is None, merge."""
        if self.naming.method == AVOID:
            raise PreconditionError("naming method is rename")
        _, index = self.fs()
        siblings = conflicting(index, directory, name)
        if len(siblings) < 2:
            raise PreconditionError("name is in conflict", f"{name!r} is unique")
        if origin is not None:
            kops = plan_choose(siblings, origin, ftype)
        else:
            stamps = {}
            for s in siblings:
                state = self.repl.contents.get(s.key)
                if isinstance(state, LwwRegister):
                    stamps[s.key] = state.stamp
            kops = plan_merge(siblings, stamps)
        return self._run(kops)

    def _run(self, kops: List[KeyOp]) -> List[ReplMsg]:
        # validate the whole batch first: a half-applied batch would leave
        # local effects whose messages are never broadcast
        for k in kops:
            self.repl.check(k)
        msgs: List[ReplMsg] = []
        for k in kops:
            msgs += self.repl.local(k)
            self._refresh(k.key)
        return msgs

    # -- downstream ----------------------------------------------------------------

    def apply(self, msg: ReplMsg) -> None:
        self.repl.apply(msg)
        self._refresh(msg.key)

    def _refresh(self, key: ElementKey) -> None:
        self._fs = None
        inc = self._inc
        if inc is None:
            return
        present = self.repl.contains(key)
        cached = key in inc.entries
        if present and not cached:
            inc.add(key, self.repl.value_of(key))
        elif cached and not present:
            inc.remove(key)
        elif present:
            value = self.repl.value_of(key)
            if inc.entries[key] != value:
                inc.set_content(key, value)
