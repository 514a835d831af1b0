"""Workload generators for the simulator: random operations and the small
concurrent scenarios built from each conflict class."""

from __future__ import annotations

import random
from typing import Iterator, List, Optional, Tuple

from .errors import CrdtfsError
from .fs_model import (
    ROOT,
    AddOp,
    Delete,
    FileType,
    FsOp,
    Insert,
    RemoveOp,
    UpdateOp,
    Write,
)
from .hierarchy_layer import LEAF_ONLY, MODES, HierarchyConfig
from .naming_layer import AVOID, RENAME, NamingConfig, type_of_name
from .set_crdts import VARIANTS
from .scenario import parse_op_literal
from .sim_harness import Cluster, ClusterConfig

DIR_NAMES = ("a", "b", "Toto")
FILE_NAMES = ("x.c", "y.txt", "m.mp3", "p.class")
TYPES = (FileType.DIRECTORY, FileType.TEXT, FileType.BINARY)


def all_configs(incremental: bool = True) -> List[ClusterConfig]:
    """Every set variant x hierarchy mode x permitted naming method."""
    out = []
    for variant in VARIANTS:
        for mode in MODES:
            for naming in (NamingConfig(AVOID), NamingConfig(RENAME)):
                try:
                    naming.check_policy(mode)
                except ValueError:
                    continue
                out.append(ClusterConfig(variant, HierarchyConfig(mode, incremental), naming))
    return out


def random_op(cluster: Cluster, rid: str, rng: random.Random) -> Optional[FsOp]:
    stack = cluster.replicas[rid].stack
    tree, index = stack.fs()
    avoid = stack.naming.method == AVOID
    leaf = stack.mode == LEAF_ONLY
    nodes = [(p, b) for p, (b, _) in index.items() if p]
    files = [p for p, b in nodes if b.ftype is not FileType.DIRECTORY]
    r = rng.random()
    if r < 0.2 and nodes:
        return RemoveOp(rng.choice(nodes)[0])
    if r < 0.5 and files:
        path = rng.choice(files)
        content = _content(tree, path)
        if isinstance(content, bytes):
            return UpdateOp(path, Write(rng.choice([b"v1", b"v2", b"zz", b""])))
        if content and rng.random() < 0.4:
            return UpdateOp(path, Delete(rng.randrange(len(content))))
        return UpdateOp(path, Insert(rng.randint(0, len(content)), rng.choice("abcxyz")))
    dirs = [ROOT] + [p for p, b in nodes if b.ftype is FileType.DIRECTORY]
    parent = rng.choice(dirs)
    if leaf and rng.random() < 0.3:
        parent = parent + (rng.choice(DIR_NAMES),)
    if leaf or rng.random() < 0.6:
        name = rng.choice(FILE_NAMES)
    else:
        name = rng.choice(DIR_NAMES)
    ftype = type_of_name(name)
    if not avoid and rng.random() < 0.25:
        ftype = rng.choice(TYPES)
    if leaf and ftype is FileType.DIRECTORY:
        ftype = FileType.TEXT
    return AddOp(parent, name, ftype)


def _content(tree, path):
    node = tree
    for seg in path:
        node = node.children[seg]
    return node.content


def try_local(cluster: Cluster, rid: str, op: FsOp) -> bool:
    try:
        cluster.local(rid, op)
        return True
    except CrdtfsError:
        return False


def random_run(cfg: ClusterConfig, seed: int, replicas: int = 3, max_ops: int = 15,
               check_views: bool = False) -> Cluster:
    """Issue up to ``max_ops`` random local ops, interleaved with partial
    random deliveries; the bus is left holding whatever is still in flight."""
    rng = random.Random(seed)
    cluster = Cluster(replicas, cfg, check_views=check_views)
    n_ops = rng.randint(1, max_ops)
    for _ in range(n_ops):
        rid = rng.choice(cluster.ids)
        op = random_op(cluster, rid, rng)
        if op is not None:
            try_local(cluster, rid, op)
        if rng.random() < 0.4:
            cluster.run(rng, limit=rng.randint(1, 4))
    return cluster


# --- conflict-class scenarios ------------------------------------------------------

SETUP = (
    "add /Toto directory",
    "add /Toto/f.c text",
    "upd /Toto/f.c ins 0 ab",
    "add /Toto/m.mp3 binary",
    "upd /Toto/m.mp3 write v1",
    "add /Toto/sub directory",
    "add /Toto/sub/s.c text",
)

# (conflict class, ops at r1, ops at r2); each side runs without seeing the other
CONFLICT_CASES: Tuple[Tuple[str, Tuple[str, ...], Tuple[str, ...]], ...] = (
    ("AddRemoveSame", ("rmv /Toto/f.c", "add /Toto/f.c text"), ("rmv /Toto/f.c",)),
    ("AddRemoveSame", ("rmv /Toto/sub", "add /Toto/sub directory"), ("rmv /Toto/sub",)),
    ("AddRemoveAncestor", ("add /Toto/prog.c text",), ("rmv /Toto",)),
    ("AddRemoveAncestor", ("add /Toto/sub/x.c text",), ("rmv /Toto/sub",)),
    ("AddRemoveAncestor", ("add /Toto/sub/d directory", "add /Toto/sub/d/y.c text"), ("rmv /Toto/sub",)),
    ("AddRemoveAncestor", ("add /Toto/sub/p.class binary",), ("rmv /Toto/sub",)),
    ("AddAddName", ("add /Toto/n.c text",), ("add /Toto/n.c text",)),
    ("AddAddName", ("add /Toto/n.c text",), ("add /Toto/n.c binary",)),
    ("AddAddName", ("add /Toto/n directory",), ("add /Toto/n text",)),
    ("AddAddName", ("add /Toto/sub/s.mp3 binary",), ("add /Toto/sub/s.mp3 binary",)),
    ("UpdateRemoveAncestor", ("upd /Toto/f.c ins 1 z",), ("rmv /Toto/f.c",)),
    ("UpdateRemoveAncestor", ("upd /Toto/m.mp3 write v2",), ("rmv /Toto",)),
    ("UpdateRemoveAncestor", ("upd /Toto/sub/s.c ins 0 q",), ("rmv /Toto/sub",)),
    ("UpdateRemoveAncestor", ("upd /Toto/f.c ins 2 k",), ("rmv /Toto/f.c", "add /Toto/f.c text")),
)


def parse_op(text: str) -> FsOp:
    """Parse an op literal: ``add /p/name type``, ``rmv /p``, ``upd /p <edit>``."""
    return parse_op_literal(text)


def conflict_scenarios(cfg: ClusterConfig) -> Iterator[Tuple[str, Cluster]]:
    """Two replicas share :data:`SETUP`, then run each conflict case concurrently.

    Ops rejected by the configuration (leaf-only directories, avoid-method
    type rules, set-variant restrictions) are skipped.
    """
    for label, left, right in CONFLICT_CASES:
        cluster = Cluster(2, cfg)
        for text in SETUP:
            try_local(cluster, "r1", parse_op(text))
        cluster.run(0)
        for text in left:
            try_local(cluster, "r1", parse_op(text))
        for text in right:
            try_local(cluster, "r2", parse_op(text))
        yield label, cluster
