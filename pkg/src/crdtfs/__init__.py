"""A replicated file system built from layered CRDTs.

The replication layer stores a set CRDT of ``(path, type)`` keys and a
content CRDT per file; the hierarchy layer turns the key set into a tree,
placing orphans by policy; the naming layer makes sibling names unique.
:mod:`crdtfs.sim_harness` runs several replicas over a causal bus.
"""

from .clocks import ReplicaClock, Stamp, Tag
from .content_crdts import LogootSequence, LwwRegister, allocate_between
from .errors import (
    AmbiguityError,
    ContractViolation,
    CrdtfsError,
    NotFoundError,
    PathError,
    PreconditionError,
    StuckScheduleError,
    UsageError,
)
from .fs_model import (
    AddOp,
    ConflictKind,
    Delete,
    FileType,
    Insert,
    RemoveOp,
    UpdateOp,
    Write,
    classify_conflict,
    parse_path,
    render_path,
)
from .hierarchy_layer import HierarchyConfig, IncrementalView, build_view, orphans
from .naming_layer import NamingConfig, fs_view, type_of_name
from .replication_layer import ReplicationLayer
from .set_crdts import CSet, ElementKey, GSet, LWWSet, ORSet, TwoPSet, make_set
from .sim_harness import Cluster, ClusterConfig, explore, spawn
from .stack import FsStack

__version__ = "0.1.0"

__all__ = [
    "ReplicaClock",
    "Stamp",
    "Tag",
    "LogootSequence",
    "LwwRegister",
    "allocate_between",
    "AmbiguityError",
    "ContractViolation",
    "CrdtfsError",
    "NotFoundError",
    "PathError",
    "PreconditionError",
    "StuckScheduleError",
    "UsageError",
    "AddOp",
    "ConflictKind",
    "Delete",
    "FileType",
    "Insert",
    "RemoveOp",
    "UpdateOp",
    "Write",
    "classify_conflict",
    "parse_path",
    "render_path",
    "HierarchyConfig",
    "IncrementalView",
    "build_view",
    "orphans",
    "NamingConfig",
    "fs_view",
    "type_of_name",
    "ReplicationLayer",
    "CSet",
    "ElementKey",
    "GSet",
    "LWWSet",
    "ORSet",
    "TwoPSet",
    "make_set",
    "Cluster",
    "ClusterConfig",
    "explore",
    "spawn",
    "FsStack",
]
