"""Two files end up with the same name; the rename method decorates them,
then a replica resolves the clash by merging their text."""

from crdtfs.fs_model import ROOT, AddOp, FileType, Insert, RemoveOp, UpdateOp
from crdtfs.hierarchy_layer import COMPACT, HierarchyConfig
from crdtfs.naming_layer import BY_ORIGIN, BY_TYPE, RENAME, NamingConfig
from crdtfs.sim_harness import Cluster, ClusterConfig

D, T = FileType.DIRECTORY, FileType.TEXT


def clash(decorator):
    c = Cluster(2, ClusterConfig("or", HierarchyConfig(COMPACT), NamingConfig(RENAME, decorator)))
    c.local("r1", AddOp(ROOT, "user", D))
    c.local("r1", AddOp(("user",), "directory2", D))
    c.run(0)
    c.local("r1", AddOp(("user",), "f.c", T))
    c.local("r1", UpdateOp(("user", "f.c"), Insert(0, "ab")))
    c.local("r2", AddOp(("user", "directory2"), "f.c", T))
    c.local("r2", UpdateOp(("user", "directory2", "f.c"), Insert(0, "cd")))
    c.local("r1", RemoveOp(("user", "directory2")))
    c.run(1)
    return c


if __name__ == "__main__":
    for decorator in (BY_ORIGIN, BY_TYPE):
        print(f"--- decorated {decorator}")
        print(clash(decorator)["r1"].stack.dump("tree"), end="")
    c = clash(BY_ORIGIN)
    c.resolve("r2", ("user",), "f.c")
    c.run(2)
    print(f"--- after merge at r2 (converged: {c.converged()[0]})")
    print(c["r1"].stack.dump("tree"), end="")
