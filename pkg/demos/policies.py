"""Show how each hierarchy policy places a file whose directory was removed.

r1 removes /user/directory2 while r2, unaware, adds prog.class inside it.
"""

from crdtfs.fs_model import ROOT, AddOp, FileType, RemoveOp
from crdtfs.hierarchy_layer import COMPACT, REAPPEAR, ROOT_POLICY, SKIP, HierarchyConfig
from crdtfs.sim_harness import Cluster, ClusterConfig

D, T, B = FileType.DIRECTORY, FileType.TEXT, FileType.BINARY


def scenario(mode):
    c = Cluster(2, ClusterConfig("or", HierarchyConfig(mode)))
    c.local("r1", AddOp(ROOT, "user", D))
    c.local("r1", AddOp(("user",), "directory1", D))
    c.local("r1", AddOp(("user", "directory1"), "prog.c", T))
    c.local("r1", AddOp(("user",), "directory2", D))
    c.run(0)
    c.local("r1", RemoveOp(("user", "directory2")))
    c.local("r2", AddOp(("user", "directory2"), "prog.class", B))
    c.run(0)
    return c


if __name__ == "__main__":
    for mode in (SKIP, REAPPEAR, ROOT_POLICY, COMPACT):
        c = scenario(mode)
        ok, _ = c.converged()
        print(f"--- {mode} (converged: {ok})")
        print(c["r1"].stack.dump("tree"), end="")
