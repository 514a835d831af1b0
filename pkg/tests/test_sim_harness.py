import random

import pytest

from crdtfs.errors import ContractViolation, UsageError
from crdtfs.fs_model import ROOT, AddOp, FileType, Insert, RemoveOp, UpdateOp
from crdtfs.hierarchy_layer import COMPACT, LEAF_ONLY, HierarchyConfig
from crdtfs.sim_harness import Cluster, ClusterConfig, all_schedules, compare_dumps, explore

D, T = FileType.DIRECTORY, FileType.TEXT


def toto_conflict(n=2):
    c = Cluster(n)
    c.local("r1", AddOp(ROOT, "Toto", D))
    c.run(0)
    c.local("r1", AddOp(("Toto",), "prog.c", T))
    c.local("r2", RemoveOp(("Toto",)))
    return c


def test_cluster_needs_a_replica():
    with pytest.raises(ValueError):
        Cluster(0)


def test_envelopes_carry_the_sender_clock():
    c = Cluster(2)
    envs = c.local("r1", AddOp(ROOT, "d", D)) + c.local("r1", AddOp(("d",), "e", D))
    assert [e.vclock for e in envs] == [{"r1": 1}, {"r1": 2}]
    assert envs[0].encode().startswith("#1 from=r1 deps=")
    assert c.undelivered() == 2
    # only the head of r1's queue is deliverable at r2
    assert c.deliverable() == [("r2", envs[0])]
    with pytest.raises(ContractViolation):
        c.deliver("r2", envs[1])
    with pytest.raises(ContractViolation):
        c.deliver("r1", envs[0])  # the sender already holds its own op


def test_causal_delivery_holds_back_dependent_messages():
    c = Cluster(3)
    first = c.local("r1", AddOp(ROOT, "d", D))
    c.deliver("r2", first[0])
    second = c.local("r2", AddOp(("d",), "f.c", T))
    # r3 has not seen r1's add, so r2's add inside d must wait
    ready = {(rid, e.eid) for rid, e in c.deliverable()}
    assert ("r3", second[0].eid) not in ready
    assert ("r3", first[0].eid) in ready
    c.run(5)
    assert c.converged()[0]


def test_duplicate_delivery_is_a_contract_violation():
    c = Cluster(2)
    env = c.local("r1", AddOp(ROOT, "d", D))[0]
    c.deliver("r2", env)
    with pytest.raises(ContractViolation):
        c.replicas["r2"].deliver(env)
    with pytest.raises(UsageError):
        c.deliver_by_id("r2", env.eid)


def test_mid_run_divergence_then_convergence():
    c = toto_conflict()
    assert not compare_dumps(c.dumps("flat"))[0]
    with pytest.raises(UsageError):
        c.converged()
    c.run(3)
    ok, report = c.converged()
    assert ok and report == "converged"


def test_divergence_report_names_the_path():
    ok, report = compare_dumps({"r1": "/ d\n/a t x\n", "r2": "/ d\n/b t y\n"})
    assert not ok and "/a" in report


@pytest.mark.parametrize("seed", range(5))
def test_seeded_runs_are_reproducible(seed):
    a, b = toto_conflict(3), toto_conflict(3)
    a.run(seed)
    b.run(random.Random(seed))
    assert a.trace == b.trace
    assert a.dumps() == b.dumps()


def test_run_threaded_equals_run():
    a, b = toto_conflict(3), toto_conflict(3)
    a.run(11)
    b.run_threaded(11)
    assert a.trace == b.trace


def test_trace_format():
    c = toto_conflict()
    c.run(0)
    kinds = {line.split(" ", 2)[0] for line in c.trace}
    assert kinds == {"LOCAL", "DELIVER"}
    assert c.trace[0] == "LOCAL r1 add /Toto directory"


def test_explore_covers_every_interleaving():
    c = toto_conflict()
    pending = c.undelivered()
    schedules = list(all_schedules(c))
    # two independent queues: r1->r2 and r2->r1 interleave freely
    r1_to_r2 = len(c.queues["r2"]["r1"])
    from math import comb
    assert len(schedules) == comb(pending, r1_to_r2)
    dumps = {tuple(sorted(x.dumps("flat").items())) for x in explore(c)}
    assert len(dumps) == 1
    # the original cluster is untouched
    assert c.undelivered() == pending


def test_explore_refuses_large_buses():
    c = Cluster(2)
    for i in range(7):
        c.local("r1", AddOp(ROOT, f"d{i}", D))
    with pytest.raises(UsageError):
        next(explore(c))


def test_clone_is_independent():
    c = toto_conflict()
    d = c.clone()
    d.run(0)
    assert c.undelivered() and not d.undelivered()


def test_explicit_schedule():
    c = toto_conflict()
    sched = next(all_schedules(c))
    c.run(sched)
    assert c.converged()[0]


def test_leaf_only_cluster_updates():
    c = Cluster(2, ClusterConfig("or", HierarchyConfig(LEAF_ONLY)))
    c.local("r1", AddOp(("a",), "f.c", T))
    c.run(0)
    c.local("r2", UpdateOp(("a", "f.c"), Insert(0, "x")))
    c.local("r1", UpdateOp(("a", "f.c"), Insert(0, "y")))
    c.run(1)
    assert c.converged()[0]
    assert sorted(c["r1"].stack.fs()[0].children["a"].children["f.c"].content) == ["x", "y"]


def test_view_checking_records_no_mismatch():
    c = Cluster(2, ClusterConfig("or", HierarchyConfig(COMPACT, True)), check_views=True)
    c.local("r1", AddOp(ROOT, "d", D))
    c.local("r2", AddOp(ROOT, "d", D))
    c.run(2)
    assert c.view_mismatches == []
