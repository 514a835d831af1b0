import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crdtfs.clocks import ReplicaClock, Stamp
from crdtfs.content_crdts import (
    BASE,
    LogootSequence,
    LwwRegister,
    RegisterWrite,
    SeqDelete,
    allocate_between,
    new_content,
)
from crdtfs.errors import ContractViolation, PreconditionError
from crdtfs.fs_model import Delete, FileType, Insert, Write, apply_edit


def test_allocate_examples():
    pid = allocate_between((), None, "r1")
    assert () < pid
    mid = allocate_between(((5, "r1"),), ((6, "r1"),), "r2")
    assert ((5, "r1"),) < mid < ((6, "r1"),)
    assert mid[-1][1] == "r2"
    # right digit 0 below an exhausted left forces a deeper level
    low = allocate_between((), ((0, "r1"),), "r2")
    assert low < ((0, "r1"),)


def test_allocate_rejects_bad_bounds():
    with pytest.raises(ValueError):
        allocate_between(((5, "r1"),), ((5, "r1"),), "r1")
    with pytest.raises(ValueError):
        allocate_between((), None, "")


def test_density_over_random_neighbours():
    rng = random.Random(2024)
    ids = [allocate_between((), None, "r1")]
    checked = 0
    while checked < 10_000:
        ids.sort()
        i = rng.randrange(-1, len(ids))
        left = ids[i] if i >= 0 else ()
        right = ids[i + 1] if i + 1 < len(ids) else None
        rid = rng.choice(["r1", "r2", "r3"])
        pid = allocate_between(left, right, rid)
        assert left < pid and (right is None or pid < right)
        ids.append(pid)
        checked += 1
    assert len(set(ids)) == len(ids)


def test_density_at_crowded_edges():
    # repeatedly squeezing into the same gap, both at the front and at the end
    left, right = (), ((1, "r1"),)
    for _ in range(200):
        pid = allocate_between(left, right, "r2")
        assert left < pid < right
        right = pid
    left = ((BASE - 1, "r1"),)
    for _ in range(200):
        pid = allocate_between(left, None, "r3")
        assert left < pid
        left = pid


@given(st.lists(st.tuples(st.booleans(), st.integers(0, 20), st.sampled_from("abc")), max_size=30))
def test_sequence_matches_sequential_string(script):
    seq, clock = LogootSequence(), ReplicaClock("r1")
    oracle = ""
    for is_insert, raw, ch in script:
        if is_insert or not oracle:
            edit = Insert(raw % (len(oracle) + 1), ch)
        else:
            edit = Delete(raw % len(oracle))
        seq.local_edit(edit, clock)
        oracle = apply_edit(oracle, edit)
        assert seq.value() == oracle


def test_multi_character_insert_keeps_text_together():
    seq, clock = LogootSequence(), ReplicaClock("r1")
    seq.local_edit(Insert(0, "ad"), clock)
    seq.local_edit(Insert(1, "bc"), clock)
    assert seq.value() == "abcd"


def test_sequence_rejects_bad_edits():
    seq, clock = LogootSequence(), ReplicaClock("r1")
    with pytest.raises(PreconditionError):
        seq.local_edit(Insert(1, "x"), clock)
    with pytest.raises(PreconditionError):
        seq.local_edit(Delete(0), clock)
    with pytest.raises(PreconditionError):
        seq.local_edit(Write(b"x"), clock)
    op = seq.local_edit(Insert(0, "x"), clock)[0]
    with pytest.raises(ContractViolation):
        seq.apply(op)
    with pytest.raises(ContractViolation):
        seq.apply(SeqDelete(((9, "zz"),)))


def test_register_thomas_write_rule():
    reg = LwwRegister()
    w_old = RegisterWrite(b"old", Stamp(3, "r1"))
    w_new = RegisterWrite(b"new", Stamp(5, "r2"))
    tie = RegisterWrite(b"tie", Stamp(5, "r3"))
    for order in itertools.permutations([w_old, w_new, tie]):
        reg = LwwRegister()
        for w in order:
            reg.apply(w)
        assert reg.value() == b"tie"
        assert reg.stamp == Stamp(5, "r3")
    with pytest.raises(ContractViolation):
        reg.apply(tie)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(1, 6), st.sampled_from(["r1", "r2", "r3"]), st.binary(max_size=3)),
                min_size=1, max_size=6, unique_by=lambda w: (w[0], w[1])))
def test_register_value_is_max_stamp(writes):
    ops = [RegisterWrite(data, Stamp(l, r)) for l, r, data in writes]
    best = max(ops, key=lambda w: w.stamp)
    for order in itertools.islice(itertools.permutations(ops), 120):
        reg = LwwRegister()
        for w in order:
            reg.apply(w)
        assert reg.value() == best.value


def test_register_edits():
    reg, clock = LwwRegister(), ReplicaClock("r1")
    reg.local_edit(Write(b"v1"), clock)
    assert reg.value() == b"v1"
    reg.clear_ops(clock)
    assert reg.value() == b""
    with pytest.raises(PreconditionError):
        reg.local_edit(Insert(0, "x"), clock)


def sequences_of(logs):
    tagged = [(i, j) for i, log in enumerate(logs) for j in range(len(log))]
    for perm in itertools.permutations(tagged):
        nxt = [0] * len(logs)
        ok = True
        for i, j in perm:
            if j != nxt[i]:
                ok = False
                break
            nxt[i] += 1
        if ok:
            yield [logs[i][j] for i, j in perm]


def test_clear_then_concurrent_insert_survives():
    # both replicas share "ab"; r1 clears it while r2 inserts "xy" inside and deletes "a"
    base, c0 = LogootSequence(), ReplicaClock("r0")
    shared = base.local_edit(Insert(0, "ab"), c0)
    r1, r2 = LogootSequence(), LogootSequence()
    for op in shared:
        r1.apply(op)
        r2.apply(op)
    clear = r1.clear_ops(ReplicaClock("r1"))
    ins = r2.local_edit(Insert(1, "xy"), ReplicaClock("r2"))
    ins += r2.local_edit(Delete(0), ReplicaClock("r2"))
    logs = [clear, ins]
    assert sum(map(len, logs)) <= 6
    outcomes = set()
    for seq_ops in sequences_of(logs):
        s = LogootSequence()
        for op in shared + seq_ops:
            s.apply(op)
        outcomes.add(s.value())
    assert outcomes == {"xy"}


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.booleans(), st.integers(0, 9)), min_size=1, max_size=6))
def test_sequence_exhaustive_convergence(script):
    reps = [(LogootSequence(), ReplicaClock("r1")), (LogootSequence(), ReplicaClock("r2"))]
    logs = [[], []]
    for who, is_insert, raw in script:
        seq, clock = reps[who]
        n = len(seq.value())
        edit = Insert(raw % (n + 1), "ab"[who]) if is_insert or n == 0 else Delete(raw % n)
        logs[who] += seq.local_edit(edit, clock)
    outcomes = set()
    for seq_ops in sequences_of(logs):
        s = LogootSequence()
        for op in seq_ops:
            s.apply(op)
        outcomes.add(s.value())
    assert len(outcomes) == 1


def test_new_content_by_type():
    assert isinstance(new_content(FileType.TEXT), LogootSequence)
    assert isinstance(new_content(FileType.BINARY), LwwRegister)
    with pytest.raises(ValueError):
        new_content(FileType.DIRECTORY)
