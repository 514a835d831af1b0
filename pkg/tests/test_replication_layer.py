import itertools

import pytest

from crdtfs.errors import PreconditionError
from crdtfs.fs_model import Delete, FileType, Insert, Write
from crdtfs.replication_layer import ContentMsg, KeyOp, ReplicationLayer, SetMsg
from crdtfs.set_crdts import VARIANTS, ElementKey

D, T, B = FileType.DIRECTORY, FileType.TEXT, FileType.BINARY
PROG = ElementKey(("Toto", "prog.c"), T)
TOTO = ElementKey(("Toto",), D)
SONG = ElementKey(("Toto", "m.mp3"), B)


def deliver(layer, msgs):
    for m in msgs:
        layer.apply(m)


def test_fresh_lookup_is_empty():
    assert ReplicationLayer("r1").lookup() == {}


def test_add_file_emits_set_add_and_clear():
    r1 = ReplicationLayer("r1")
    msgs = r1.local_add(PROG)
    assert isinstance(msgs[0], SetMsg) and msgs[0].op.kind == "add"
    assert all(isinstance(m, ContentMsg) for m in msgs[1:])
    assert r1.lookup() == {PROG: ""}
    reg = r1.local_add(SONG)
    assert len(reg) == 2 and reg[1].op.value == b""
    assert r1.lookup()[SONG] == b""


def test_add_directory_has_no_content_msg():
    r1 = ReplicationLayer("r1")
    msgs = r1.local_add(TOTO)
    assert len(msgs) == 1
    assert r1.lookup() == {TOTO: None}
    with pytest.raises(PreconditionError):
        r1.local_add(TOTO)


def test_update_rules():
    r1 = ReplicationLayer("r1")
    with pytest.raises(PreconditionError):
        r1.local_update(PROG, Insert(0, "a"))
    r1.local_add(PROG)
    r1.local_add(TOTO)
    assert len(r1.local_update(PROG, Insert(0, "a"))) == 1
    with pytest.raises(PreconditionError):
        r1.local_update(PROG, Write(b"x"))
    with pytest.raises(PreconditionError):
        r1.local_update(TOTO, Insert(0, "a"))
    with pytest.raises(PreconditionError):
        r1.local_remove(SONG)


def test_remote_update_on_removed_key_is_hidden_until_re_add():
    r1, r2 = ReplicationLayer("r1"), ReplicationLayer("r2")
    deliver(r2, r1.local_add(PROG))
    upd = r2.local_update(PROG, Insert(0, "z"))
    r1.local_remove(PROG)
    deliver(r1, upd)
    assert PROG not in r1.lookup()
    assert r1.contents[PROG].value() == "z"


def updateremoveadd(order):
    """r1 holds "ab"; r2 appends "c" while r1 removes and re-adds the file."""
    r1, r2 = ReplicationLayer("r1"), ReplicationLayer("r2")
    setup = r1.local_add(PROG) + r1.local_update(PROG, Insert(0, "ab"))
    deliver(r2, setup)
    at_r2 = r2.local_update(PROG, Insert(2, "c"))
    at_r1 = r1.local_remove(PROG) + r1.local_add(PROG)
    deliver(r1, at_r2)
    deliver(r2, at_r1)
    # a third replica sees everything in the requested order
    r3 = ReplicationLayer("r3")
    deliver(r3, setup)
    for part in (at_r1, at_r2) if order == 0 else (at_r2, at_r1):
        deliver(r3, part)
    return r1.lookup(), r2.lookup(), r3.lookup()


@pytest.mark.parametrize("order", [0, 1])
def test_re_added_file_keeps_the_concurrent_update(order):
    views = updateremoveadd(order)
    assert views[0] == views[1] == views[2] == {PROG: "c"}


def test_concurrent_add_remove_same_key_or_set():
    r1, r2 = ReplicationLayer("r1"), ReplicationLayer("r2")
    deliver(r2, r1.local_add(TOTO))
    rm = r2.local_remove(TOTO)
    add = r1.local_remove(TOTO) + r1.local_add(TOTO)
    deliver(r1, rm)
    deliver(r2, add)
    assert TOTO in r1.lookup() and TOTO in r2.lookup()


@pytest.mark.parametrize("variant", sorted(VARIANTS))
def test_any_relative_order_gives_equal_lookup(variant):
    r1, r2 = ReplicationLayer("r1", variant), ReplicationLayer("r2", variant)
    setup = r1.local_add(PROG) + r1.local_update(PROG, Insert(0, "ab")) + r1.local_add(SONG)
    deliver(r2, setup)
    left = r1.local_update(PROG, Delete(0)) + r1.local_update(SONG, Write(b"v1"))
    right = r2.local_update(PROG, Insert(2, "q"))
    if variant != "g":
        right += r2.local_remove(SONG)
    seen = set()
    for merged in itertools.permutations(range(len(left) + len(right))):
        idx = [i for i in merged if i < len(left)]
        jdx = [i - len(left) for i in merged if i >= len(left)]
        if idx != sorted(idx) or jdx != sorted(jdx):
            continue
        r3 = ReplicationLayer("r3", variant)
        deliver(r3, setup)
        for i in merged:
            r3.apply(left[i] if i < len(left) else right[i - len(left)])
        seen.add(tuple(sorted(r3.lookup().items())))
    assert len(seen) == 1


def test_key_op_dispatch_and_render():
    r1 = ReplicationLayer("r1")
    r1.local(KeyOp("add", PROG))
    r1.local(KeyOp("update", PROG, Insert(0, "hi")))
    assert r1.lookup() == {PROG: "hi"}
    assert KeyOp("update", PROG, Insert(0, "hi")).render() == "update /Toto/prog.c text ins 0 hi"
    r1.local(KeyOp("remove", PROG))
    assert r1.lookup() == {}


def test_file_path_leaf_only_state():
    r1 = ReplicationLayer("r1")
    keys = [
        ElementKey(("directory1", "music.mp3"), B),
        ElementKey(("directory1", "prog.c"), T),
        ElementKey(("directory2", "crdt.java"), T),
    ]
    for k in keys:
        r1.local_add(k)
    assert set(r1.lookup()) == set(keys)
