import pytest
from hypothesis import given
from hypothesis import strategies as st

from crdtfs.errors import NotFoundError, PathError, PreconditionError
from crdtfs.fs_model import (
    ROOT,
    AddOp,
    ConflictKind,
    Delete,
    FileType,
    Insert,
    RemoveOp,
    UpdateOp,
    Write,
    apply_edit,
    apply_post,
    check_pre,
    classify_conflict,
    content_at,
    dump_flat,
    dump_tree,
    exists,
    new_tree,
    parse_path,
    render_path,
    type_at,
    violated_clause,
    violated_post,
)

D, T, B = FileType.DIRECTORY, FileType.TEXT, FileType.BINARY


def build(*ops):
    tree = new_tree()
    for op in ops:
        tree = apply_post(op, tree)
    return tree


def file_path_tree():
    # /directory1/{music.mp3, prog.c}, /directory2/crdt.java
    return build(
        AddOp(ROOT, "directory1", D),
        AddOp(("directory1",), "music.mp3", B),
        AddOp(("directory1",), "prog.c", T),
        UpdateOp(("directory1", "prog.c"), Insert(0, "int x;")),
        AddOp(ROOT, "directory2", D),
        AddOp(("directory2",), "crdt.java", T),
    )


def test_parse_and_render_paths():
    assert parse_path("/") == ROOT
    assert parse_path("/Toto/prog.c") == ("Toto", "prog.c")
    assert render_path(("a", "b")) == "/a/b"
    assert render_path(ROOT) == "/"


@pytest.mark.parametrize("text,pos", [("Toto", 0), ("/a//b", 3), ("/a/", 3)])
def test_parse_path_errors_carry_position(text, pos):
    with pytest.raises(PathError) as err:
        parse_path(text)
    assert err.value.position == pos


segment = st.text(alphabet="abcxyz.-_0", min_size=1, max_size=5)


@given(st.lists(segment, max_size=5))
def test_path_round_trip(segments):
    path = tuple(segments)
    assert parse_path(render_path(path)) == path


def test_lookups_on_sample_tree():
    tree = file_path_tree()
    assert exists(("directory1", "prog.c"), tree)
    assert not exists(("directory1", "nope"), tree)
    assert not exists(("directory1", "prog.c", "deeper"), tree)
    assert content_at(("directory1", "prog.c"), tree) == "int x;"
    assert type_at(("directory1", "music.mp3"), tree) is B
    assert content_at(("directory1", "music.mp3"), tree) == b""
    with pytest.raises(NotFoundError):
        content_at(("missing",), tree)


def test_conflict_classification():
    add = AddOp(("Toto",), "prog.c", T)
    rm_toto = RemoveOp(("Toto",))
    assert classify_conflict(add, rm_toto) is ConflictKind.ADD_REMOVE_ANCESTOR
    assert classify_conflict(rm_toto, add) is ConflictKind.ADD_REMOVE_ANCESTOR
    assert classify_conflict(add, RemoveOp(("Toto", "prog.c"))) is ConflictKind.ADD_REMOVE_SAME
    assert classify_conflict(AddOp(("Toto",), "file", T), AddOp(("Toto",), "file", T)) is ConflictKind.ADD_ADD_NAME
    upd = UpdateOp(("Toto", "f"), Insert(0, "a"))
    assert classify_conflict(upd, rm_toto) is ConflictKind.UPDATE_REMOVE_ANCESTOR
    assert classify_conflict(upd, RemoveOp(("Toto", "f"))) is ConflictKind.UPDATE_REMOVE_ANCESTOR
    assert classify_conflict(AddOp(ROOT, "a", D), AddOp(ROOT, "b", D)) is ConflictKind.NONE
    assert classify_conflict(upd, upd) is ConflictKind.NONE


path_st = st.lists(st.sampled_from(["a", "b"]), max_size=3).map(tuple)
op_st = st.one_of(
    st.builds(AddOp, path_st, st.sampled_from(["a", "b"]), st.sampled_from(list(FileType))),
    st.builds(RemoveOp, path_st),
    st.builds(UpdateOp, path_st, st.just(Insert(0, "x"))),
)


@given(op_st, op_st)
def test_classification_is_symmetric(a, b):
    assert classify_conflict(a, b) is classify_conflict(b, a)


def test_preconditions_name_the_failing_clause():
    tree = file_path_tree()
    assert violated_clause(AddOp(("nope",), "x", T), tree) == "exists(p, S)"
    assert violated_clause(AddOp(("directory1", "prog.c"), "x", T), tree) == "type(content(p, S)) = directory"
    assert violated_clause(AddOp(("directory1",), "prog.c", B), tree) == "not exists(p.n, S)"
    assert violated_clause(RemoveOp(ROOT), tree) == "p is not the root"
    assert violated_clause(UpdateOp(("directory1",), Insert(0, "a")), tree) == "u applicable on type(content(p, S))"
    assert violated_clause(UpdateOp(("directory1", "prog.c"), Delete(99)), tree) == "u applicable on content(p, S)"
    with pytest.raises(PreconditionError):
        apply_post(RemoveOp(("ghost",)), tree)


def test_postconditions_hold_for_apply_post():
    tree = file_path_tree()
    for op in (
        AddOp(("directory2",), "new.txt", T),
        RemoveOp(("directory1",)),
        UpdateOp(("directory1", "prog.c"), Delete(0)),
        UpdateOp(("directory1", "music.mp3"), Write(b"\x01")),
    ):
        assert check_pre(op, tree)
        after = apply_post(op, tree)
        assert violated_post(op, tree, after) == []
    # the input is untouched
    assert exists(("directory1",), tree)


def test_violated_post_detects_wrong_result():
    tree = file_path_tree()
    op = RemoveOp(("directory1",))
    assert violated_post(op, tree, tree) == ["not exists(p, S)"]


@given(st.text(alphabet="ab", max_size=6), st.data())
def test_sequential_edit_semantics(text, data):
    i = data.draw(st.integers(0, len(text)))
    assert apply_edit(text, Insert(i, "z")) == text[:i] + "z" + text[i:]
    if text:
        j = data.draw(st.integers(0, len(text) - 1))
        assert apply_edit(text, Delete(j)) == text[:j] + text[j + 1:]


def test_dumps_are_byte_stable():
    tree = file_path_tree()
    assert dump_tree(tree) == (
        "/ [directory]\n"
        "  directory1 [directory]\n"
        "    music.mp3 [binary] = 0x\n"
        '    prog.c [text] = "int x;"\n'
        "  directory2 [directory]\n"
        '    crdt.java [text] = ""\n'
    )
    assert dump_flat(tree) == (
        "/directory1 [directory]\n"
        "/directory1/music.mp3 [binary] = 0x\n"
        '/directory1/prog.c [text] = "int x;"\n'
        "/directory2 [directory]\n"
        '/directory2/crdt.java [text] = ""\n'
    )
    assert dump_flat(new_tree()) == ""
