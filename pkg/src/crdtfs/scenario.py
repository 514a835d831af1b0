"""Plain-text scenario scripts for the replay tool.

A script is a header followed by commands, one per line, ``#`` starts a
comment::

    replicas 2
    set or
    policy compact
    naming rename by-origin
    seed 7
    local r1 add /Toto/prog.c text
    local r2 rmv /Toto
    sync
    assert-converged
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Union

from .errors import CrdtfsError, PathError
from .fs_model import (
    AddOp,
    Delete,
    FileType,
    FsOp,
    Insert,
    Path,
    RemoveOp,
    UpdateOp,
    Write,
    parse_path,
    render_path,
)
from .hierarchy_layer import MODES, HierarchyConfig
from .naming_layer import AVOID, BY_ORIGIN, BY_TYPE, RENAME, NamingConfig
from .set_crdts import VARIANTS
from .sim_harness import ClusterConfig


class ScenarioError(CrdtfsError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


TYPE_WORDS = {"directory": FileType.DIRECTORY, "dir": FileType.DIRECTORY,
              "text": FileType.TEXT, "binary": FileType.BINARY}
DECORATOR_WORDS = {"by-origin": BY_ORIGIN, "by-type": BY_TYPE}
HEADER_KEYS = ("replicas", "set", "policy", "evaluation", "naming", "seed")


@dataclass
class Header:
    replicas: int = 2
    variant: str = "or"
    policy: str = "compact"
    incremental: bool = True
    naming: str = RENAME
    decorator: str = BY_ORIGIN
    seed: int = 0

    def cluster_config(self) -> ClusterConfig:
        return ClusterConfig(
            self.variant,
            HierarchyConfig(self.policy, self.incremental),
            NamingConfig(self.naming, self.decorator),
        )


@dataclass(frozen=True)
class Local:
    rid: str
    op: FsOp
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Deliver:
    count: Optional[int]  # None delivers everything
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Sync:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Dump:
    rid: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AssertConverged:
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Resolve:
    rid: str
    directory: Path
    name: str
    origin: Optional[Path]  # None merges
    ftype: Optional[FileType] = None
    line: int = field(default=0, compare=False)


Command = Union[Local, Deliver, Sync, Dump, AssertConverged, Resolve]


@dataclass
class Scenario:
    header: Header = field(default_factory=Header)
    commands: List[Command] = field(default_factory=list)


def _int(word: str, what: str, lineno: int, minimum: int = 0) -> int:
    try:
        value = int(word)
    except ValueError:
        raise ScenarioError(lineno, f"{what} must be an integer, got {word!r}") from None
    if value < minimum:
        raise ScenarioError(lineno, f"{what} must be >= {minimum}, got {value}")
    return value


def _path(word: str, lineno: int) -> Path:
    try:
        return parse_path(word)
    except PathError as exc:
        raise ScenarioError(lineno, str(exc)) from None


def parse_op_literal(text: str, lineno: int = 0) -> FsOp:
    words = text.split(maxsplit=2)
    if len(words) < 2:
        raise ScenarioError(lineno, f"bad op literal {text!r}")
    verb, path = words[0], _path(words[1], lineno)
    rest = words[2] if len(words) > 2 else ""
    if verb == "add":
        if not path:
            raise ScenarioError(lineno, "cannot add the root")
        ftype = TYPE_WORDS.get(rest.strip())
        if ftype is None:
            raise ScenarioError(lineno, f"unknown type {rest.strip()!r}")
        return AddOp(path[:-1], path[-1], ftype)
    if verb == "rmv":
        if rest.strip():
            raise ScenarioError(lineno, f"unexpected {rest!r} after rmv path")
        return RemoveOp(path)
    if verb == "upd":
        return UpdateOp(path, parse_edit(rest, lineno))
    raise ScenarioError(lineno, f"unknown op {verb!r}")


def parse_edit(text: str, lineno: int = 0):
    kind, _, rest = text.partition(" ")
    if kind == "ins":
        idx, _, chars = rest.partition(" ")
        if not chars:
            raise ScenarioError(lineno, "ins needs an index and text")
        return Insert(_int(idx, "insert index", lineno), chars)
    if kind == "del":
        return Delete(_int(rest.strip(), "delete index", lineno))
    if kind == "write":
        return Write(rest.encode("utf-8"))
    raise ScenarioError(lineno, f"unknown edit {kind!r}")


def _strip_comment(raw: str) -> str:
    line = raw.strip()
    if line.startswith("#"):
        return ""
    cut = line.find(" #")
    return line[:cut].rstrip() if cut >= 0 else line


def parse_scenario(text: str) -> Scenario:
    scn = Scenario()
    seen_command = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head in HEADER_KEYS:
            if seen_command:
                raise ScenarioError(lineno, f"header line {head!r} after commands")
            _parse_header(scn.header, words, lineno)
            continue
        seen_command = True
        scn.commands.append(_parse_command(scn.header, line, words, lineno))
    return scn


def _parse_header(h: Header, words: List[str], lineno: int) -> None:
    key, args = words[0], words[1:]
    if not args:
        raise ScenarioError(lineno, f"{key} needs a value")
    if key == "replicas":
        h.replicas = _int(args[0], "replica count", lineno, 1)
    elif key == "set":
        if args[0] not in VARIANTS:
            raise ScenarioError(lineno, f"unknown set variant {args[0]!r}")
        h.variant = args[0]
    elif key == "policy":
        mode = args[0].replace("-", "_")
        if mode not in MODES:
            raise ScenarioError(lineno, f"unknown policy {args[0]!r}")
        h.policy = mode
    elif key == "evaluation":
        if args[0] not in ("incremental", "non_incremental", "non-incremental"):
            raise ScenarioError(lineno, f"unknown evaluation {args[0]!r}")
        h.incremental = args[0] == "incremental"
    elif key == "naming":
        if args[0] == AVOID:
            h.naming = AVOID
        elif args[0] == RENAME:
            h.naming = RENAME
            if len(args) > 1:
                if args[1] not in DECORATOR_WORDS:
                    raise ScenarioError(lineno, f"unknown decorator {args[1]!r}")
                h.decorator = DECORATOR_WORDS[args[1]]
        else:
            raise ScenarioError(lineno, f"unknown naming method {args[0]!r}")
    elif key == "seed":
        h.seed = _int(args[0], "seed", lineno)


def _rid(h: Header, word: str, lineno: int) -> str:
    if not word.startswith("r") or not word[1:].isdigit() or not 1 <= int(word[1:]) <= h.replicas:
        raise ScenarioError(lineno, f"replica {word!r} out of range r1..r{h.replicas}")
    return word


def _parse_command(h: Header, line: str, words: List[str], lineno: int) -> Command:
    head = words[0]
    if head == "local":
        if len(words) < 3:
            raise ScenarioError(lineno, "local needs a replica and an op")
        rid = _rid(h, words[1], lineno)
        literal = line.split(maxsplit=2)[2]
        return Local(rid, parse_op_literal(literal, lineno), lineno)
    if head == "deliver":
        if len(words) != 2:
            raise ScenarioError(lineno, "deliver needs a count or 'all'")
        if words[1] == "all":
            return Deliver(None, lineno)
        return Deliver(_int(words[1], "deliver count", lineno), lineno)
    if head == "sync" and len(words) == 1:
        return Sync(lineno)
    if head == "dump" and len(words) == 2:
        return Dump(_rid(h, words[1], lineno), lineno)
    if head == "assert-converged" and len(words) == 1:
        return AssertConverged(lineno)
    if head == "resolve":
        if len(words) < 5:
            raise ScenarioError(lineno, "resolve needs: rid dir name choose <origin> [type] | merge")
        rid, directory, name = _rid(h, words[1], lineno), _path(words[2], lineno), words[3]
        if words[4] == "merge" and len(words) == 5:
            return Resolve(rid, directory, name, None, None, lineno)
        if words[4] == "choose" and len(words) in (6, 7):
            ftype = None
            if len(words) == 7:
                ftype = TYPE_WORDS.get(words[6])
                if ftype is None:
                    raise ScenarioError(lineno, f"unknown type {words[6]!r}")
            return Resolve(rid, directory, name, _path(words[5], lineno), ftype, lineno)
        raise ScenarioError(lineno, "resolve decision must be 'choose <origin> [type]' or 'merge'")
    raise ScenarioError(lineno, f"unknown command {line!r}")


def render_scenario(scn: Scenario) -> str:
    h = scn.header
    lines = [f"replicas {h.replicas}", f"set {h.variant}", f"policy {h.policy}",
             f"evaluation {'incremental' if h.incremental else 'non_incremental'}"]
    if h.naming == AVOID:
        lines.append("naming avoid")
    else:
        deco = {v: k for k, v in DECORATOR_WORDS.items()}[h.decorator]
        lines.append(f"naming rename {deco}")
    lines.append(f"seed {h.seed}")
    for c in scn.commands:
        lines.append(render_command(c))
    return "\n".join(lines) + "\n"


def render_command(c: Command) -> str:
    if isinstance(c, Local):
        return f"local {c.rid} {c.op.render()}"
    if isinstance(c, Deliver):
        return "deliver all" if c.count is None else f"deliver {c.count}"
    if isinstance(c, Sync):
        return "sync"
    if isinstance(c, Dump):
        return f"dump {c.rid}"
    if isinstance(c, AssertConverged):
        return "assert-converged"
    if c.origin is None:
        return f"resolve {c.rid} {render_path(c.directory)} {c.name} merge"
    s = f"resolve {c.rid} {render_path(c.directory)} {c.name} choose {render_path(c.origin)}"
    return s + (f" {c.ftype.value}" if c.ftype is not None else "")
