"""Deterministic multi-replica simulator over a causal-broadcast bus.

Every replication message travels in its own envelope stamped with the
sender's vector clock.  An envelope is delivered to each peer exactly once
and only when causally ready.  Schedules are either explicit, drawn from a
seeded RNG, or enumerated exhaustively.
"""

from __future__ import annotations

import pickle
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .clocks import VectorClock, vc_deliverable, vc_encode
from .errors import ContractViolation, StuckScheduleError, UsageError
from .fs_model import FsOp, Path, render_path
from .hierarchy_layer import HierarchyConfig
from .naming_layer import NamingConfig
from .replication_layer import ReplMsg
from .stack import FsStack


@dataclass(frozen=True, eq=False)
class Envelope:
    eid: int
    sender: str
    deps: Tuple[Tuple[str, int], ...]
    msg: ReplMsg
    vclock: VectorClock = field(init=False, repr=False)
    # entries of ``deps`` other than the sender's own sequence number
    foreign: Tuple[Tuple[str, int], ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vclock", dict(self.deps))
        object.__setattr__(self, "foreign", tuple(d for d in self.deps if d[0] != self.sender))

    def encode(self) -> str:
        return f"#{self.eid} from={self.sender} deps={vc_encode(self.vclock)} {self.msg.encode()}"


@dataclass
class Replica:
    rid: str
    stack: FsStack
    vclock: VectorClock = field(default_factory=dict)
    delivered: set = field(default_factory=set)

    def deliver(self, env: Envelope) -> None:
        if env.eid in self.delivered:
            raise ContractViolation(f"envelope #{env.eid} delivered twice to {self.rid}")
        if not vc_deliverable(env.vclock, env.sender, self.vclock):
            raise ContractViolation(f"envelope #{env.eid} not causally ready at {self.rid}")
        self.stack.apply(env.msg)
        self.vclock[env.sender] = env.vclock[env.sender]
        self.delivered.add(env.eid)


@dataclass(frozen=True)
class ClusterConfig:
    variant: str = "or"
    hierarchy: HierarchyConfig = HierarchyConfig()
    naming: NamingConfig = NamingConfig()


class Cluster:
    def __init__(self, n: int, cfg: ClusterConfig = ClusterConfig(), check_views: bool = False):
        if n < 1:
            raise ValueError("a cluster needs at least one replica")
        self.cfg = cfg
        self.check_views = check_views
        self.ids = [f"r{i}" for i in range(1, n + 1)]
        self.replicas: Dict[str, Replica] = {
            rid: Replica(rid, FsStack(rid, cfg.variant, cfg.hierarchy, cfg.naming)) for rid in self.ids
        }
        # receiver -> sender -> envelopes in send order; causal delivery implies
        # per-sender FIFO, so only queue heads are ever deliverable
        self.queues: Dict[str, Dict[str, List[Envelope]]] = {
            rid: {s: [] for s in self.ids if s != rid} for rid in self.ids
        }
        self.view_mismatches: List[str] = []
        self._events: List[tuple] = []
        self._next_eid = 1

    def __getitem__(self, rid: str) -> Replica:
        return self.replicas[rid]

    def clone(self) -> "Cluster":
        return pickle.loads(self.snapshot())

    def snapshot(self) -> bytes:
        """Frozen copy; :func:`restore` it once per schedule to avoid re-serializing."""
        return pickle.dumps(self, protocol=pickle.HIGHEST_PROTOCOL)

    @property
    def pending(self) -> Dict[str, List[Envelope]]:
        return {
            rid: sorted((e for q in self.queues[rid].values() for e in q), key=lambda e: e.eid)
            for rid in self.ids
        }

    @property
    def trace(self) -> List[str]:
        """Event log: ``LOCAL <rid> <op>`` and ``DELIVER <rid> <envelope>`` lines."""
        return [f"{kind} {rid} {obj if isinstance(obj, str) else obj.encode()}"
                for kind, rid, obj in self._events]

    # -- local activity -----------------------------------------------------------

    def local(self, rid: str, op: FsOp) -> List[Envelope]:
        """Run ``op`` at ``rid``; a rejected op raises and enqueues nothing."""
        msgs = self.replicas[rid].stack.local(op)
        self._events.append(("LOCAL", rid, op.render()))
        return self._broadcast(rid, msgs)

    def resolve(self, rid: str, directory: Path, name: str, origin: Optional[Path] = None,
                ftype=None) -> List[Envelope]:
        msgs = self.replicas[rid].stack.resolve(directory, name, origin, ftype)
        what = "merge" if origin is None else "choose " + render_path(origin)
        self._events.append(("LOCAL", rid, f"resolve {render_path(directory)} {name} {what}"))
        return self._broadcast(rid, msgs)

    def _broadcast(self, rid: str, msgs: Sequence[ReplMsg]) -> List[Envelope]:
        rep = self.replicas[rid]
        out = []
        for m in msgs:
            rep.vclock[rid] = rep.vclock.get(rid, 0) + 1
            env = Envelope(self._next_eid, rid, tuple(sorted(rep.vclock.items())), m)
            self._next_eid += 1
            rep.delivered.add(env.eid)
            for peer in self.ids:
                if peer != rid:
                    self.queues[peer][rid].append(env)
            out.append(env)
        self._after_change(rid)
        return out

    # -- delivery -------------------------------------------------------------------

    def deliverable(self) -> List[Tuple[str, Envelope]]:
        # a queue head always carries the next sequence number of its sender,
        # so only the foreign dependencies need checking
        out = []
        for rid in self.ids:
            vc = self.replicas[rid].vclock
            for q in self.queues[rid].values():
                if q:
                    env = q[0]
                    for k, v in env.foreign:
                        if v > vc.get(k, 0):
                            break
                    else:
                        out.append((rid, env))
        return out

    def undelivered(self) -> int:
        return sum(len(q) for qs in self.queues.values() for q in qs.values())

    def deliver(self, rid: str, env: Envelope) -> None:
        q = self.queues[rid].get(env.sender)
        if not q or q[0] is not env:
            raise ContractViolation(f"envelope #{env.eid} is not next from {env.sender} at {rid}")
        self.replicas[rid].deliver(env)
        q.pop(0)
        self._events.append(("DELIVER", rid, env))
        self._after_change(rid)

    def deliver_by_id(self, rid: str, eid: int) -> None:
        for q in self.queues[rid].values():
            for env in q:
                if env.eid == eid:
                    return self.deliver(rid, env)
        raise UsageError(f"envelope #{eid} is not pending at {rid}")

    def _after_change(self, rid: str) -> None:
        if self.check_views:
            problem = self.replicas[rid].stack.check_views()
            if problem is not None:
                self.view_mismatches.append(f"{rid}: {problem}")

    def step(self, rng: random.Random) -> bool:
        choices = self.deliverable()
        if not choices:
            if self.undelivered():
                raise StuckScheduleError(f"{self.undelivered()} envelopes pending, none deliverable")
            return False
        self.deliver(*rng.choice(choices))
        return True

    def run(self, schedule: Union[int, random.Random, Sequence[Tuple[str, int]], None] = 0,
            limit: Optional[int] = None) -> "Cluster":
        """Deliver pending envelopes.

        ``schedule`` is a seed, an RNG, or an explicit list of
        ``(receiver, envelope id)`` decisions.  ``limit`` caps the number of
        seeded deliveries; otherwise the bus is drained.
        """
        if isinstance(schedule, (list, tuple)):
            for rid, eid in schedule:
                self.deliver_by_id(rid, eid)
            return self
        rng = schedule if isinstance(schedule, random.Random) else random.Random(schedule)
        count = 0
        while (limit is None or count < limit) and self.step(rng):
            count += 1
        return self

    def run_threaded(self, seed: int = 0) -> "Cluster":
        """Seeded run with each replica's deliveries executed on its own thread.

        Decisions are still drawn on the calling thread and every delivery is
        awaited before the next, so the outcome equals :meth:`run`.
        """
        rng = random.Random(seed)
        pools = {rid: ThreadPoolExecutor(max_workers=1) for rid in self.ids}
        try:
            while True:
                choices = self.deliverable()
                if not choices:
                    if self.undelivered():
                        raise StuckScheduleError("no deliverable envelope")
                    break
                rid, env = rng.choice(choices)
                pools[rid].submit(self.deliver, rid, env).result()
        finally:
            for p in pools.values():
                p.shutdown()
        return self

    # -- observation ----------------------------------------------------------------

    def dumps(self, fmt: str = "tree") -> Dict[str, str]:
        return {rid: self.replicas[rid].stack.dump(fmt) for rid in self.ids}

    def converged(self) -> Tuple[bool, str]:
        """Whether all naming-layer dumps agree; the report names the first divergent path."""
        if self.undelivered():
            raise UsageError("converged() requires an empty bus")
        return compare_dumps(self.dumps("flat"))


def compare_dumps(flat: Dict[str, str]) -> Tuple[bool, str]:
    ids = list(flat)
    base = flat[ids[0]]
    for rid in ids[1:]:
        if flat[rid] == base:
            continue
        a, b = base.splitlines(), flat[rid].splitlines()
        for i in range(max(len(a), len(b))):
            la = a[i] if i < len(a) else "<none>"
            lb = b[i] if i < len(b) else "<none>"
            if la != lb:
                path = min(la, lb).split(" ", 1)[0]
                return False, f"{ids[0]} and {rid} diverge at {path}: {la!r} vs {lb!r}"
    return True, "converged"


def restore(frozen: bytes) -> Cluster:
    return pickle.loads(frozen)


def spawn(n: int, cfg: ClusterConfig = ClusterConfig(), **kw) -> Cluster:
    return Cluster(n, cfg, **kw)


def all_schedules(cluster: Cluster) -> Iterator[List[Tuple[str, int]]]:
    """Every causally valid delivery order of the pending envelopes."""
    queues = {rid: {s: list(q) for s, q in qs.items()} for rid, qs in cluster.queues.items()}
    clocks = {rid: dict(cluster.replicas[rid].vclock) for rid in cluster.ids}
    prefix: List[Tuple[str, int]] = []

    def rec() -> Iterator[List[Tuple[str, int]]]:
        progressed = False
        for rid in cluster.ids:
            for sender, q in queues[rid].items():
                if not q or not vc_deliverable(q[0].vclock, sender, clocks[rid]):
                    continue
                progressed = True
                env = q.pop(0)
                old = clocks[rid].get(sender, 0)
                clocks[rid][sender] = env.vclock[sender]
                prefix.append((rid, env.eid))
                yield from rec()
                prefix.pop()
                clocks[rid][sender] = old
                q.insert(0, env)
        if not progressed:
            if any(q for qs in queues.values() for q in qs.values()):
                raise StuckScheduleError("enumeration reached a dead end")
            yield list(prefix)

    return rec()


def explore(cluster: Cluster, limit: int = 6) -> Iterator[Cluster]:
    """Run every interleaving (the bus must hold at most ``limit`` envelopes)."""
    envelopes = {env.eid for qs in cluster.queues.values() for q in qs.values() for env in q}
    if len(envelopes) > limit:
        raise UsageError(f"{len(envelopes)} envelopes exceed the exhaustive cap of {limit}")
    frozen = cluster.snapshot()
    for sched in all_schedules(cluster):
        c = restore(frozen)
        c.run(sched)
        yield c
