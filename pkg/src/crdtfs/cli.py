"""Scenario replay tool.

Exit status: 0 when every ``assert-converged`` held and no command failed,
1 on an assertion or command failure, 2 on a usage or parse error.
"""

from __future__ import annotations

import argparse
import random
import sys
from typing import List, Optional, TextIO

from .errors import CrdtfsError
from .scenario import (
    AssertConverged,
    Deliver,
    Dump,
    Local,
    Resolve,
    Scenario,
    ScenarioError,
    Sync,
    parse_scenario,
    render_command,
)
from .sim_harness import Cluster, compare_dumps


def execute(scn: Scenario, seed: Optional[int] = None, trace: bool = False, oracle: bool = False,
            dump_format: str = "tree", out: Optional[TextIO] = None) -> int:
    out = sys.stdout if out is None else out
    h = scn.header
    try:
        cluster = Cluster(h.replicas, h.cluster_config(), check_views=oracle)
    except ValueError as exc:
        print(f"error: {exc}", file=out)
        return 2
    rng = random.Random(h.seed if seed is None else seed)
    failed = False
    shown = 0
    for cmd in scn.commands:
        try:
            if isinstance(cmd, Local):
                cluster.local(cmd.rid, cmd.op)
            elif isinstance(cmd, Deliver):
                cluster.run(rng, limit=cmd.count)
            elif isinstance(cmd, Sync):
                cluster.run(rng)
            elif isinstance(cmd, Dump):
                out.write(f"== {cmd.rid} ==\n")
                out.write(cluster.replicas[cmd.rid].stack.dump(dump_format))
            elif isinstance(cmd, AssertConverged):
                ok, report = compare_dumps(cluster.dumps("flat"))
                if ok:
                    print(f"line {cmd.line}: assert-converged: ok", file=out)
                else:
                    failed = True
                    pending = cluster.undelivered()
                    extra = f" ({pending} deliveries pending)" if pending else ""
                    print(f"line {cmd.line}: assert-converged: FAILED: {report}{extra}", file=out)
            elif isinstance(cmd, Resolve):
                cluster.resolve(cmd.rid, cmd.directory, cmd.name, cmd.origin, cmd.ftype)
        except CrdtfsError as exc:
            failed = True
            print(f"line {cmd.line}: error in '{render_command(cmd)}': {exc}", file=out)
        if trace:
            for event in cluster.trace[shown:]:
                print(event, file=out)
            shown = len(cluster.trace)
    if oracle:
        if cluster.view_mismatches:
            failed = True
            print(f"oracle: mismatch ({len(cluster.view_mismatches)})", file=out)
            for m in cluster.view_mismatches[:10]:
                print(f"  {m}", file=out)
        else:
            print("oracle: match", file=out)
    return 1 if failed else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="crdtfs-replay", description=__doc__.splitlines()[0])
    parser.add_argument("--scenario", required=True, help="scenario script to replay")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--trace", action="store_true", help="print LOCAL/DELIVER events")
    parser.add_argument("--oracle", action="store_true",
                        help="check incremental views against full recomputation after every step")
    parser.add_argument("--dump-format", choices=("tree", "flat"), default="tree")
    args = parser.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must fit in an unsigned 64-bit integer")
    try:
        with open(args.scenario, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        scn = parse_scenario(text)
    except ScenarioError as exc:
        print(f"{args.scenario}:{exc}", file=sys.stderr)
        return 2
    return execute(scn, args.seed, args.trace, args.oracle, args.dump_format)


if __name__ == "__main__":
    sys.exit(main())
