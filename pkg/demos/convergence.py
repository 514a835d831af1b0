"""Random workloads under every configuration, each replayed over many schedules."""

import sys

from crdtfs.sim_harness import restore
from crdtfs.workload import all_configs, random_run

if __name__ == "__main__":
    scenarios = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    schedules = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    for cfg in all_configs():
        bad = 0
        for s in range(scenarios):
            frozen = random_run(cfg, s).snapshot()
            bad += sum(not restore(frozen).run(k).converged()[0] for k in range(schedules))
        label = f"{cfg.variant:>3} {cfg.hierarchy.mode:<9} {cfg.naming.method}"
        print(f"{label}: {scenarios * schedules} runs, {bad} diverged")
