"""Compare QRM-SG with Nash-Q (location keys) and Nash-QAS (location plus event bits).

Nash-Q runs on case study II, Nash-QAS on case study I, each against QRM-SG
with the same seeds and episode budget.

    python3 scripts/run_baselines.py --seeds "0 1 2"
"""
import argparse
from pathlib import Path

from _common import config, save, seeds_arg
from qrmsg.baselines import NASH_Q, NASH_QAS, QRM_SG
from qrmsg.harness import run_experiment

PAIRS = (("case2", NASH_Q), ("case1", NASH_QAS))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=seeds_arg, default=[0, 1, 2])
    ap.add_argument("--episodes", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/baselines"))
    args = ap.parse_args()

    for case, baseline in PAIRS:
        for algo in (QRM_SG, baseline):
            cfg = config(case, seeds=args.seeds, episodes=args.episodes, algorithm=algo)
            result = run_experiment(cfg, args.workers)
            save(result, args.out, f"{case}_{algo}")
            best = {r.seed: max(r.ego, default=0.0) for r in result.seeds}
            print(f"== {case} / {algo}")
            print(result.summary())
            print(f"   best single checkpoint per seed: {best}")


if __name__ == "__main__":
    main()
