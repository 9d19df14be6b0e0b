"""Train QRM-SG on the three 6x6 case studies and report convergence episodes.

    python3 scripts/run_case_studies.py --out results/cases
"""
import argparse
from pathlib import Path

from _common import config, save, seeds_arg
from qrmsg.harness import run_experiment

WINDOWS = {"case1": (4000, 20000), "case2": (500, 5000), "case3": (800, 8000)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", nargs="+", default=list(WINDOWS), choices=list(WINDOWS))
    ap.add_argument("--seeds", type=seeds_arg, help="e.g. '0 1 2' (default: from config)")
    ap.add_argument("--episodes", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--full", action="store_true",
                    help="train the whole budget instead of stopping at convergence")
    ap.add_argument("--out", type=Path, default=Path("results/cases"))
    args = ap.parse_args()

    for case in args.cases:
        cfg = config(case, seeds=args.seeds, episodes=args.episodes,
                     stop_on_convergence=not args.full)
        result = run_experiment(cfg, args.workers)
        save(result, args.out, case)
        lo, hi = WINDOWS[case]
        hits = sum(c is not None and lo <= c <= hi for c in result.convergence.values())
        print(f"== {case}: expected window [{lo}, {hi}]")
        print(result.summary())
        print(f"   seeds converging inside the window: {hits}/{len(result.seeds)}")


if __name__ == "__main__":
    main()
