"""Case study I under four exploration schedules: 0.05, 0.25, 0.90 and 0.90 decaying to 0.05.

    python3 scripts/run_epsilon_study.py --seeds "0 1 2"
"""
import argparse
from pathlib import Path

from _common import config, save, seeds_arg
from qrmsg.harness import epsilon_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=seeds_arg, default=[0, 1, 2])
    ap.add_argument("--episodes", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/epsilon"))
    args = ap.parse_args()

    base = config("case1", seeds=args.seeds, episodes=args.episodes, stop_on_convergence=True)
    runs = epsilon_study(base, args.workers)
    for name, result in runs.items():
        save(result, args.out, f"eps_{name}")
    print("convergence episode by seed (None = not reached)")
    for name, result in runs.items():
        print(f"  epsilon {name:>5}: {result.convergence}")


if __name__ == "__main__":
    main()
