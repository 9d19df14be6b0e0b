"""Numerical checks of the convergence argument: product-game Markov equivalence,
the contraction inequality, and the fixed point on a small zero-sum game.

    python3 scripts/check_theory.py --trials 10000
"""
import argparse
import random
import sys

import numpy as np

from _common import config
from qrmsg.analysis import (FAMILIES, contraction_probe, fixed_point_gap, matching_game,
                            nash_value_iteration)
from qrmsg.sgrm import check_markovian_equivalence

def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--trajectories", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ok = True

    for case in ("case1", "case2", "case3"):
        env = config(case).build_env()
        rep = check_markovian_equivalence(env.game, env.rm_ego, env.rm_adv,
                                          args.trajectories, 100, random.Random(args.seed))
        ok &= rep.ok
        print(f"markov equivalence {case}: {rep.divergences} divergences "
              f"over {rep.n_trajectories} trajectories")

    rng = np.random.default_rng(args.seed)
    for family, dims in zip(FAMILIES, ((4, 4), (3, 3))):
        rep = contraction_probe(args.trials, family, dims, rng)
        ok &= rep.max_violation <= 1e-9
        print(f"contraction {family} {dims[0]}x{dims[1]}: max violation {rep.max_violation:.2e}")

    product = matching_game()
    vi = nash_value_iteration(product, gamma=0.9, tol=1e-10)
    gap = fixed_point_gap(product, vi.store(), 0.9, 4000, random.Random(args.seed))
    ok &= gap.distance <= 0.05
    print(f"fixed point: {len(vi.states)} augmented states, value iteration residual "
          f"{vi.residual:.1e}, largest |E[F q*] - q*| = {gap.distance:.4f}")
    print("all checks passed" if ok else "SOME CHECKS FAILED")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
