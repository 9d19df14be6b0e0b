"""Case study I task on the 12x12 map, checking value bounds along the way.

    python3 scripts/run_large_grid.py --episodes 2000
"""
import argparse
import random
from pathlib import Path

from _common import config, save
from qrmsg.analysis import q_bounds, stores_within
from qrmsg.baselines import make_learner
from qrmsg.harness import ExperimentResult, SeedResult, convergence_episode


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--chunk", type=int, default=400, help="episodes between bound checks")
    ap.add_argument("--out", type=Path, default=Path("results/large"))
    args = ap.parse_args()

    cfg = config("large12", seeds=[args.seed], episodes=args.episodes)
    learner = make_learner(cfg.algorithm, cfg.build_env(), cfg.learn_params())
    lo, hi = q_bounds(1.0, cfg.gamma)
    rng, curve = random.Random(args.seed), []
    while learner.episodes_done < args.episodes:
        n = min(args.chunk, args.episodes - learner.episodes_done)
        curve += learner.train(n, rng, cfg.eval_every, cfg.eval_episodes,
                               lambda ep: random.Random((args.seed << 32) ^ ep))
        ok = stores_within(learner.stores, lo, hi) and learner.stores_agree()
        print(f"episode {learner.episodes_done}: {len(learner.stores[0])} keys, "
              f"last eval ego {curve[-1].ego:.2f} adv {curve[-1].adv:.2f}, "
              f"invariants {'hold' if ok else 'VIOLATED'}")
        if not ok:
            raise SystemExit(2)
    eps, ego = [c.episode for c in curve], [c.ego for c in curve]
    res = SeedResult(args.seed, eps, ego, [c.adv for c in curve],
                     convergence_episode(ego, eps), learner.episodes_done)
    save(ExperimentResult(cfg, [res]), args.out, "large12")


if __name__ == "__main__":
    main()
