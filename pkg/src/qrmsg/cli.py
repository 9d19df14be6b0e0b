"""Command-line entry point: ``qrmsg {train,eval,solve-game,check-theory,validate}``.

Exit codes: 0 success, 1 validation error (bad input files or arguments),
2 runtime failure (including a failed theory check).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .baselines import ALGORITHMS
from .equilibrium import (LemkeHowsonError, classify_point, lemke_howson, nash_value,
                          parse_matrix_game, solve_stage_game)
from .gridworld import MapError, load_map_file
from .harness import (ConfigError, convergence_episode, curves_by_seed, emit_csv,
                      emit_plotdata, load_config, read_csv, run_experiment, smooth)
from .reward_machine import RMError, load_rm

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Invalid(Exception):
    pass


def _cmd_train(args) -> int:
    cfg = load_config(args.config, seeds=[args.seed] if args.seed is not None else None,
                      episodes=args.episodes, algorithm=args.algo)
    if args.stop_on_convergence:
        cfg = cfg.replace(stop_on_convergence=True)
    result = run_experiment(cfg, workers=args.workers)
    print(result.summary())
    if args.out:
        emit_csv(result.points, args.out)
    if args.plotdata:
        emit_plotdata(result.points, args.plotdata, cfg.smoothing_window)
    return EXIT_OK


def _cmd_eval(args) -> int:
    """Summarize a curve CSV written by ``train``."""
    try:
        points = read_csv(args.csv)
    except (OSError, ValueError) as exc:
        raise _Invalid(f"{args.csv}: {exc}") from None
    for seed, (eps, ego, adv) in curves_by_seed(points).items():
        conv = convergence_episode(ego, eps, args.threshold, args.sustain)
        se, sa = smooth(ego, args.window), smooth(adv, args.window)
        last = f"{se[-1]:.2f}/{sa[-1]:.2f}" if eps else "n/a"
        print(f"seed {seed}: {len(eps)} checkpoints, convergence "
              f"{'not reached' if conv is None else conv}, final smoothed ego/adv {last}")
    return EXIT_OK


def _cmd_solve_game(args) -> int:
    try:
        g = parse_matrix_game(Path(args.file).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise _Invalid(f"{args.file}: {exc}") from None
    p = lemke_howson(g, args.label) if args.label else solve_stage_game(g)
    np.set_printoptions(precision=6, suppress=True)
    print(f"ego strategy: {p.x}")
    print(f"adv strategy: {p.y}")
    print(f"values: ego {nash_value(g.A, p):.6g}, adv {nash_value(g.B, p):.6g}")
    print(f"point: {classify_point(g, p).value}")
    return EXIT_OK


def _cmd_check_theory(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows, worst = [], -np.inf
    for family in analysis.FAMILIES:
        rep = analysis.contraction_probe(args.trials, family, (args.dim, args.dim), rng)
        rows += rep.rows
        worst = max(worst, rep.max_violation)
        print(f"{family} {args.dim}x{args.dim}: {args.trials} trials, "
              f"max violation {rep.max_violation:.3e}")
    if args.out:
        lines = ["trial,family,dims,violation"]
        lines += [f"{t},{fam},{d[0]}x{d[1]},{v!r}" for t, fam, d, v in rows]
        Path(args.out).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    ok = worst <= args.tol
    print("contraction check " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_validate(args) -> int:
    bad = 0
    for name in args.paths:
        path = Path(name)
        try:
            if path.suffix == ".rm":
                rm = load_rm(path)
                what = f"reward machine, {len(rm.states)} states"
            elif path.suffix == ".map":
                cfg = load_map_file(path)
                what = f"map {cfg.width}x{cfg.height}"
            elif path.suffix == ".cfg":
                cfg = load_config(path)
                what = f"config, algorithm {cfg.algorithm}"
            else:
                raise _Invalid("unknown file type (expected .rm, .map or .cfg)")
            print(f"{path}: ok ({what})")
        except (OSError, RMError, MapError, ConfigError, _Invalid) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            bad += 1
    return EXIT_INVALID if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrmsg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train per a config file and write learning curves")
    p.add_argument("config")
    p.add_argument("--seed", type=int, help="run this single seed instead of the config's")
    p.add_argument("--episodes", type=int)
    p.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--plotdata", help="gnuplot data output path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stop-on-convergence", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="summarize a learning-curve CSV")
    p.add_argument("csv")
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--threshold", type=float, default=0.95)
    p.add_argument("--sustain", type=int, default=20)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("solve-game", help="equilibrium of a bimatrix game file")
    p.add_argument("file")
    p.add_argument("--label", type=int, help="Lemke-Howson dropped label (default 1, "
                   "with support-enumeration fallback)")
    p.set_defaults(func=_cmd_solve_game)

    p = sub.add_parser("check-theory", help="contraction probes on stage-game families")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="CSV of per-trial violations")
    p.set_defaults(func=_cmd_check_theory)

    p = sub.add_parser("validate", help="lint reward machines, maps and configs")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (_Invalid, ConfigError, RMError, MapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (LemkeHowsonError, ValueError, OSError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
