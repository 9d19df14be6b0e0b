"""Experiment configuration, orchestration and curve output.

A config file holds ``key = value`` lines (``#`` starts a comment).  Paths
are resolved relative to the file.  Example::

    map = ../maps/case12.map
    rm_ego = ../rms/case1_ego.rm
    rm_adv = ../rms/case1_adv.rm
    algorithm = qrm-sg
    seeds = 0 1 2 3 4
    episodes = 20000
"""
from __future__ import annotations

import dataclasses
import random
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .baselines import ALGORITHMS, QRM_SG, make_learner
from .gridworld import GridGame, load_map_file
from .learner import LearnParams
from .reward_machine import load_rm
from .sgrm import ProductGame

CSV_HEADER = "episode,agent,reward,seed"
CONVERGENCE_THRESHOLD = 0.95
CONVERGENCE_SUSTAIN = 20


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    map: Path
    rm_ego: Path
    rm_adv: Path
    algorithm: str = QRM_SG
    seeds: list = field(default_factory=lambda: [0])
    episodes: int = 20000
    eval_every: int = 80
    eval_episodes: int = 10
    smoothing_window: int = 6
    stop_on_convergence: bool = False
    # learner
    gamma: float = 0.9
    epsilon: float = 0.25
    alpha_mode: str = "visit"
    alpha: float = 0.1
    alpha_exponent: float = 1.0
    eplength: int = 200
    q0: float = 0.0
    epsilon_decay: float = 1.0
    epsilon_min: float = 0.0
    # environment
    slip_rate: float = 0.005
    slip_mode: str = "others"
    capture_distance: float = 2.0
    allow_stay: bool = False

    def __post_init__(self):
        for name in ("map", "rm_ego", "rm_adv"):
            p = Path(getattr(self, name))
            if not p.is_file():
                raise ConfigError(f"{name}: file not found: {p}")
            setattr(self, name, p)
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {', '.join(ALGORITHMS)}, "
                              f"got {self.algorithm!r}")
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        for name in ("episodes", "eval_every", "eval_episodes", "smoothing_window"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        try:
            self.learn_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def learn_params(self) -> LearnParams:
        names = [f.name for f in dataclasses.fields(LearnParams)]
        return LearnParams(**{n: getattr(self, n) for n in names})

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def build_env(self) -> ProductGame:
        grid = load_map_file(self.map, slip_rate=self.slip_rate, slip_mode=self.slip_mode,
                             capture_distance=self.capture_distance,
                             allow_stay=self.allow_stay)
        return ProductGame(GridGame(grid), load_rm(self.rm_ego), load_rm(self.rm_adv))


_PATH_KEYS = {"map", "rm_ego", "rm_adv"}


def _convert(key: str, raw: str, kind):
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "1"):
                return True
            if low in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is list:
            return [int(t) for t in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}") from None
    return raw


def parse_config(text: str, base_dir: Path = Path("."), **overrides) -> ExperimentConfig:
    hints = typing.get_type_hints(ExperimentConfig)
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in hints:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key in _PATH_KEYS:
            values[key] = (base_dir / value) if value else Path(value)
        else:
            values[key] = _convert(key, value, hints[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    missing = _PATH_KEYS - values.keys()
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(sorted(missing))}")
    return ExperimentConfig(**values)


def load_config(path, **overrides) -> ExperimentConfig:
    """Read and validate a config file; ``overrides`` replace file values."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent, **overrides)


# ---------------------------------------------------------------------------
# Curves

@dataclass(frozen=True)
class CurvePoint:
    episode: int
    agent: str
    reward: float
    seed: int


def convergence_episode(rewards, episodes, threshold: float = CONVERGENCE_THRESHOLD,
                        sustain: int = CONVERGENCE_SUSTAIN) -> Optional[int]:
    """First checkpoint from which ``sustain`` consecutive rewards reach ``threshold``."""
    run = 0
    for i, r in enumerate(rewards):
        run = run + 1 if r >= threshold else 0
        if run == sustain:
            return episodes[i - sustain + 1]
    return None


def smooth(values, window: int) -> list:
    """Trailing mean; the first points average over what is available."""
    if window < 1:
        raise ValueError("window must be at least 1")
    out, total = [], 0.0
    values = list(values)
    for i, v in enumerate(values):
        total += v
        if i >= window:
            total -= values[i - window]
        out.append(total / min(i + 1, window))
    return out


def _eval_rng(seed: int):
    return lambda episode: random.Random((seed << 32) ^ episode)


@dataclass
class SeedResult:
    seed: int
    episodes: list
    ego: list
    adv: list
    convergence: Optional[int]
    episodes_trained: int

    def points(self) -> list:
        pts = []
        for ep, e, a in zip(self.episodes, self.ego, self.adv):
            pts.append(CurvePoint(ep, "ego", e, self.seed))
            pts.append(CurvePoint(ep, "adv", a, self.seed))
        return pts


def _converged(curve) -> bool:
    return convergence_episode([c.ego for c in curve], [c.episode for c in curve]) is not None


def run_seed(cfg: ExperimentConfig, seed: int) -> SeedResult:
    learner = make_learner(cfg.algorithm, cfg.build_env(), cfg.learn_params())
    stop = _converged if cfg.stop_on_convergence else None
    curve = learner.train(cfg.episodes, random.Random(seed), cfg.eval_every,
                          cfg.eval_episodes, _eval_rng(seed), stop)
    eps = [c.episode for c in curve]
    ego = [c.ego for c in curve]
    return SeedResult(seed, eps, ego, [c.adv for c in curve],
                      convergence_episode(ego, eps), learner.episodes_done)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    seeds: list   # SeedResult, ordered by seed

    @property
    def points(self) -> list:
        return [p for r in self.seeds for p in r.points()]

    @property
    def convergence(self) -> dict:
        return {r.seed: r.convergence for r in self.seeds}

    def summary(self) -> str:
        lines = [f"algorithm {self.config.algorithm}, {len(self.seeds)} seed(s)"]
        for r in self.seeds:
            conv = "not reached" if r.convergence is None else f"episode {r.convergence}"
            final_e = r.ego[-1] if r.ego else float("nan")
            final_a = r.adv[-1] if r.adv else float("nan")
            lines.append(f"  seed {r.seed}: convergence {conv}; trained {r.episodes_trained} "
                         f"episodes; final ego {final_e:.2f} adv {final_a:.2f}")
        return "\n".join(lines)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Train once per seed, evaluating every ``eval_every`` episodes."""
    seeds = sorted(set(cfg.seeds))
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_seed, [cfg] * len(seeds), seeds))
    else:
        results = [run_seed(cfg, s) for s in seeds]
    return ExperimentResult(cfg, results)


EPSILON_VARIANTS = {
    "0.05": dict(epsilon=0.05),
    "0.25": dict(epsilon=0.25),
    "0.90": dict(epsilon=0.90),
    "decay": dict(epsilon=0.90, epsilon_decay=0.9986, epsilon_min=0.05),
}


def epsilon_study(base: ExperimentConfig, workers: int = 1) -> dict:
    """Runs of ``base`` that differ only in the exploration schedule."""
    return {name: run_experiment(base.replace(epsilon_decay=1.0, epsilon_min=0.0, **kw),
                                 workers)
            for name, kw in EPSILON_VARIANTS.items()}


# ---------------------------------------------------------------------------
# Output

def format_csv(points) -> str:
    rows = [CSV_HEADER]
    rows += [f"{p.episode},{p.agent},{p.reward!r},{p.seed}" for p in points]
    return "\n".join(rows) + "\n"


def emit_csv(points, path) -> None:
    Path(path).write_bytes(format_csv(points).encode("utf-8"))


def parse_csv(text: str) -> list:
    lines = text.split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    out = []
    for n, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"line {n}: expected 4 fields")
        out.append(CurvePoint(int(parts[0]), parts[1], float(parts[2]), int(parts[3])))
    return out


def read_csv(path) -> list:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def curves_by_seed(points) -> dict:
    """``seed -> (episodes, ego rewards, adv rewards)``, ordered by episode."""
    table = {}
    for p in points:
        table.setdefault(p.seed, {}).setdefault(p.episode, {})[p.agent] = p.reward
    out = {}
    for seed in sorted(table):
        eps = sorted(table[seed])
        out[seed] = (eps, [table[seed][e].get("ego", 0.0) for e in eps],
                     [table[seed][e].get("adv", 0.0) for e in eps])
    return out


def format_plotdata(points, window: int = 6) -> str:
    """gnuplot blocks, one per seed: episode, ego, adv and their smoothed values."""
    blocks = []
    for seed, (eps, ego, adv) in curves_by_seed(points).items():
        rows = [f"# seed {seed}", "# episode ego adv ego_smooth adv_smooth"]
        for row in zip(eps, ego, adv, smooth(ego, window), smooth(adv, window)):
            rows.append(" ".join(f"{v:g}" for v in row))
        blocks.append("\n".join(rows))
    return "\n\n\n".join(blocks) + "\n"


def emit_plotdata(points, path, window: int = 6) -> None:
    Path(path).write_bytes(format_plotdata(points, window).encode("utf-8"))
