"""Nash Q-learning over product states (QRM-SG).

Each agent keeps its own estimate of both agents' Q-functions, so a run holds
four tables: ``stores[EGO].table(k)[EGO]`` is q_ego learned by ego, ``stores[EGO].table(k)[ADV]``
is q_adv learned by ego, and likewise for the adversary's store.  At every
step both agents pick an action from the equilibrium of their own stage game,
the environment moves, and both agents apply the Nash-Q update to the entry
of the joint action that was just played.

What a table is keyed on is decided by a *key encoder*.  QRM-SG keys on the
full augmented state; the baselines reuse this module with coarser keys.
"""
from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .equilibrium import StageGame, solve_stage_game

EGO, ADV = 0, 1
AGENTS = ("ego", "adv")

ALPHA_VISIT = "visit"
ALPHA_CONSTANT = "constant"


@dataclass
class LearnParams:
    gamma: float = 0.9
    epsilon: float = 0.25
    alpha_mode: str = ALPHA_VISIT
    alpha: float = 0.1            # step size in constant mode
    alpha_exponent: float = 1.0   # visit mode uses 1 / n**alpha_exponent
    eplength: int = 200
    q0: float = 0.0
    epsilon_decay: float = 1.0    # per-episode multiplier
    epsilon_min: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.alpha_mode not in (ALPHA_VISIT, ALPHA_CONSTANT):
            raise ValueError(f"unknown alpha_mode {self.alpha_mode!r}")
        if self.alpha_mode == ALPHA_CONSTANT and not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.alpha_mode == ALPHA_VISIT and not 0.5 < self.alpha_exponent <= 1.0:
            raise ValueError("alpha_exponent must lie in (0.5, 1] for the step sizes "
                             "to sum to infinity with finite sum of squares")
        if self.eplength < 0:
            raise ValueError("eplength must be nonnegative")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError("epsilon_decay must lie in (0, 1]")
        if not math.isfinite(self.q0):
            raise ValueError("q0 must be finite")

    def step_size(self, visits: int) -> float:
        if self.alpha_mode == ALPHA_CONSTANT:
            return self.alpha
        return 1.0 / visits ** self.alpha_exponent

    def epsilon_at(self, episode: int) -> float:
        """Exploration rate for the 0-based training ``episode``."""
        if self.epsilon_decay == 1.0:
            return self.epsilon
        return max(self.epsilon_min, self.epsilon * self.epsilon_decay ** episode)


@functools.lru_cache(maxsize=1 << 16)
def _solve_packed(buf: bytes, m: int, n: int):
    q = np.frombuffer(buf).reshape(2, m, n)
    p = solve_stage_game(StageGame(q[0], q[1]))
    return p.x, p.y


class QStore:
    """One learner's pair of Q-tables over (key, a_ego, a_adv).

    ``table(key)`` is an array of shape ``(2, m, n)``: index 0 holds ego's
    values and index 1 the adversary's.  Unseen keys read as ``q0``.
    """

    def __init__(self, n_ego: int, n_adv: Optional[int] = None, q0: float = 0.0):
        n_adv = n_ego if n_adv is None else n_adv
        self.shape = (2, n_ego, n_adv)
        self.q0 = float(q0)
        self.tables = {}
        self._default = np.full(self.shape, self.q0)
        self._default.setflags(write=False)
        self._eq = {}

    def __len__(self):
        return len(self.tables)

    def table(self, key) -> np.ndarray:
        return self.tables.get(key, self._default)

    def value(self, agent: int, key, a_ego: int, a_adv: int) -> float:
        return float(self.table(key)[agent, a_ego, a_adv])

    def set(self, key, a_ego: int, a_adv: int, q_ego: float, q_adv: float):
        arr = self.tables.get(key)
        if arr is None:
            arr = self.tables[key] = self._default.copy()
        arr[EGO, a_ego, a_adv] = q_ego
        arr[ADV, a_ego, a_adv] = q_adv
        self._eq.pop(key, None)

    def stage_game(self, key) -> StageGame:
        arr = self.table(key)
        return StageGame(arr[EGO], arr[ADV])

    def equilibrium(self, key):
        """``(x, y)`` mixed strategies of the stage game at ``key``."""
        eq = self._eq.get(key)
        if eq is None:
            arr = self.table(key)
            eq = self._eq[key] = _solve_packed(arr.tobytes(), arr.shape[1], arr.shape[2])
        return eq

    def copy(self) -> "QStore":
        other = QStore(self.shape[1], self.shape[2], self.q0)
        other.tables = {k: v.copy() for k, v in self.tables.items()}
        return other

    def fingerprint(self) -> int:
        return hash(tuple(sorted((repr(k), v.tobytes()) for k, v in self.tables.items())))


class VisitCounter:
    def __init__(self):
        self.counts = {}

    def visit(self, key, a_ego: int, a_adv: int) -> int:
        k = (key, a_ego, a_adv)
        n = self.counts.get(k, 0) + 1
        self.counts[k] = n
        return n

    def __getitem__(self, k) -> int:
        return self.counts.get(k, 0)


def select_action(agent: int, qs: QStore, key, epsilon: float, rng: random.Random) -> int:
    """Epsilon-greedy: uniform with probability epsilon, else the most likely
    action of this agent's own equilibrium strategy (lowest index on ties)."""
    n = qs.shape[1 + agent]
    if rng.random() < epsilon:
        return rng.randrange(n)
    x, y = qs.equilibrium(key)
    return int(np.argmax(x if agent == EGO else y))


def nash_backup(agent: int, qs: QStore, next_key):
    """Equilibrium values ``(qbar_ego, qbar_adv)`` of ``agent``'s stage game at ``next_key``."""
    x, y = qs.equilibrium(next_key)
    arr = qs.table(next_key)
    return float(x @ arr[EGO] @ y), float(x @ arr[ADV] @ y)


def q_update(agent: int, qs: QStore, key, a_ego: int, a_adv: int, r_ego: float,
             r_adv: float, next_key, counter: VisitCounter, params: LearnParams,
             terminal: bool = False):
    """Nash-Q update of the single entry ``(key, a_ego, a_adv)`` of both tables.

    ``terminal`` marks a successor where the episode ends; its value is 0
    because both machines then only self-loop with reward 0, and its own
    tables are never updated (they would otherwise contribute ``q0``).
    """
    alpha = params.step_size(counter.visit(key, a_ego, a_adv))
    if terminal:
        qbar_ego = qbar_adv = 0.0
    else:
        qbar_ego, qbar_adv = nash_backup(agent, qs, next_key)
    arr = qs.table(key)
    new_ego = (1.0 - alpha) * arr[EGO, a_ego, a_adv] + alpha * (r_ego + params.gamma * qbar_ego)
    new_adv = (1.0 - alpha) * arr[ADV, a_ego, a_adv] + alpha * (r_adv + params.gamma * qbar_adv)
    qs.set(key, a_ego, a_adv, new_ego, new_adv)
    return new_ego, new_adv


# ---------------------------------------------------------------------------
# Key encoders

class AugmentedKey:
    """Key on the full augmented state (game state and both machine states)."""

    def reset(self, aug):
        return aug

    def advance(self, key, out):
        return out.next


@dataclass
class EpisodeRecord:
    steps: int = 0
    reward_ego: float = 0.0
    reward_adv: float = 0.0
    completed: bool = False


def run_episode(env, qs_ego: QStore, qs_adv: QStore, params: LearnParams, counters,
                rng: random.Random, encoder=None, epsilon: Optional[float] = None,
                learn: bool = True, stage_log: Optional[list] = None) -> EpisodeRecord:
    """Play one episode, updating both agents' stores unless ``learn`` is False.

    The episode stops after ``params.eplength`` steps or as soon as either
    agent's reward machine completes its task.
    """
    encoder = encoder or AugmentedKey()
    eps = params.epsilon if epsilon is None else epsilon
    rec = EpisodeRecord()
    if params.eplength == 0:
        return rec
    aug = env.reset(rng)
    key = encoder.reset(aug)
    for _ in range(params.eplength):
        a_ego = select_action(EGO, qs_ego, key, eps, rng)
        a_adv = select_action(ADV, qs_adv, key, eps, rng)
        out = env.step(aug, a_ego, a_adv, rng)
        next_key = encoder.advance(key, out)
        done = env.is_terminal(out.next)
        if learn:
            q_update(EGO, qs_ego, key, a_ego, a_adv, out.r_ego, out.r_adv, next_key,
                     counters[EGO], params, done)
            q_update(ADV, qs_adv, key, a_ego, a_adv, out.r_ego, out.r_adv, next_key,
                     counters[ADV], params, done)
            if stage_log is not None:
                stage_log.append(qs_ego.stage_game(key))
        rec.steps += 1
        rec.reward_ego += out.r_ego
        rec.reward_adv += out.r_adv
        aug, key = out.next, next_key
        if done:
            rec.completed = True
            break
    return rec


def evaluate(env, qs_ego: QStore, qs_adv: QStore, n_episodes: int, params: LearnParams,
             rng: random.Random, encoder=None):
    """Mean undiscounted episode reward ``(ego, adv)`` under the greedy policies."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be at least 1")
    tot_ego = tot_adv = 0.0
    for _ in range(n_episodes):
        rec = run_episode(env, qs_ego, qs_adv, params, None, rng, encoder,
                          epsilon=0.0, learn=False)
        tot_ego += rec.reward_ego
        tot_adv += rec.reward_adv
    return tot_ego / n_episodes, tot_adv / n_episodes


@dataclass
class Checkpoint:
    episode: int
    ego: float
    adv: float


@dataclass
class Learner:
    """Both agents' stores and counters for one training run."""

    env: object
    params: LearnParams
    encoder: object = field(default_factory=AugmentedKey)
    stores: tuple = None
    counters: tuple = None
    episodes_done: int = 0
    stage_log: Optional[list] = None

    def __post_init__(self):
        n = self.env.n_actions
        if self.stores is None:
            self.stores = (QStore(n, n, self.params.q0), QStore(n, n, self.params.q0))
        if self.counters is None:
            self.counters = (VisitCounter(), VisitCounter())

    def episode(self, rng: random.Random) -> EpisodeRecord:
        eps = self.params.epsilon_at(self.episodes_done)
        rec = run_episode(self.env, self.stores[EGO], self.stores[ADV], self.params,
                          self.counters, rng, self.encoder, epsilon=eps,
                          stage_log=self.stage_log)
        self.episodes_done += 1
        return rec

    def evaluate(self, n_episodes: int, rng: random.Random):
        return evaluate(self.env, self.stores[EGO], self.stores[ADV], n_episodes,
                        self.params, rng, self.encoder)

    def train(self, episodes: int, rng: random.Random, eval_every: int = 80,
              eval_episodes: int = 10, eval_rng: Callable[[int], random.Random] = None,
              stop: Callable[[list], bool] = None) -> list:
        """Train, pausing every ``eval_every`` episodes for a greedy evaluation.

        ``eval_rng(episode)`` supplies the random source of each evaluation, so
        evaluations never disturb the training stream.  ``stop(curve)`` may end
        training early after any checkpoint.
        """
        if eval_rng is None:
            eval_rng = lambda ep: random.Random(ep)
        curve = []
        for _ in range(episodes):
            self.episode(rng)
            if self.episodes_done % eval_every == 0:
                ego, adv = self.evaluate(eval_episodes, eval_rng(self.episodes_done))
                curve.append(Checkpoint(self.episodes_done, ego, adv))
                if stop is not None and stop(curve):
                    break
        return curve

    def stores_agree(self) -> bool:
        """Both agents observed the same data, so their stores should coincide."""
        a, b = self.stores
        keys = set(a.tables) | set(b.tables)
        return all(np.array_equal(a.table(k), b.table(k)) for k in keys)
