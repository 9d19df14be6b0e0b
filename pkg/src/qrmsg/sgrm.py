"""Product of a labeled two-player game with both agents' reward machines.

The augmented state ``(s, v_ego, v_adv)`` makes the reward machines' outputs
Markovian: the reward at a step is a function of the augmented state, the
joint action and the next game state only.  The product is never enumerated;
it is realized as a step function over the underlying game.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

from .reward_machine import RMError, RewardMachine


class AugState(NamedTuple):
    s: Any
    v_ego: str
    v_adv: str


class StepOutcome(NamedTuple):
    next: AugState
    r_ego: float
    r_adv: float
    label: frozenset


def completion_states(rm: RewardMachine) -> frozenset:
    """Sink states that some edge enters from elsewhere: the task is done there."""
    entered = {e.target for e in rm.edges if e.source != e.target}
    return frozenset(v for v in rm.states if v in entered and rm.is_sink(v))


class ProductGame:
    """Stochastic game with reward machines, seen as a Markov game.

    ``game`` must provide ``propositions``, ``n_actions``, ``reset(rng)``,
    ``step(s, a_ego, a_adv, rng)`` and ``label(s, a_ego, a_adv, s2)``.
    """

    def __init__(self, game, rm_ego: RewardMachine, rm_adv: RewardMachine):
        for who, rm in (("ego", rm_ego), ("adversary", rm_adv)):
            unknown = rm.props - frozenset(game.propositions)
            if unknown:
                raise RMError(f"{who} reward machine uses propositions the game "
                              f"never emits: {sorted(unknown)}")
        self.game = game
        self.rm_ego = rm_ego
        self.rm_adv = rm_adv
        self.n_actions = game.n_actions
        self._sinks_ego = completion_states(rm_ego)
        self._sinks_adv = completion_states(rm_adv)

    @property
    def propositions(self):
        return self.game.propositions

    def initial(self, s) -> AugState:
        return AugState(s, self.rm_ego.initial, self.rm_adv.initial)

    def reset(self, rng: random.Random) -> AugState:
        return AugState(self.game.reset(rng), self.rm_ego.initial, self.rm_adv.initial)

    def step(self, aug: AugState, a_ego: int, a_adv: int, rng: random.Random) -> StepOutcome:
        s2 = self.game.step(aug.s, a_ego, a_adv, rng)
        return self.compose(aug, a_ego, a_adv, s2)

    def compose(self, aug: AugState, a_ego: int, a_adv: int, s2) -> StepOutcome:
        """Advance both machines along the game transition ``aug.s -> s2``."""
        label = self.game.label(aug.s, a_ego, a_adv, s2)
        v_ego, r_ego = self.rm_ego.step(aug.v_ego, label)
        v_adv, r_adv = self.rm_adv.step(aug.v_adv, label)
        return StepOutcome(AugState(s2, v_ego, v_adv), r_ego, r_adv, label)

    def is_terminal(self, aug: AugState) -> bool:
        """Task-completion predicate: either machine has reached a completion state."""
        return aug.v_ego in self._sinks_ego or aug.v_adv in self._sinks_adv

    def outcomes(self, aug: AugState, a_ego: int, a_adv: int):
        """Exact successor distribution; needs ``game.transitions(s, a, b)``."""
        return [(p, self.compose(aug, a_ego, a_adv, s2))
                for p, s2 in self.game.transitions(aug.s, a_ego, a_adv)]


def sgrm_reset(game, rm_ego, rm_adv, rng) -> AugState:
    return ProductGame(game, rm_ego, rm_adv).reset(rng)


def sgrm_step(product: ProductGame, aug: AugState, a_ego, a_adv, rng) -> StepOutcome:
    return product.step(aug, a_ego, a_adv, rng)


@dataclass
class MarkovReport:
    n_trajectories: int
    horizon: int
    divergences: int = 0
    first_divergence: Optional[tuple] = None  # (trajectory, step, agent)

    @property
    def ok(self) -> bool:
        return self.divergences == 0


def check_markovian_equivalence(game, rm_ego: RewardMachine, rm_adv: RewardMachine,
                                n_trajectories: int, horizon: int, rng: random.Random,
                                oracle_rms: Optional[tuple] = None) -> MarkovReport:
    """Compare product-game rewards with replaying the raw label history.

    Each trajectory is driven by uniformly random joint actions through the
    product game.  The labels it produced are then fed from scratch to the
    reward machines (``oracle_rms`` if given, else the same machines) and the
    two reward sequences must agree element by element.
    """
    product = ProductGame(game, rm_ego, rm_adv)
    oracle_ego, oracle_adv = oracle_rms if oracle_rms is not None else (rm_ego, rm_adv)
    report = MarkovReport(n_trajectories, horizon)
    n = product.n_actions
    randrange = rng.randrange
    for k in range(n_trajectories):
        aug = product.reset(rng)
        labels, rewards_ego, rewards_adv = [], [], []
        for _ in range(horizon):
            out = product.step(aug, randrange(n), randrange(n), rng)
            labels.append(out.label)
            rewards_ego.append(out.r_ego)
            rewards_adv.append(out.r_adv)
            aug = out.next
        for agent, got, oracle in (("ego", rewards_ego, oracle_ego),
                                   ("adv", rewards_adv, oracle_adv)):
            expected = oracle.run(labels)
            if got != expected:
                report.divergences += 1
                if report.first_divergence is None:
                    t = next(i for i, (a, b) in enumerate(zip(got, expected)) if a != b)
                    report.first_divergence = (k, t, agent)
    return report
