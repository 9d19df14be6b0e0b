"""Nash-Q and Nash-QAS baselines.

Both reuse :mod:`qrmsg.learner` unchanged; only the key under which
Q-values are stored differs.  Rewards still come from the reward machines,
which keep running inside the environment as ground truth, but the learners
cannot see their states.

* ``nash-q`` keys on the agents' locations.
* ``nash-qas`` keys on the locations plus one bit per proposition recording
  whether it has been observed so far in the episode.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .learner import AugmentedKey, LearnParams, Learner
from .sgrm import ProductGame

QRM_SG, NASH_Q, NASH_QAS = "qrm-sg", "nash-q", "nash-qas"
ALGORITHMS = (QRM_SG, NASH_Q, NASH_QAS)


def locations(s):
    """The agents' positions when the state has them, else the state itself."""
    ego = getattr(s, "ego", None)
    adv = getattr(s, "adv", None)
    if ego is None or adv is None:
        return s
    return ego, adv


@dataclass(frozen=True)
class EventBitVector:
    props: tuple
    bits: tuple

    @classmethod
    def empty(cls, props) -> "EventBitVector":
        props = tuple(sorted(props))
        return cls(props, (False,) * len(props))

    def update(self, label) -> "EventBitVector":
        bits = tuple(b or p in label for p, b in zip(self.props, self.bits))
        return self if bits == self.bits else EventBitVector(self.props, bits)

    def seen(self, prop: str) -> bool:
        return self.bits[self.props.index(prop)]


class LocationKey:
    def reset(self, aug):
        return locations(aug.s)

    def advance(self, key, out):
        return locations(out.next.s)


class EventBitKey:
    def __init__(self, props):
        self.empty = EventBitVector.empty(props)

    def reset(self, aug):
        return locations(aug.s), self.empty

    def advance(self, key, out):
        return locations(out.next.s), key[1].update(out.label)


def make_encoder(algorithm: str, env: ProductGame):
    if algorithm == QRM_SG:
        return AugmentedKey()
    if algorithm == NASH_Q:
        return LocationKey()
    if algorithm == NASH_QAS:
        return EventBitKey(env.propositions)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def make_learner(algorithm: str, env: ProductGame, params: LearnParams) -> Learner:
    return Learner(env, params, make_encoder(algorithm, env))


def _train(algorithm, game, rm_ego, rm_adv, params, rng, episodes, **train_kw):
    learner = make_learner(algorithm, ProductGame(game, rm_ego, rm_adv), params)
    return learner.train(episodes, rng, **train_kw)


def nash_q_train(game, rm_ego, rm_adv, params: LearnParams, rng: random.Random,
                 episodes: int, **train_kw) -> list:
    """Learning curve of Nash-Q keyed on the agents' locations."""
    return _train(NASH_Q, game, rm_ego, rm_adv, params, rng, episodes, **train_kw)


def nash_qas_train(game, rm_ego, rm_adv, params: LearnParams, rng: random.Random,
                   episodes: int, **train_kw) -> list:
    """Learning curve of Nash-Q keyed on locations and the episode's event bits."""
    return _train(NASH_QAS, game, rm_ego, rm_adv, params, rng, episodes, **train_kw)


def qrm_sg_train(game, rm_ego, rm_adv, params: LearnParams, rng: random.Random,
                 episodes: int, **train_kw) -> list:
    return _train(QRM_SG, game, rm_ego, rm_adv, params, rng, episodes, **train_kw)
