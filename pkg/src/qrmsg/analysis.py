"""Empirical checks of the convergence argument behind QRM-SG.

Includes the max-norm distance between Q-stores, the one-step operator
``F`` (the target of the Nash-Q update), a contraction probe on stage-game
families where a global optimum or a saddle point is guaranteed, stage-game
classification statistics, and a brute-force Nash value iteration oracle
for small explicit games.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .equilibrium import (NashProfile, PointKind, StageGame, classify_point,
                          solve_stage_game, support_enumeration, SUPPORT_ENUM_MAX_DIM)
from .learner import EGO, AGENTS, QStore, nash_backup
from .sgrm import ProductGame

IDENTICAL_INTEREST = "identical-interest"
ZERO_SUM = "zero-sum"
FAMILIES = (IDENTICAL_INTEREST, ZERO_SUM)


# ---------------------------------------------------------------------------
# Distance and operator

@dataclass
class QDistanceReport:
    distance: float
    witness: Optional[tuple] = None  # (agent, key, a_ego, a_adv)


def q_distance(qa: QStore, qb: QStore) -> QDistanceReport:
    """Largest absolute difference over agents, keys and joint actions."""
    if qa.shape != qb.shape:
        raise ValueError(f"stores have different action shapes {qa.shape} and {qb.shape}")
    best = QDistanceReport(0.0)
    for key in set(qa.tables) | set(qb.tables):
        diff = np.abs(qa.table(key) - qb.table(key))
        idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
        d = float(diff[idx])
        if best.witness is None or d > best.distance:
            best = QDistanceReport(d, (AGENTS[idx[0]], key, int(idx[1]), int(idx[2])))
    return best


def apply_F(qs: QStore, sample, gamma: float):
    """``(r_ego + gamma * qbar_ego, r_adv + gamma * qbar_adv)`` for one sampled
    transition ``(key, a_ego, a_adv, r_ego, r_adv, next_key)``."""
    _, _, _, r_ego, r_adv, next_key = sample
    qbar_ego, qbar_adv = nash_backup(EGO, qs, next_key)
    return r_ego + gamma * qbar_ego, r_adv + gamma * qbar_adv


# ---------------------------------------------------------------------------
# Contraction probe

def sample_stage_game(family: str, dims, rng: np.random.Generator) -> StageGame:
    m, n = dims
    A = rng.uniform(-1.0, 1.0, size=(m, n))
    if family == IDENTICAL_INTEREST:
        return StageGame(A, A.copy())
    if family == ZERO_SUM:
        return StageGame(A, -A)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _global_optimum(g: StageGame) -> Optional[NashProfile]:
    """A pure profile maximizing both payoffs at once, if one exists."""
    m, n = g.shape
    i, j = np.unravel_index(int(np.argmax(g.A)), g.shape)
    if g.B[i, j] < g.B.max():
        return None
    x, y = np.zeros(m), np.zeros(n)
    x[i] = y[j] = 1.0
    return NashProfile(x, y)


def family_equilibrium(g: StageGame, family: str) -> NashProfile:
    """The equilibrium the contraction argument is about.

    For identical-interest games this is the global optimum, which the
    solver's first equilibrium need not be; zero-sum games use the solver's
    output since every equilibrium there is a saddle point.
    """
    p = solve_stage_game(g)
    if family == IDENTICAL_INTEREST and classify_point(g, p) is not PointKind.GLOBAL_OPTIMUM:
        p = _global_optimum(g)
    return p


@dataclass
class ContractionReport:
    family: str
    dims: tuple
    n_trials: int
    max_violation: float
    rows: list = field(default_factory=list)   # (trial, family, dims, violation)
    solver_hits: int = 0   # trials where the solver's own output already qualified


def contraction_probe(n_trials: int, family: str, dims, rng: np.random.Generator
                      ) -> ContractionReport:
    """Check ``|pi q pi - pi' q' pi'| <= ||q - q'||`` on random pairs.

    The second game of each pair is either independent of the first or a
    perturbation of it at a random scale, so both far and near pairs occur.
    ``violation`` is the left side minus the right side (negative is fine).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    dims = tuple(dims)
    report = ContractionReport(family, dims, n_trials, -np.inf)
    for t in range(n_trials):
        g = sample_stage_game(family, dims, rng)
        if rng.random() < 0.5:
            h = sample_stage_game(family, dims, rng)
        else:
            scale = 10.0 ** rng.uniform(-8, 0)
            delta = sample_stage_game(family, dims, rng)
            h = StageGame(g.A + scale * delta.A, g.B + scale * delta.B)
        v = _pair_violation(g, h, family, report)
        report.rows.append((t, family, dims, v))
        report.max_violation = max(report.max_violation, v)
    return report


def _pair_violation(g: StageGame, h: StageGame, family: str, report=None) -> float:
    p, q = family_equilibrium(g, family), family_equilibrium(h, family)
    if report is not None:
        report.solver_hits += int(classify_point(g, solve_stage_game(g)) is not PointKind.NEITHER)
    dist = max(np.abs(g.A - h.A).max(), np.abs(g.B - h.B).max())
    gap = max(abs(p.x @ g.A @ p.y - q.x @ h.A @ q.y), abs(p.x @ g.B @ p.y - q.x @ h.B @ q.y))
    return float(gap - dist)


# ---------------------------------------------------------------------------
# Stage-game classification

def stage_kind(g: StageGame) -> PointKind:
    """Whether ``g`` has a global optimum, else a saddle-point equilibrium."""
    if _global_optimum(g) is not None:
        return PointKind.GLOBAL_OPTIMUM
    candidates = [solve_stage_game(g)]
    if max(g.shape) <= SUPPORT_ENUM_MAX_DIM:
        candidates += support_enumeration(g)
    if any(classify_point(g, p) is PointKind.SADDLE_POINT for p in candidates):
        return PointKind.SADDLE_POINT
    return PointKind.NEITHER


@dataclass
class StagePointStats:
    total: int
    counts: dict
    empty: bool

    def fraction(self, kind: PointKind) -> float:
        return self.counts[kind] / self.total if self.total else 0.0

    @property
    def fractions(self) -> dict:
        return {k: self.fraction(k) for k in PointKind}


def stage_point_stats(log) -> StagePointStats:
    counts = {k: 0 for k in PointKind}
    n = 0
    for g in log:
        counts[stage_kind(g)] += 1
        n += 1
    return StagePointStats(n, counts, n == 0)


# ---------------------------------------------------------------------------
# Small explicit games and the value-iteration oracle

@dataclass
class TabularGame:
    """A labeled two-player game given by explicit tables.

    ``dynamics[s][(a, b)]`` lists ``(probability, s2)``; ``labels`` maps
    ``(s, a, b, s2)`` to a set of propositions (missing means empty).
    """

    states: tuple
    initial: object
    n_actions: int
    dynamics: dict
    propositions: frozenset = frozenset()
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for s in self.states:
            for a in range(self.n_actions):
                for b in range(self.n_actions):
                    outs = self.dynamics[s][a, b]
                    total = sum(p for p, _ in outs)
                    if abs(total - 1.0) > 1e-12:
                        raise ValueError(f"probabilities at {(s, a, b)} sum to {total}")

    def reset(self, rng: random.Random):
        return self.initial

    def step(self, s, a_ego, a_adv, rng: random.Random):
        u = rng.random()
        outs = self.dynamics[s][a_ego, a_adv]
        acc = 0.0
        for p, s2 in outs:
            acc += p
            if u < acc:
                return s2
        return outs[-1][1]

    def label(self, s, a_ego, a_adv, s2) -> frozenset:
        return frozenset(self.labels.get((s, a_ego, a_adv, s2), ()))

    def transitions(self, s, a_ego, a_adv):
        return self.dynamics[s][a_ego, a_adv]


_MATCHER = """
states: v0 v1 vend
initial: v0
props: p q
edge: v0 -> v1 on p reward 0.5
edge: v1 -> v0 on q & !p reward -0.5
edge: v1 -> vend on p reward 1
"""


def matching_game() -> ProductGame:
    """A small zero-sum product game for oracle checks.

    Two states; matching actions move play to state 1 with probability 0.7,
    mismatching ones with 0.4.  Entering state 1 raises ``p`` and falling back
    raises ``q``.  Ego wants to match, the adversary to mismatch, and both
    machines share one structure with negated rewards.
    """
    from .reward_machine import parse_rm

    dyn, labels = {}, {}
    for s in (0, 1):
        dyn[s] = {}
        for a in (0, 1):
            for b in (0, 1):
                dyn[s][a, b] = [(0.7, 1), (0.3, 0)] if a == b else [(0.4, 1), (0.6, 0)]
                labels[s, a, b, 1] = {"p"}
                if s == 1:
                    labels[s, a, b, 0] = {"q"}
    game = TabularGame((0, 1), 0, 2, dyn, frozenset({"p", "q"}), labels)
    adv = _MATCHER.replace("v", "u").replace("reward ", "reward -").replace("--", "")
    return ProductGame(game, parse_rm(_MATCHER), parse_rm(adv))


def reachable_states(product) -> list:
    """Augmented states reachable from the initial one, in discovery order."""
    n = product.n_actions
    start = product.initial(product.game.initial)
    seen, order, queue = {start}, [start], deque([start])
    while queue:
        aug = queue.popleft()
        if product.is_terminal(aug):
            continue
        for a in range(n):
            for b in range(n):
                for _, out in product.outcomes(aug, a, b):
                    if out.next not in seen:
                        seen.add(out.next)
                        order.append(out.next)
                        queue.append(out.next)
    return order


def minimax_value(A: np.ndarray) -> float:
    """Value of the zero-sum game where the row player receives ``A``."""
    m, n = A.shape
    # variables (x_1..x_m, v); maximize v subject to x^T A[:, j] >= v
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-A.T, np.ones((n, 1))])
    A_eq = np.hstack([np.ones((1, m)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * m + [(None, None)], method="highs")
    if not res.success:
        raise RuntimeError(f"minimax LP failed: {res.message}")
    return float(res.x[-1])


@dataclass
class ValueIterationResult:
    q: dict                 # aug -> array (2, n, n)
    states: list
    iterations: int
    residual: float

    def store(self, q0: float = 0.0) -> QStore:
        n = next(iter(self.q.values())).shape[1]
        qs = QStore(n, n, q0)
        qs.tables = {k: v.copy() for k, v in self.q.items()}
        return qs


def nash_value_iteration(product, gamma: float = 0.9, tol: float = 1e-10,
                         max_iter: int = 100_000) -> ValueIterationResult:
    """Nash Q-functions of a zero-sum product game by value iteration.

    Stage values come from a linear program, independent of the pivoting
    solver.  Terminal augmented states have value 0.
    """
    states = reachable_states(product)
    n = product.n_actions
    model = {}
    for aug in states:
        if product.is_terminal(aug):
            continue
        for a in range(n):
            for b in range(n):
                outs = product.outcomes(aug, a, b)
                for _, out in outs:
                    if out.r_ego != -out.r_adv:
                        raise ValueError("value iteration oracle needs zero-sum rewards; "
                                         f"got ({out.r_ego}, {out.r_adv}) from {aug}")
                model[aug, a, b] = [(p, out.r_ego, out.next) for p, out in outs]
    live = [s for s in states if not product.is_terminal(s)]
    q = {s: np.zeros((n, n)) for s in live}
    value = {s: 0.0 for s in states}
    residual = np.inf
    for it in range(1, max_iter + 1):
        new_q = {}
        for s in live:
            m = np.empty((n, n))
            for a in range(n):
                for b in range(n):
                    m[a, b] = sum(p * (r + gamma * value[s2]) for p, r, s2 in model[s, a, b])
            new_q[s] = m
        residual = max(np.abs(new_q[s] - q[s]).max() for s in live) if live else 0.0
        q = new_q
        for s in live:
            value[s] = minimax_value(q[s])
        if residual < tol:
            break
    tables = {s: np.stack([q[s], -q[s]]) for s in live}
    return ValueIterationResult(tables, states, it, float(residual))


def fixed_point_gap(product, qstar: QStore, gamma: float, n_samples: int,
                    rng: random.Random) -> QDistanceReport:
    """Largest gap between ``q*`` and the sample mean of ``F q*`` over every
    non-terminal augmented state and joint action."""
    n = product.n_actions
    best = QDistanceReport(0.0)
    for aug in reachable_states(product):
        if product.is_terminal(aug):
            continue
        for a in range(n):
            for b in range(n):
                tot = np.zeros(2)
                for _ in range(n_samples):
                    out = product.step(aug, a, b, rng)
                    if product.is_terminal(out.next):
                        f = (out.r_ego, out.r_adv)
                    else:
                        f = apply_F(qstar, (aug, a, b, out.r_ego, out.r_adv, out.next), gamma)
                    tot += f
                gap = np.abs(tot / n_samples - qstar.table(aug)[:, a, b])
                k = int(np.argmax(gap))
                if best.witness is None or gap[k] > best.distance:
                    best = QDistanceReport(float(gap[k]), (AGENTS[k], aug, a, b))
    return best


def q_bounds(r_max: float, gamma: float):
    if gamma >= 1.0:
        return -np.inf, np.inf
    b = r_max / (1.0 - gamma)
    return -b, b


def stores_within(stores, lo: float, hi: float) -> bool:
    return all(((t >= lo) & (t <= hi)).all() and np.isfinite(t).all()
               for qs in stores for t in qs.tables.values())
