"""Nash Q-learning for two-player stochastic games with reward machines."""
from .equilibrium import (NashProfile, PointKind, StageGame, classify_point,
                          is_epsilon_nash, lemke_howson, solve_stage_game,
                          support_enumeration)
from .gridworld import Action, GridConfig, GridGame, GridState, load_map, load_map_file
from .learner import EGO, ADV, LearnParams, Learner, QStore, VisitCounter
from .reward_machine import RewardMachine, load_rm, parse_rm
from .sgrm import AugState, ProductGame

__all__ = [
    "NashProfile", "PointKind", "StageGame", "classify_point", "is_epsilon_nash",
    "lemke_howson", "solve_stage_game", "support_enumeration",
    "Action", "GridConfig", "GridGame", "GridState", "load_map", "load_map_file",
    "EGO", "ADV", "LearnParams", "Learner", "QStore", "VisitCounter",
    "RewardMachine", "load_rm", "parse_rm", "AugState", "ProductGame",
]
__version__ = "0.1.0"
