"""Two-player capture game on a grid with power bases and slip noise.

Cells are ``(x, y)`` with ``x`` growing rightward and ``y`` growing downward
(row 0 of a map file is the top).  ``UP`` increments ``y``, so on a printed
map it moves one row toward the bottom.  Both agents move simultaneously.

Base dynamics, applied after the move:

* an agent standing on its own intact base becomes *charged* and the other
  agent loses its charge (both lose it when both arrive at once);
* an agent that was charged before the move and enters the opponent's
  intact base destroys it, spending the charge.

A destroyed base can no longer charge its owner, and the ``*AtHome``
propositions stay false for it.
"""
from __future__ import annotations

import enum
import functools
import random
from dataclasses import dataclass
from typing import NamedTuple

EGO_AT_HOME = "EgoAtHome"
ADV_AT_HOME = "AdvAtHome"
EGO_MEET_ADV = "EgoMeetAdv"
EGO_AT_ADV_HOME = "EgoAtAdvHome"
ADV_AT_EGO_HOME = "AdvAtEgoHome"
PROPOSITIONS = frozenset(
    {EGO_AT_HOME, ADV_AT_HOME, EGO_MEET_ADV, EGO_AT_ADV_HOME, ADV_AT_EGO_HOME})


class Action(enum.IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    STAY = 4


DELTAS = {
    Action.UP: (0, 1),
    Action.DOWN: (0, -1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.STAY: (0, 0),
}

SLIP_OTHERS = "others"  # slip picks uniformly among the non-intended actions
SLIP_ANY = "any"        # slip picks uniformly among all actions


class MapError(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    width: int
    height: int
    ego_start: tuple
    adv_starts: tuple
    ego_home: tuple
    adv_home: tuple
    slip_rate: float = 0.005
    capture_distance: float = 2.0
    allow_stay: bool = False
    slip_mode: str = SLIP_OTHERS

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise MapError(f"grid must be at least 1x1, got {self.width}x{self.height}")
        object.__setattr__(self, "adv_starts", tuple(tuple(c) for c in self.adv_starts))
        if not self.adv_starts:
            raise MapError("at least one adversary start is required")
        for name in ("ego_start", "ego_home", "adv_home"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            self._check_cell(getattr(self, name), name)
        for c in self.adv_starts:
            self._check_cell(c, "adv_start")
        if not 0.0 <= self.slip_rate <= 1.0:
            raise MapError(f"slip_rate must lie in [0, 1], got {self.slip_rate}")
        if self.capture_distance <= 0:
            raise MapError("capture_distance must be positive")
        if self.slip_mode not in (SLIP_OTHERS, SLIP_ANY):
            raise MapError(f"unknown slip_mode {self.slip_mode!r}")

    def _check_cell(self, cell, what):
        x, y = cell
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise MapError(f"{what} at ({x}, {y}) is outside the "
                           f"{self.width}x{self.height} grid")

    @property
    def actions(self) -> tuple:
        n = 5 if self.allow_stay else 4
        return tuple(Action(i) for i in range(n))

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height


class GridState(NamedTuple):
    ego: tuple
    adv: tuple
    ego_home_destroyed: bool = False
    adv_home_destroyed: bool = False
    ego_charged: bool = False
    adv_charged: bool = False


def manhattan(p, q) -> int:
    return abs(p[0] - q[0]) + abs(p[1] - q[1])


class GridGame:
    """Labeled two-player stochastic game over a :class:`GridConfig`."""

    propositions = PROPOSITIONS

    def __init__(self, cfg: GridConfig):
        self.cfg = cfg
        self.n_actions = len(cfg.actions)
        self._move = {}
        for x in range(cfg.width):
            for y in range(cfg.height):
                for a in cfg.actions:
                    dx, dy = DELTAS[a]
                    nxt = (x + dx, y + dy)
                    self._move[(x, y), a] = nxt if cfg.in_bounds(nxt) else (x, y)
        self._eh, self._ah = cfg.ego_home, cfg.adv_home

    def reset(self, rng: random.Random) -> GridState:
        starts = self.cfg.adv_starts
        adv = starts[0] if len(starts) == 1 else starts[rng.randrange(len(starts))]
        return GridState(self.cfg.ego_start, adv)

    def executed_action(self, intended: int, rng: random.Random) -> int:
        slip = self.cfg.slip_rate
        if slip <= 0.0 or rng.random() >= slip:
            return intended
        n = self.n_actions
        if self.cfg.slip_mode == SLIP_ANY:
            return rng.randrange(n)
        other = rng.randrange(n - 1)
        return other + 1 if other >= intended else other

    def step(self, s: GridState, a_ego: int, a_adv: int, rng: random.Random) -> GridState:
        ego = self._move[s.ego, self.executed_action(a_ego, rng)]
        adv = self._move[s.adv, self.executed_action(a_adv, rng)]
        return self.resolve(s, ego, adv)

    def resolve(self, s: GridState, ego, adv) -> GridState:
        """Apply base destruction and charging for agents moved to ``ego``/``adv``."""
        eh, ah = self._eh, self._ah
        ego_destroyed, adv_destroyed = s.ego_home_destroyed, s.adv_home_destroyed
        ego_charged, adv_charged = s.ego_charged, s.adv_charged
        if s.ego_charged and ego == ah and not adv_destroyed:
            adv_destroyed, ego_charged = True, False
        if s.adv_charged and adv == eh and not ego_destroyed:
            ego_destroyed, adv_charged = True, False
        e_home = ego == eh and not ego_destroyed
        a_home = adv == ah and not adv_destroyed
        if e_home or a_home:
            ego_charged = e_home and not a_home
            adv_charged = a_home and not e_home
        return GridState(ego, adv, ego_destroyed, adv_destroyed, ego_charged, adv_charged)

    def label(self, s: GridState, a_ego: int, a_adv: int, s2: GridState) -> frozenset:
        cfg = self.cfg
        ego, adv = s2.ego, s2.adv
        out = []
        if ego == self._eh and not s2.ego_home_destroyed:
            out.append(EGO_AT_HOME)
        if adv == self._ah and not s2.adv_home_destroyed:
            out.append(ADV_AT_HOME)
        if abs(ego[0] - adv[0]) + abs(ego[1] - adv[1]) < cfg.capture_distance:
            out.append(EGO_MEET_ADV)
        if ego == self._ah:
            out.append(EGO_AT_ADV_HOME)
        if adv == self._eh:
            out.append(ADV_AT_EGO_HOME)
        return frozenset(out)

    def transition_probs(self, intended: int) -> dict:
        """Distribution of the executed action for one agent."""
        n, slip = self.n_actions, self.cfg.slip_rate
        if self.cfg.slip_mode == SLIP_ANY:
            probs = {a: slip / n for a in range(n)}
            probs[intended] += 1.0 - slip
            return probs
        if n == 1:
            return {intended: 1.0}
        probs = {a: slip / (n - 1) for a in range(n)}
        probs[intended] = 1.0 - slip
        return probs

    def in_bounds(self, s: GridState) -> bool:
        return self.cfg.in_bounds(s.ego) and self.cfg.in_bounds(s.adv)


@functools.lru_cache(maxsize=64)
def game_for(cfg: GridConfig) -> GridGame:
    return GridGame(cfg)


def grid_reset(cfg: GridConfig, rng: random.Random) -> GridState:
    return game_for(cfg).reset(rng)


def grid_step(cfg: GridConfig, s: GridState, a_ego, a_adv, rng: random.Random) -> GridState:
    return game_for(cfg).step(s, int(a_ego), int(a_adv), rng)


def grid_label(cfg: GridConfig, s: GridState, a_ego, a_adv, s2: GridState) -> frozenset:
    return game_for(cfg).label(s, a_ego, a_adv, s2)


_SYMBOLS = {".", "E", "a", "H", "h"}


def load_map(text: str, **overrides) -> GridConfig:
    """Parse a map: a ``W H`` line, then ``H`` rows of ``W`` symbols.

    ``.`` empty, ``E`` ego start, ``a`` adversary start (repeatable),
    ``H`` ego home, ``h`` adversary home.  Keyword arguments are passed
    through to :class:`GridConfig` (``slip_rate``, ``allow_stay``, ...).
    """
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows:
        raise MapError("empty map")
    try:
        width, height = (int(t) for t in rows[0])
    except ValueError:
        raise MapError("first line must be 'W H'") from None
    if width < 1 or height < 1:
        raise MapError(f"bad dimensions {width}x{height}")
    grid = rows[1:]
    if len(grid) != height:
        raise MapError(f"expected {height} rows, found {len(grid)}")
    ego_start = ego_home = adv_home = None
    adv_starts = []
    for y, row in enumerate(grid):
        if len(row) != width:
            raise MapError(f"row {y} has {len(row)} cells, expected {width}")
        for x, sym in enumerate(row):
            if sym not in _SYMBOLS:
                raise MapError(f"unknown symbol {sym!r} at ({x}, {y})")
            if sym == "E":
                if ego_start is not None:
                    raise MapError(f"duplicate ego start at ({x}, {y}); "
                                   f"first at {ego_start}")
                ego_start = (x, y)
            elif sym == "a":
                adv_starts.append((x, y))
            elif sym == "H":
                if ego_home is not None:
                    raise MapError(f"duplicate ego home at ({x}, {y})")
                ego_home = (x, y)
            elif sym == "h":
                if adv_home is not None:
                    raise MapError(f"duplicate adversary home at ({x}, {y})")
                adv_home = (x, y)
    if ego_start is None:
        raise MapError("ego start undefined")
    if not adv_starts:
        raise MapError("adversary start undefined")
    if ego_home is None:
        raise MapError("ego home undefined")
    if adv_home is None:
        raise MapError("adversary home undefined")
    return GridConfig(width, height, ego_start, tuple(adv_starts), ego_home, adv_home,
                      **overrides)


def load_map_file(path, **overrides) -> GridConfig:
    from pathlib import Path
    return load_map(Path(path).read_text(encoding="utf-8"), **overrides)


def render(cfg: GridConfig, s: GridState = None) -> str:
    """ASCII picture of the map, optionally with agent positions."""
    cells = [["." for _ in range(cfg.width)] for _ in range(cfg.height)]
    for x, y in cfg.adv_starts:
        cells[y][x] = "a"
    cells[cfg.ego_start[1]][cfg.ego_start[0]] = "E"
    cells[cfg.ego_home[1]][cfg.ego_home[0]] = "H"
    cells[cfg.adv_home[1]][cfg.adv_home[0]] = "h"
    if s is not None:
        cells[s.adv[1]][s.adv[0]] = "A"
        cells[s.ego[1]][s.ego[0]] = "@" if s.ego == s.adv else "G"
    return "\n".join(" ".join(r) for r in cells)

