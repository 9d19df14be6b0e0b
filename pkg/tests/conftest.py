import random
from pathlib import Path

import pytest

from qrmsg.gridworld import GridGame, load_map_file
from qrmsg.reward_machine import load_rm
from qrmsg.sgrm import ProductGame

DATA = Path(__file__).resolve().parents[1] / "src" / "qrmsg" / "data"
MAPS, RMS, CONFIGS = DATA / "maps", DATA / "rms", DATA / "configs"

CASES = {
    "case1": ("case12.map", "case1"),
    "case2": ("case12.map", "case23"),
    "case3": ("case3.map", "case23"),
}


def case_env(name, **grid_kw):
    map_name, rm_name = CASES[name]
    cfg = load_map_file(MAPS / map_name, **grid_kw)
    return ProductGame(GridGame(cfg), load_rm(RMS / f"{rm_name}_ego.rm"),
                       load_rm(RMS / f"{rm_name}_adv.rm"))


@pytest.fixture
def fig1b():
    return load_rm(RMS / "fig1b_ego.rm"), load_rm(RMS / "fig1b_adv.rm")


@pytest.fixture
def rng():
    return random.Random(1234)



ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
