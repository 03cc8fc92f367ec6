import random
import sys
from fractions import Fraction as F
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from binpack_games.model import Instance, load_instance, load_packing

DATA = Path(__file__).parent / "data"


@pytest.fixture
def j1():
    return load_instance(DATA / "j1.json"), load_packing(DATA / "j1_packing.json")


@pytest.fixture
def j2():
    return load_instance(DATA / "j2.json"), load_packing(DATA / "j2_packing.json")


def random_instance(rng: random.Random, n_max: int, unit: bool = True, den: int = 100, n_min: int = 1,
                    small_bias: bool = False):
    n = rng.randint(n_min, n_max)
    sizes = []
    for _ in range(n):
        hi = den // 2 if (small_bias and rng.random() < 0.7) else den
        sizes.append(F(rng.randint(1, hi), den))
    weights = [F(1)] * n if unit else [F(rng.randint(1, 9), rng.choice((1, 2, 3))) for _ in range(n)]
    return Instance.from_sizes(sizes, weights)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
