import numpy as np
import pytest

from rateroute import Demand, Instance, StepCost
from rateroute.model import make_network


@pytest.fixture
def path_graph():
    return make_network([("a", "b"), ("b", "c")])


@pytest.fixture
def diamond():
    return make_network([("s", "a"), ("a", "t"), ("s", "b"), ("b", "t")])


@pytest.fixture
def diamond_instance(diamond):
    return Instance(diamond, (Demand("s", "t"), Demand("s", "t")), StepCost((1, 2), (1, 10)))


@pytest.fixture
def k4():
    return make_network([(u, v) for i, u in enumerate("abcd") for v in "abcd"[i + 1:]])


@pytest.fixture
def convex_cost():
    # fits beta = 2.25 > 1
    return StepCost((2, 4), (1, 8))


@pytest.fixture(params=["python", "cython"])
def backend(request):
    from rateroute.kernels import get_backend

    try:
        return get_backend(request.param)
    except ImportError:
        pytest.skip("compiled kernels not built")


def random_cost(rng: np.random.Generator, m: int, sigma: float, max_rate: int = 40) -> StepCost:
    rates = np.sort(rng.choice(np.arange(1, max_rate + 1), size=m, replace=False))
    if rates[-1] <= 1:
        rates[-1] = 2
    costs = [float(rng.uniform(0.5, 10))]
    for _ in range(m - 1):
        costs.append(costs[-1] * float(rng.uniform(1.0, sigma)))
    return StepCost(tuple(int(r) for r in rates), tuple(costs))
