import pytest

from adicdoubling import AdicInterval, find_x, lebesgue_tree, reweight_two_sided
from adicdoubling.measures import build_finite_base_measure, default_epsilon_schedule


def build_stage_tree(max_alpha: int):
    """The canonical q=2, a=1/2, b=3/2 tree with stage alpha at [alpha, alpha+1)."""
    tree = lebesgue_tree()
    for alpha in range(1, max_alpha + 1):
        reweight_two_sided(tree, AdicInterval(2, 0, alpha + 1), alpha)
    return tree


@pytest.fixture(scope="session")
def ten_stage_tree():
    return build_stage_tree(10)


@pytest.fixture(scope="session")
def eight_stage_tree():
    return build_stage_tree(8)


@pytest.fixture(scope="session")
def finite_certs_35():
    return [
        find_x([3, 5], default_epsilon_schedule(alpha), x_max=10**6)
        for alpha in (1, 2, 3)
    ]


@pytest.fixture(scope="session")
def finite_tree_35(finite_certs_35):
    return build_finite_base_measure([3, 5], [1, 2, 3], finite_certs_35)


@pytest.fixture(scope="session")
def single_stage_tree():
    """One stage, alpha=1, anchored on [0, 1): pieces 1/4, 3/4, 3/4, 9/4."""
    tree = lebesgue_tree()
    reweight_two_sided(tree, AdicInterval(2, 0, 1), 1)
    return tree
