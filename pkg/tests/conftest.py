import numpy as np
import pytest

from forestnets.network import build_network

import netdefs


@pytest.fixture
def two_asym():
    n, edges = netdefs.TWO_ASYM
    return build_network(edges, n)


@pytest.fixture
def cycle3():
    n, edges = netdefs.CYCLE3
    return build_network(edges, n)


@pytest.fixture
def path3():
    n, edges = netdefs.PATH3
    return build_network(edges, n)


@pytest.fixture
def path5():
    n, edges = netdefs.PATH5
    return build_network(edges, n)


@pytest.fixture
def star4():
    n, edges = netdefs.STAR4
    return build_network(edges, n)


def small_graph_items():
    return sorted(netdefs.SMALL_GRAPHS.items())


def rng_checks(seed=0):
    return np.random.default_rng(seed)
