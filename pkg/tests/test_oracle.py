"""Frozen-value and contract tests for the determinantal oracle.

The numeric literals here were derived independently (hand calculation and
the enumeration oracle in forest_enum.py) before the implementation was
written.
"""

import math

import numpy as np
import pytest

from forestnets import oracle
from forestnets.errors import (
    InvalidParams,
    InvalidStart,
    NotSelfAvoiding,
    UnknownEdge,
    ZeroCoefficient,
)
from forestnets.network import build_network

import netdefs


# -- Green's function -------------------------------------------------------


def test_green_two_asym(two_asym):
    gk = oracle.green(two_asym, 3.0)
    np.testing.assert_allclose(gk.G, np.array([[4, 2], [1, 5]]) / 18, atol=1e-12)
    np.testing.assert_allclose(
        gk.K, [[2 / 3, 1 / 3], [1 / 6, 5 / 6]], atol=1e-12
    )


def test_green_rows_sum_to_one_without_roots():
    for name, (n, edges) in netdefs.SMALL_GRAPHS.items():
        net = build_network(edges, n)
        for q in (0.3, 1.0, 7.0):
            K = oracle.green(net, q).K
            assert np.abs(K.sum(axis=1) - 1.0).max() <= 1e-10, (name, q)
            assert K.min() >= -1e-12, (name, q)


def test_green_forced_roots_zero_rows(two_asym):
    gk = oracle.green(two_asym, 3.0, B=[1])
    assert gk.G[1, 0] == 0.0 and gk.G[1, 1] == 0.0 and gk.G[0, 1] == 0.0
    # remaining block solves (q Id - L) restricted to {0}: (3+2) g = 1
    assert gk.G[0, 0] == pytest.approx(1 / 5, abs=1e-12)


def test_green_requires_positive_q_or_roots(two_asym):
    with pytest.raises(InvalidParams):
        oracle.green(two_asym, 0.0)
    oracle.green(two_asym, 0.0, B=[0])  # fine
    with pytest.raises(InvalidParams):
        oracle.green(two_asym, -1.0)


# -- partition function -----------------------------------------------------


def test_partition_fn_two_asym(two_asym):
    assert oracle.partition_fn(two_asym, 3.0) == pytest.approx(18.0, rel=1e-12)


def test_partition_fn_cycle3(cycle3):
    assert oracle.partition_fn(cycle3, 1.0) == pytest.approx(7.0, rel=1e-12)


def test_partition_fn_full_root_set(two_asym):
    assert oracle.partition_fn(two_asym, 3.0, B=[0, 1]) == 1.0


def test_partition_fn_eigenvalue_product(two_asym):
    # eigenvalues of -L are 0 and 3, so Z(q) = q (q + 3)
    for q in (0.5, 1.0, 3.0, 10.0):
        assert oracle.partition_fn(two_asym, q) == pytest.approx(
            q * (q + 3.0), rel=1e-12
        )


# -- inclusion probabilities ------------------------------------------------


def test_root_inclusion_two_asym(two_asym):
    assert oracle.root_inclusion_prob(two_asym, 3.0, [0]) == pytest.approx(2 / 3)
    assert oracle.root_inclusion_prob(two_asym, 3.0, [1]) == pytest.approx(5 / 6)
    assert oracle.root_inclusion_prob(two_asym, 3.0, [0, 1]) == pytest.approx(0.5)


def test_root_inclusion_forced_roots_count_as_sure(two_asym):
    assert oracle.root_inclusion_prob(two_asym, 3.0, [1], B=[1]) == 1.0
    assert oracle.root_inclusion_prob(two_asym, 3.0, [], B=[1]) == 1.0


def test_edge_inclusion_two_asym(two_asym):
    assert oracle.edge_inclusion_prob(two_asym, 3.0, [(0, 1)]) == pytest.approx(
        1 / 3
    )
    assert oracle.edge_inclusion_prob(two_asym, 3.0, [(1, 0)]) == pytest.approx(
        1 / 6
    )
    # two opposite edges would close a cycle: probability zero
    assert oracle.edge_inclusion_prob(
        two_asym, 3.0, [(0, 1), (1, 0)]
    ) == pytest.approx(0.0, abs=1e-12)


def test_edge_inclusion_signed_orientation(path3):
    # on the undirected path, seeing 0-1 in either orientation is the
    # complement of both endpoints being isolated from each other
    q = 1.0
    either = oracle.edge_inclusion_prob(path3, q, [(0, 1)], signed=True)
    forward = oracle.edge_inclusion_prob(path3, q, [(0, 1)])
    backward = oracle.edge_inclusion_prob(path3, q, [(1, 0)])
    assert either == pytest.approx(forward + backward, abs=1e-12)


def test_edge_inclusion_unknown_edge(two_asym):
    with pytest.raises(UnknownEdge):
        oracle.edge_inclusion_prob(two_asym, 3.0, [(0, 0)])


def test_root_vertex_has_no_outgoing_edge(two_asym):
    # an edge out of a forced root never appears
    assert oracle.edge_inclusion_prob(
        two_asym, 3.0, [(0, 1)], B=[0]
    ) == pytest.approx(0.0, abs=1e-12)


# -- root count law ---------------------------------------------------------


def test_root_count_law_two_asym(two_asym):
    law = oracle.root_count_law(two_asym, 3.0)
    d = law.as_dict()
    assert d[1] == pytest.approx(0.5, abs=1e-12)
    assert d[2] == pytest.approx(0.5, abs=1e-12)
    assert d.get(0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert law.mean == pytest.approx(1.5, abs=1e-12)
    assert law.variance == pytest.approx(0.25, abs=1e-12)


def test_root_count_law_cycle3_complex_pair(cycle3):
    # spectrum of -L is {0, 3/2 +- i sqrt(3)/2}: one forced Bernoulli(1)
    # and one conjugate-pair variable
    law = oracle.root_count_law(cycle3, 1.0)
    d = law.as_dict()
    assert d[1] == pytest.approx(3 / 7, abs=1e-9)
    assert d[2] == pytest.approx(3 / 7, abs=1e-9)
    assert d[3] == pytest.approx(1 / 7, abs=1e-9)


def test_root_count_moments_match_pmf():
    for name, (n, edges) in netdefs.SMALL_GRAPHS.items():
        net = build_network(edges, n)
        for q in (0.5, 2.0):
            law = oracle.root_count_law(net, q)
            mean_pmf = float((law.counts * law.pmf).sum())
            var_pmf = float(((law.counts - mean_pmf) ** 2 * law.pmf).sum())
            assert law.mean == pytest.approx(mean_pmf, abs=1e-9), name
            assert law.variance == pytest.approx(var_pmf, abs=1e-9), name


def test_root_count_variance_at_most_twice_mean():
    for name, (n, edges) in netdefs.SMALL_GRAPHS.items():
        net = build_network(edges, n)
        for q in (0.1, 1.0, 10.0):
            mean, var = oracle.root_count_moments(net, q)
            assert var <= 2.0 * mean + 1e-12, (name, q)


def test_root_count_with_forced_roots(two_asym):
    law = oracle.root_count_law(two_asym, 3.0, B=[1])
    d = law.as_dict()
    # remaining spectrum is {2} (rate out of vertex 0): Bernoulli(3/5)
    assert d[1] == pytest.approx(2 / 5, abs=1e-12)
    assert d[2] == pytest.approx(3 / 5, abs=1e-12)


# -- loop-erased walk path law ----------------------------------------------


def test_lerw_two_asym(two_asym):
    assert oracle.lerw_path_prob(two_asym, 3.0, [0]) == pytest.approx(2 / 3)
    assert oracle.lerw_path_prob(two_asym, 3.0, [0, 1]) == pytest.approx(1 / 3)
    assert oracle.lerw_path_prob(two_asym, 3.0, [0, 1], B=[1]) == pytest.approx(
        2 / 5
    )


def test_lerw_validation(two_asym):
    with pytest.raises(NotSelfAvoiding):
        oracle.lerw_path_prob(two_asym, 3.0, [0, 1, 0])
    with pytest.raises(InvalidStart):
        oracle.lerw_path_prob(two_asym, 3.0, [1], B=[1])
    with pytest.raises(InvalidParams):
        oracle.lerw_path_prob(two_asym, 3.0, [])


def test_lerw_missing_edge_probability_zero(path3):
    # 0 -> 2 is not an edge on the path graph
    assert oracle.lerw_path_prob(path3, 1.0, [0, 2]) == 0.0


# -- hitting times ----------------------------------------------------------


def test_hitting_times_two_asym(two_asym):
    np.testing.assert_allclose(
        oracle.hitting_times(two_asym, [1]), [0.5, 0.0], atol=1e-12
    )


def test_hitting_times_path3(path3):
    np.testing.assert_allclose(
        oracle.hitting_times(path3, [0]), [0.0, 2.0, 3.0], atol=1e-10
    )


def test_hitting_times_need_target(two_asym):
    with pytest.raises(InvalidParams):
        oracle.hitting_times(two_asym, [])


# -- mean time to reach the random roots -------------------------------------


def test_mean_root_hitting_two_asym(two_asym):
    assert oracle.mean_root_hitting(two_asym, 3.0) == pytest.approx(1 / 6)


def test_mean_root_hitting_cycle3(cycle3):
    # complex spectrum: (1/q)(1 - prod lam/(q+lam)) = 1 - 3/7 = 4/7 at q=1
    assert oracle.mean_root_hitting(cycle3, 1.0) == pytest.approx(4 / 7)


def test_mean_root_hitting_conditional_two_asym(two_asym):
    # det(x Id - L) = x^2 + 3x: a_1 = 3, a_2 = 1, a_3 = 0
    assert oracle.mean_root_hitting_conditional(two_asym, 1) == pytest.approx(
        1 / 3
    )
    assert oracle.mean_root_hitting_conditional(two_asym, 2) == 0.0
    with pytest.raises(InvalidParams):
        oracle.mean_root_hitting_conditional(two_asym, 0)


def test_charpoly_coeffs_two_asym(two_asym):
    a = oracle.charpoly_root_coeffs(two_asym)
    np.testing.assert_allclose(a, [0.0, 3.0, 1.0], atol=1e-12)
