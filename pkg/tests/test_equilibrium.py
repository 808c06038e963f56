import numpy as np
import pytest

from brue.equilibrium import min_social_cost, solve_ue, system_optimum
from brue.errors import NotConverged
from brue.functionals import social_cost
from brue.persuasion import posterior_network
from brue.topologies import make_n2, make_parallel, make_two_road, make_wheatstone, make_wheatstone_chain

import oracles

EXAMPLES = [make_wheatstone(), make_two_road(), make_wheatstone_chain(2, 0.1), make_wheatstone_chain(3, 1e-3), make_parallel([[0.5, 1.0], [1.0, 0.0, 1.0], [0.2, 2.0]])]


def test_two_road():
    sol = solve_ue(make_two_road())
    assert sol.psi0 == pytest.approx(1.0)
    assert np.allclose(sol.flow.values, [1.0, 0.0])


def test_wheatstone_costs(wheatstone):
    net, paths = wheatstone
    sol = solve_ue(net, paths=paths)
    assert sol.psi0 == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(sol.flow.path_costs, 1.0, atol=1e-9)
    assert np.allclose(sol.edge_costs, [0.5, 0.5, 0.0, 0.5, 0.5], atol=1e-9)


def test_n2_posterior_half():
    net = posterior_network(make_n2(), 0.5)
    sol = solve_ue(net)
    assert sol.psi0 == pytest.approx(1.0)
    assert np.allclose(sol.flow.values, [0.5, 0.5])


@pytest.mark.parametrize("net", EXAMPLES, ids=lambda n: n.name)
def test_gap_and_consistency(net):
    sol = solve_ue(net, tol=1e-9)
    assert sol.relative_gap <= 1e-9
    assert sol.psi0 == pytest.approx(social_cost(sol.flow), rel=1e-9)


@pytest.mark.parametrize("net", EXAMPLES, ids=lambda n: n.name)
def test_essential_uniqueness(net):
    a = solve_ue(net, seed=1)
    b = solve_ue(net, seed=2)
    assert np.abs(a.edge_costs - b.edge_costs).max() <= 1e-6


@pytest.mark.parametrize("net", [make_two_road(), make_parallel([[0.5, 1.0], [0.2, 2.0]]), make_wheatstone()], ids=lambda n: n.name)
def test_frank_wolfe_agrees(net):
    fw = solve_ue(net, tol=1e-5, method="fw")
    pw = solve_ue(net)
    # the duality gap bounds the potential error, not the social cost
    assert 0 <= fw.phi0 - pw.phi0 <= 1e-5 * fw.phi0 + 1e-12


def test_not_converged_carries_best():
    net = make_wheatstone_chain(3, 1e-3)
    with pytest.raises(NotConverged) as info:
        solve_ue(net, tol=1e-14, max_iters=1, method="fw")
    assert info.value.best is not None
    assert info.value.best.relative_gap > 1e-14


def test_bad_arguments():
    with pytest.raises(ValueError):
        solve_ue(make_two_road(), tol=0)
    with pytest.raises(ValueError):
        solve_ue(make_two_road(), method="newton")


def test_system_optimum_examples():
    assert min_social_cost(make_two_road(0.1, 0.01)) == pytest.approx(0.01)
    assert np.allclose(system_optimum(make_two_road(0.1, 0.01)).values, [0, 1])
    one = make_parallel([[1.0, 2.0]])
    assert min_social_cost(one) == pytest.approx(3.0)


def test_wheatstone_system_optimum_against_lattice():
    # the lattice oracle gives 1, not 7/8
    assert min_social_cost(make_wheatstone()) == pytest.approx(oracles.wheatstone_min_social(1e-3), abs=1e-6)
    assert min_social_cost(make_wheatstone()) == pytest.approx(1.0, abs=1e-9)
