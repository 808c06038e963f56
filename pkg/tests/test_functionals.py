import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brue.equilibrium import solve_ue
from brue.functionals import (
    epsilon_threshold,
    evaluate_batch,
    is_brue,
    path_cost,
    potential,
    random_flows,
    social_cost,
    variational_gap,
)
from brue.network import PathFlow, enumerate_paths
from brue.topologies import make_parallel, make_two_road, make_wheatstone, make_wheatstone_chain

import oracles

NETWORKS = {
    "wheatstone": make_wheatstone(),
    "tworoad": make_two_road(),
    "chain2": make_wheatstone_chain(2, 0.1),
    "parallel3": make_parallel([[0.5, 1.0], [1.0, 0.0, 1.0], [0.2, 2.0]]),
}
PATHS = {k: enumerate_paths(v) for k, v in NETWORKS.items()}
UE = {k: solve_ue(v, paths=PATHS[k]) for k, v in NETWORKS.items()}


def flows_of(name):
    paths = PATHS[name]

    @st.composite
    def strat(draw):
        seed = draw(st.integers(0, 2**32 - 1))
        return PathFlow(paths, random_flows(paths, 1, np.random.default_rng(seed))[0])

    return strat()


class TestExamples:
    def test_wheatstone_costs_at_middle(self, wheatstone):
        _, paths = wheatstone
        g = PathFlow(paths, [0, 1, 0])
        assert path_cost(g, 1) == 2.0
        assert path_cost(g, 0) == 1.5
        assert social_cost(g) == 2.0
        assert epsilon_threshold(g) == 0.5

    def test_wheatstone_even_split(self, wheatstone):
        _, paths = wheatstone
        f = PathFlow(paths, [0.5, 0, 0.5])
        assert social_cost(f) == pytest.approx(1.0)
        assert potential(f) == pytest.approx(0.75)
        assert epsilon_threshold(f) == 0.0

    def test_zero_costs(self):
        net = make_parallel([[], [0.0, 0.0]])
        f = PathFlow(enumerate_paths(net), [0.3, 0.7])
        assert social_cost(f) == 0 and potential(f) == 0 and path_cost(f, 0) == 0

    def test_two_road(self, tworoad):
        _, paths = tworoad
        assert potential(PathFlow(paths, [1, 0])) == 1.0
        assert epsilon_threshold(PathFlow(paths, [0, 1])) == 1.0
        assert is_brue(PathFlow(paths, [1, 0]), 0.0)
        assert not is_brue(PathFlow(paths, [0, 1]), 0.5)

    def test_variational_gap_examples(self, wheatstone):
        _, paths = wheatstone
        f = PathFlow(paths, [0, 1, 0])
        g = PathFlow(paths, [0.5, 0, 0.5])
        assert variational_gap(f, f) == 0.0
        assert variational_gap(f, g) == pytest.approx(0.0, abs=1e-15)

    def test_support_tolerance(self, tworoad):
        _, paths = tworoad
        f = PathFlow(paths, [1 - 1e-12, 1e-12])
        assert epsilon_threshold(f) == 0.0
        assert epsilon_threshold(f, support_tol=0.0) == 1.0

    def test_converse_fails(self, tworoad):
        # near-minimizers of the potential need not be eps-BRUE
        net, paths = tworoad
        phi0 = UE["tworoad"].phi0
        for eps in (0.1, 0.4, 0.9):
            x = eps / 2
            f = PathFlow(paths, [1 - x, x])
            assert potential(f) <= phi0 + eps
            assert not is_brue(f, 0.999)

    def test_ue_threshold_zero(self):
        for name in NETWORKS:
            assert epsilon_threshold(UE[name].flow) <= 1e-8


class TestBatch:
    @pytest.mark.parametrize("name", list(NETWORKS))
    def test_batch_matches_scalar(self, name):
        paths = PATHS[name]
        G = random_flows(paths, 50, np.random.default_rng(1))
        m = evaluate_batch(paths, G)
        for i in range(len(G)):
            f = PathFlow(paths, G[i])
            assert m.social_cost[i] == pytest.approx(social_cost(f), rel=1e-12)
            assert m.potential[i] == pytest.approx(potential(f), rel=1e-12)
            assert m.threshold[i] == pytest.approx(epsilon_threshold(f), abs=1e-12)

    def test_wheatstone_against_hand_costs(self, wheatstone):
        _, paths = wheatstone
        G = random_flows(paths, 200, np.random.default_rng(2))
        m = evaluate_batch(paths, G)
        cu, cm, cd = oracles.wheatstone_costs(G[:, 0], G[:, 1], G[:, 2])
        assert np.allclose(m.path_costs, np.column_stack([cu, cm, cd]))

    def test_random_flows_feasible_and_sparse(self, chain2):
        _, paths = chain2
        G = random_flows(paths, 500, np.random.default_rng(0))
        for r, t in zip(paths.trip_ranges, paths.network.trips):
            assert np.allclose(G[:, r.start : r.stop].sum(axis=1), t.demand)
        assert (G == 0).any()


class TestProperties:
    @pytest.mark.parametrize("name", list(NETWORKS))
    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_variational_inequality(self, name, data):
        f = data.draw(flows_of(name))
        g = data.draw(flows_of(name))
        assert variational_gap(f, g) <= 1e-8

    @pytest.mark.parametrize("name", list(NETWORKS))
    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_potential_bound(self, name, data):
        f = data.draw(flows_of(name))
        bound = UE[name].phi0 + NETWORKS[name].total_demand * epsilon_threshold(f)
        assert potential(f) <= bound + 1e-8

    @pytest.mark.parametrize("name", list(NETWORKS))
    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_path_and_edge_forms_agree(self, name, data):
        f = data.draw(flows_of(name))
        by_path = float(f.values @ f.path_costs)
        by_edge = float(f.edge_flow @ f.edge_costs)
        assert abs(by_path - by_edge) <= 1e-9 * (1 + by_edge)
        assert epsilon_threshold(f) >= 0

    @pytest.mark.parametrize("name", list(NETWORKS))
    def test_ue_variational_characterization(self, name):
        paths = PATHS[name]
        f = UE[name].flow
        G = random_flows(paths, 1000, np.random.default_rng(7))
        gaps = (f.values - G) @ f.path_costs
        assert gaps.max() <= 1e-7
