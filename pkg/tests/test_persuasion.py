import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brue.envelope import envelope_values, lower_hull
from brue.equilibrium import solve_ue
from brue.errors import NetworkFormatError, UnsupportedStateSpace
from brue.network import CostPolynomial
from brue.persuasion import (
    Belief,
    SignalScheme,
    StochasticNetwork,
    belief_curve,
    blackwell_compare,
    design_signal,
    epsilon_infinity,
    epsilon_infinity_is_exact,
    expected_realized_cost,
    load_stochastic_network,
    posterior_excess_report,
    posterior_network,
    psi_eps_at_belief,
)
from brue.topologies import make_n1, make_two_road
from brue.worstcase import worst_brue

import oracles


def scheme(p, q, nu=0.5):
    t = (q - nu) / (q - p)
    return SignalScheme.from_posteriors(Belief.binary(nu), [Belief.binary(p), Belief.binary(q)], [t, 1 - t])


FULL = scheme(0.0, 1.0)
NONE = SignalScheme.no_revelation(Belief.binary(0.5))


class TestBelief:
    def test_rejects_non_simplex(self):
        with pytest.raises(ValueError):
            Belief(np.array([0.6, 0.6]))
        with pytest.raises(ValueError):
            Belief(np.array([-0.1, 1.1]))

    def test_binary_and_hash(self):
        b = Belief.binary(0.3)
        assert b.p1 == pytest.approx(0.3)
        assert b == Belief(np.array([0.7, 0.3]))
        assert len({b, Belief.binary(0.3)}) == 1

    def test_scalar_needs_two_states(self):
        with pytest.raises(UnsupportedStateSpace):
            Belief(np.array([0.2, 0.3, 0.5])).p1


class TestPosteriorNetwork:
    def test_n1_middle(self, n1):
        net = posterior_network(n1, 0.5)
        upper = net.edges[net.edge_index["upper"]].cost
        assert upper.coefficients == pytest.approx((1.8, 0.1))

    @pytest.mark.parametrize("mu", [0.0, 1.0])
    def test_point_mass_is_state(self, n2, mu):
        net = posterior_network(n2, mu)
        state = n2.state_network(int(mu))
        assert [e.cost for e in net.edges] == [e.cost for e in state.edges]

    def test_length_mismatch(self, n1):
        with pytest.raises(ValueError):
            posterior_network(n1, [0.2, 0.3, 0.5])

    def test_single_state_is_deterministic(self):
        base = make_two_road()
        snet = StochasticNetwork(base, (tuple(e.cost for e in base.edges),), Belief(np.array([1.0])))
        assert psi_eps_at_belief(snet, [1.0], 0.5) == pytest.approx(worst_brue(base, None, 0.5).psi_eps)

    def test_n1_half_at_zero(self, n1):
        assert psi_eps_at_belief(n1, 0.5, 0.0) == pytest.approx(11 / 6, abs=1e-9)


class TestPsiAtBelief:
    @pytest.mark.parametrize("mu", [0.0, 0.3, 0.5, 0.8, 1.0])
    @pytest.mark.parametrize("eps", [0.0, 0.04, 0.1])
    def test_n1_matches_brute_force(self, n1, mu, eps):
        assert psi_eps_at_belief(n1, mu, eps) == pytest.approx(oracles.n1_worst_direct(mu, eps), abs=2e-4)

    @pytest.mark.parametrize("mu", [0.0, 0.25, 0.5, 0.9])
    @pytest.mark.parametrize("eps", [0.3, 0.9, 1.2, 2.0])
    def test_n2_matches_brute_force(self, n2, mu, eps):
        assert psi_eps_at_belief(n2, mu, eps) == pytest.approx(oracles.n2_worst_direct(mu, eps), abs=1e-4)

    @pytest.mark.parametrize("mu", np.linspace(0, 1, 6).tolist())
    @pytest.mark.parametrize("eps", [0.01, 0.07])
    def test_n1_closed_form(self, n1, mu, eps):
        assert psi_eps_at_belief(n1, mu, eps) == pytest.approx(oracles.n1_formula(mu, eps), abs=1e-6)

    def test_formula_transcriptions_agree(self):
        from brue.reference import n1_psi, n2_psi

        for mu in np.linspace(0, 1, 11):
            for eps in np.linspace(0, 2, 21):
                assert n2_psi(mu, eps) == pytest.approx(oracles.n2_formula(mu, eps), abs=1e-12)
                assert n1_psi(mu, eps / 20) == pytest.approx(oracles.n1_formula(mu, eps / 20), abs=1e-12)


class TestEpsilonInfinity:
    def test_values(self, n1, n2):
        assert epsilon_infinity(n1) == pytest.approx(2.0)
        assert epsilon_infinity(n2) == pytest.approx(2.0)
        assert epsilon_infinity_is_exact(n1)

    def test_curve_convex_above(self, n2):
        mus, vals = belief_curve(n2, epsilon_infinity(n2) + 0.1, grid_size=101)
        assert np.diff(vals, 2).min() >= -1e-6


class TestDesign:
    def test_n1_no_revelation(self, n1):
        s, cost = design_signal(n1, 0.02)
        assert s.kind == "none" and s.posteriors[0] == n1.prior
        assert cost == pytest.approx(oracles.n1_formula(0.5, 0.02), abs=1e-9)

    def test_n1_partial(self, n1):
        s, cost = design_signal(n1, 0.05)
        lo, hi = s.hull()
        assert s.kind == "partial"
        assert hi == pytest.approx(1.0, abs=1e-9)
        assert lo == pytest.approx(oracles.n1_p(0.05), abs=1e-6)
        assert lo == pytest.approx(0.30217, abs=1e-5)

    def test_n1_full(self, n1):
        assert design_signal(n1, 0.095)[0].kind == "full"

    def test_n2_full(self, n2):
        s, cost = design_signal(n2, 1.0)
        assert s.kind == "full"
        assert s.weights == pytest.approx([0.5, 0.5])
        assert cost == pytest.approx(0.5 * (oracles.n2_formula(0, 1) + oracles.n2_formula(1, 1)), abs=1e-9)

    def test_conditional_full(self, n2):
        s, _ = design_signal(n2, 1.0, grid_size=201)
        assert np.allclose(s.conditional, np.eye(2), atol=1e-9)

    def test_more_states_refused(self):
        snet = _three_state()
        with pytest.raises(UnsupportedStateSpace):
            design_signal(snet, 0.1)

    def test_more_states_best_effort(self):
        snet = _three_state()
        s, cost = design_signal(snet, 0.1, grid_size=60, best_effort=True)
        assert s.approximate
        assert len(s.posteriors) <= 3
        mean = s.weights @ np.array([b.probabilities for b in s.posteriors])
        assert mean == pytest.approx(snet.prior.probabilities, abs=1e-9)
        assert cost <= psi_eps_at_belief(snet, snet.prior, 0.1) + 1e-9

    def test_negative_eps(self, n1):
        with pytest.raises(ValueError):
            design_signal(n1, -1.0)

    def test_realized_matches_design(self, n1):
        s, cost = design_signal(n1, 0.06, grid_size=401)
        assert expected_realized_cost(n1, s, 0.06) == pytest.approx(cost, abs=1e-9)

    def test_realized_under_misspecification(self, n1):
        s, _ = design_signal(n1, 0.09, grid_size=401)
        assert expected_realized_cost(n1, s, 0.0) > psi_eps_at_belief(n1, 0.5, 0.0) + 1e-6

    def test_realized_no_revelation(self, n2):
        assert expected_realized_cost(n2, NONE, 0.4) == pytest.approx(psi_eps_at_belief(n2, 0.5, 0.4))


def _three_state():
    n1 = make_n1()
    extra = tuple(
        CostPolynomial((1.7, 0.1)) if e.id == "upper" else e.cost for e in n1.base.edges
    )
    return StochasticNetwork(
        n1.base, n1.state_costs + (extra,), Belief(np.array([0.3, 0.3, 0.4])), ("a", "b", "c")
    )


@pytest.fixture(scope="module")
def n1_designs():
    net = make_n1()
    out = {}
    for eps in (0.03, 0.05, 0.08):
        curve = belief_curve(net, eps, grid_size=401)
        out[eps] = (curve, design_signal(net, eps, grid_size=401, curve=curve))
    return net, out


class TestSchemeProperties:
    def test_bayes_plausible_and_small_support(self, n1_designs):
        net, out = n1_designs
        for _, (s, _) in out.values():
            assert len(s.posteriors) <= 2
            assert s.weights @ [b.p1 for b in s.posteriors] == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("eps", [0.03, 0.05, 0.08])
    def test_envelope_optimal(self, n1_designs, eps):
        net, out = n1_designs
        (mus, vals), (s, cost) = out[eps]
        rng = np.random.default_rng(7)
        for _ in range(100):
            p = rng.uniform(0, 0.5)
            q = rng.uniform(0.5, 1)
            t = (q - 0.5) / (q - p)
            alt = t * oracles.n1_formula(p, eps) + (1 - t) * oracles.n1_formula(q, eps)
            assert cost <= alt + 1e-6

    def test_hulls_nested(self, n1_designs):
        _, out = n1_designs
        hulls = [out[e][1][0].hull() for e in (0.03, 0.05, 0.08)]
        for (a_lo, a_hi), (b_lo, b_hi) in zip(hulls, hulls[1:]):
            assert b_lo <= a_lo + 1e-12 and b_hi >= a_hi - 1e-12


class TestSchemeValidation:
    def test_not_plausible(self):
        with pytest.raises(ValueError):
            SignalScheme.from_posteriors(Belief.binary(0.5), [Belief.binary(0.1), Belief.binary(0.2)], [0.5, 0.5])

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            SignalScheme.from_posteriors(Belief.binary(0.5), [Belief.binary(0.0), Belief.binary(1.0)], [0.7, 0.7])

    def test_bad_conditional(self):
        prior = Belief.binary(0.5)
        posts = (Belief.binary(0.0), Belief.binary(1.0))
        with pytest.raises(ValueError):
            SignalScheme(prior, posts, np.array([0.5, 0.5]), np.array([[0.5, 0.5], [0.5, 0.5]]))

    def test_kinds(self):
        assert NONE.kind == "none" and FULL.kind == "full" and scheme(0.2, 1.0).kind == "partial"

    def test_prior_on_boundary(self):
        s = SignalScheme.no_revelation(Belief.binary(0.0))
        assert s.conditional.shape == (2, 1)


class TestBlackwell:
    def test_extremes(self):
        assert blackwell_compare(FULL, NONE) == "more"
        assert blackwell_compare(NONE, FULL) == "less"

    def test_equal(self):
        assert blackwell_compare(scheme(0.2, 0.9), scheme(0.2, 0.9)) == "equal"

    def test_nested(self):
        assert blackwell_compare(scheme(0.1, 1.0), scheme(0.3, 1.0)) == "more"

    def test_crossing(self):
        assert blackwell_compare(scheme(0.1, 0.6), scheme(0.3, 0.9)) == "incomparable"

    def test_different_priors(self):
        assert blackwell_compare(scheme(0, 1, 0.5), scheme(0, 1, 0.4)) == "incomparable"

    def test_three_states(self):
        s = SignalScheme.no_revelation(Belief(np.array([0.2, 0.3, 0.5])))
        with pytest.raises(UnsupportedStateSpace):
            blackwell_compare(s, s)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 49), st.integers(0, 49), st.integers(51, 100), st.integers(51, 100))
    def test_matches_interval_containment(self, i1, i2, j1, j2):
        # a 0.01 lattice keeps distinct posteriors far apart relative to the tolerance
        p1, p2, q1, q2 = i1 / 100, i2 / 100, j1 / 100, j2 / 100
        a, b = scheme(p1, q1), scheme(p2, q2)
        got = blackwell_compare(a, b)
        contains = p1 <= p2 and q1 >= q2
        inside = p2 <= p1 and q2 >= q1
        if contains and inside:
            assert got == "equal"
        elif contains:
            assert got == "more"
        elif inside:
            assert got == "less"
        else:
            assert got == "incomparable"


class TestPosteriorReport:
    def test_ue_flows_zero(self, n1):
        flows = [solve_ue(posterior_network(n1, b), paths=None).flow.values for b in FULL.posteriors]
        rep = posterior_excess_report(n1, FULL, flows)
        assert rep.expected_excess == pytest.approx(0, abs=1e-9)
        assert rep.expected_eps == pytest.approx(0, abs=1e-9)

    def test_degenerate_is_deterministic(self, n2):
        net = posterior_network(n2, 0.5)
        res = worst_brue(net, None, 0.4)
        rep = posterior_excess_report(n2, NONE, [res.witness])
        psi0 = solve_ue(net).psi0
        assert rep.expected_excess == pytest.approx(res.psi_eps - psi0, abs=1e-9)
        assert rep.ratio == pytest.approx(rep.expected_excess / rep.expected_eps)

    def test_witness_ratio_bounded(self, n1):
        s, _ = design_signal(n1, 0.05, grid_size=201)
        flows = [worst_brue(posterior_network(n1, b), None, 0.05).witness for b in s.posteriors]
        rep = posterior_excess_report(n1, s, flows)
        # two parallel roads: excess never exceeds the threshold
        assert rep.ratio <= 1 + 1e-6

    def test_flow_count(self, n1):
        with pytest.raises(ValueError):
            posterior_excess_report(n1, FULL, [[1, 0]])


class TestEnvelope:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=25))
    def test_matches_chord_oracle(self, ys):
        xs = np.linspace(0, 1, len(ys))
        env = envelope_values(xs, np.array(ys))
        for i in range(len(xs)):
            assert env[i] == pytest.approx(oracles.envelope_at(xs, ys, xs[i]), abs=1e-9)

    def test_collinear_kept(self):
        idx = lower_hull(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.5, 1.0]))
        assert list(idx) == [0, 1, 2]

    def test_needs_increasing(self):
        with pytest.raises(ValueError):
            lower_hull(np.array([0.0, 0.0]), np.array([1.0, 2.0]))


class TestFormat:
    def test_round_trip(self, n2, tmp_path):
        path = tmp_path / "n2.json"
        path.write_text(json.dumps(n2.to_dict()))
        back = load_stochastic_network(path)
        assert back.state_costs == n2.state_costs
        assert back.prior == n2.prior and back.state_names == n2.state_names

    def test_only_differences_written(self, n1):
        doc = n1.to_dict()
        assert doc["states"][0]["edge_costs"] == {}
        assert set(doc["states"][1]["edge_costs"]) == {"upper"}

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("states"),
            lambda d: d.__setitem__("states", []),
            lambda d: d["states"][0].__setitem__("edge_costs", {"nope": [1]}),
            lambda d: d["states"][0].pop("prior"),
            lambda d: d["states"][0].__setitem__("prior", 0.9),
        ],
    )
    def test_malformed(self, n1, tmp_path, mutate):
        doc = n1.to_dict()
        mutate(doc)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(NetworkFormatError):
            load_stochastic_network(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        with pytest.raises(NetworkFormatError):
            load_stochastic_network(path)

    def test_state_mismatch(self, n1):
        with pytest.raises(ValueError):
            StochasticNetwork(n1.base, n1.state_costs, Belief(np.array([0.2, 0.3, 0.5])))
        assert math.isclose(n1.prior.p1, 0.5)
