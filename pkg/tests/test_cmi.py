"""Conditional mutual information and the Renyi Delta families."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import random_quadruple
from rcmi import (
    AlphaEqualsOne,
    BadPartition,
    HermitianOperator,
    Ordering,
    OrthogonalityViolation,
    OutOfRange,
    Partition,
    StateSearchConfig,
    SystemLayout,
    apply_channel_local,
    classical_state,
    cmi,
    delta,
    delta_alpha,
    delta_alpha_marginals,
    delta_max,
    delta_min,
    delta_tilde_alpha,
    delta_tilde_alpha_marginals,
    fidelity,
    ghz_state,
    i_max,
    i_min,
    lie_trotter_limit,
    lie_trotter_operator,
    marginals,
    markov_state,
    max_entangled,
    naive_renyi_cmi,
    pinsker_gap,
    product_state,
    q_alpha,
    q_tilde_alpha,
    random_channel,
    random_density,
    recovered_operator,
    rel_entropy,
    renyi_cmi_sibson,
    renyi_mutual_info,
    renyi_rel_entropy,
    sandwiched_renyi_cmi,
    sibson_optimal_sigma,
    tensor,
    trial_rng,
)

ABC = Partition("A", "B", "C")
ORDERINGS = list(Ordering)


def _product(rng, dims=(2, 2, 2)):
    return product_state([random_density(SystemLayout([(x, d)]), rng, xi=1e-2) for x, d in zip("ABC", dims)])


def _markov(rng):
    lay = SystemLayout([("A", 2), ("B", 2), ("C", 4)])
    blocks = [
        (random_density(SystemLayout([("A", 2), ("L", 2)]), rng), random_density(SystemLayout([("R", 1), ("B", 2)]), rng)),
        (random_density(SystemLayout([("A", 2), ("L", 1)]), rng), random_density(SystemLayout([("R", 2), ("B", 2)]), rng)),
    ]
    return markov_state(rng.dirichlet([1.0, 1.0]), blocks, lay)


class TestOrderingAndPartition:
    """Parsing of orderings and partitions."""

    @pytest.mark.parametrize("text", ["tau-omega-theta", "tau,omega,theta", "tau omega theta"])
    def test_parse_ordering(self, text):
        assert Ordering.parse(text) is Ordering.TAU_OMEGA_THETA

    def test_bad_ordering(self):
        with pytest.raises(OutOfRange):
            Ordering.parse("tau-tau-theta")

    def test_partition_parse(self):
        assert Partition.parse("A1,A2|B|C") == Partition(("A1", "A2"), ("B",), ("C",))

    @pytest.mark.parametrize("text", ["A", "A|A|C", "|B|C"])
    def test_bad_partition(self, text):
        with pytest.raises(BadPartition):
            Partition.parse(text)

    def test_partition_not_covering_layout(self, rng):
        rho = random_density(SystemLayout([("A", 2), ("B", 2), ("C", 2), ("D", 2)]), rng)
        with pytest.raises(BadPartition):
            cmi(rho, ABC)


class TestCMI:
    """Entropy combination with strong subadditivity."""

    def test_product_is_zero(self, rng):
        assert abs(cmi(_product(rng), ABC)) <= 1e-12

    def test_ghz(self):
        assert cmi(ghz_state().density(), ABC) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_bell_pair_with_independent_c(self, rng):
        bell = max_entangled(2).density()
        rho = tensor([bell, random_density(SystemLayout([("C", 3)]), rng)])
        assert cmi(rho, ABC) == pytest.approx(2.0 * math.log(2.0), abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_strong_subadditivity(self, seed, rank):
        assert cmi(random_density(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(seed), rank=rank), ABC) >= -1e-9

    def test_markov_state_is_zero(self, rng):
        assert abs(cmi(_markov(rng), ABC)) <= 1e-9


class TestNaiveRenyi:
    """Naive combination of Renyi entropies."""

    @pytest.mark.parametrize("alpha", [0.5, 2.0])
    def test_product_is_zero(self, rng, alpha):
        assert abs(naive_renyi_cmi(_product(rng), ABC, alpha)) <= 1e-12

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
    def test_classical(self, rng, layout222, alpha):
        p = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)

        def h(q):
            return math.log(float(np.sum(q**alpha))) / (1 - alpha)

        ref = h(p.sum(1)) + h(p.sum(0)) - h(p.sum((0, 1))) - h(p)
        assert naive_renyi_cmi(classical_state(p, layout222), ABC, alpha) == pytest.approx(ref, abs=1e-12)

    @pytest.mark.parametrize("alpha", [1 - 1e-5, 1 + 1e-5])
    def test_alpha_one_limit(self, rng, layout222, alpha):
        rho = random_density(layout222, rng)
        assert naive_renyi_cmi(rho, ABC, alpha) == pytest.approx(cmi(rho, ABC), abs=1e-4)


class TestDelta:
    """The four-argument von Neumann quantity."""

    @pytest.mark.parametrize("seed", range(5))
    def test_marginals_give_cmi(self, seed):
        rho = random_density(SystemLayout([("A", 2), ("B", 3), ("C", 2)]), trial_rng(seed))
        m = marginals(rho, ABC)
        assert delta(m.rho, m.ac, m.bc, m.c) == pytest.approx(cmi(rho, ABC), abs=1e-10)

    def test_markov_marginals(self, rng):
        m = marginals(_markov(rng), ABC)
        assert abs(delta(m.rho, m.ac, m.bc, m.c)) <= 1e-9

    @pytest.mark.parametrize("seed", range(5))
    def test_decomposition(self, seed):
        rho, tau, omega, theta = random_quadruple(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(seed), xi=0.0)
        m = marginals(rho, ABC)
        rhs = (
            cmi(rho, ABC)
            + rel_entropy(m.ac, tau).value
            + rel_entropy(m.bc, theta).value
            - rel_entropy(m.c, omega).value
        )
        assert delta(rho, tau, theta, omega) == pytest.approx(rhs, abs=1e-10)

    def test_support_violation_is_infinite(self, layout222):
        rho = classical_state(np.full(8, 1 / 8), layout222)
        p = np.zeros(4)
        p[0] = 1.0
        tau = classical_state(p, layout222.sub("AC"))
        m = marginals(rho, ABC)
        assert delta(rho, tau, m.bc, m.c) == math.inf


class TestPetzDelta:
    """``Q_alpha`` and ``Delta_alpha`` over all six orderings."""

    @pytest.mark.parametrize("order", ORDERINGS, ids=lambda o: o.tag)
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.5, 2.0])
    def test_product_marginals(self, rng, order, alpha):
        m = marginals(_product(rng, (2, 3, 2)), ABC)
        assert q_alpha(m.rho, order, m.ac, m.c, m.bc, alpha) == pytest.approx(1.0, abs=1e-12)
        assert abs(delta_alpha_marginals(m.rho, ABC, alpha, order)) <= 1e-12

    @pytest.mark.parametrize("order", ORDERINGS, ids=lambda o: o.tag)
    @pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0])
    def test_classical_marginals(self, rng, layout222, order, alpha):
        p = rng.dirichlet(np.ones(8)).reshape(2, 2, 2)
        q = p.sum(1)[:, None, :] * p.sum(0)[None, :, :] / p.sum((0, 1))[None, None, :]
        ref = math.log(float(np.sum(p**alpha * q ** (1 - alpha)))) / (alpha - 1)
        rho = classical_state(p, layout222)
        assert delta_alpha_marginals(rho, ABC, alpha, order) == pytest.approx(ref, abs=1e-12)

    @pytest.mark.parametrize("order", ORDERINGS, ids=lambda o: o.tag)
    @pytest.mark.parametrize("alpha", [1 - 1e-4, 1 + 1e-4])
    def test_alpha_one_limit(self, order, alpha):
        rho, tau, omega, theta = random_quadruple(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(41))
        ref = delta(rho, tau, theta, omega)
        assert delta_alpha(rho, order, tau, omega, theta, alpha) == pytest.approx(ref, abs=2e-3)

    def test_orthogonality_violation(self, layout222):
        p = np.zeros(8)
        p[0] = 1.0
        rho = classical_state(p, layout222)
        q = np.zeros(4)
        q[3] = 1.0
        tau = classical_state(q, layout222.sub("AC"))
        m = marginals(rho, ABC)
        with pytest.raises(OrthogonalityViolation):
            q_alpha(rho, Ordering.TAU_OMEGA_THETA, tau, m.c, m.bc, 0.5)

    @pytest.mark.parametrize("seed", range(3))
    def test_monotone_under_channel_on_a(self, seed):
        rng = trial_rng(42, seed)
        lay = SystemLayout([("A", 2), ("B", 2), ("C", 2)])
        rho, tau, omega, theta = random_quadruple(lay, rng)
        ch = random_channel(2, 2, 2, rng)
        rho2, tau2 = apply_channel_local(ch, "A", rho), apply_channel_local(ch, "A", tau)
        for order in (Ordering.OMEGA_THETA_TAU, Ordering.THETA_OMEGA_TAU):
            for alpha in (0.3, 0.7, 1.5, 2.0):
                after = delta_alpha(rho2, order, tau2, omega, theta, alpha)
                assert after <= delta_alpha(rho, order, tau, omega, theta, alpha) + 1e-9


class TestSandwichedDelta:
    """``Q~_alpha`` and ``Delta~_alpha`` over all six orderings."""

    @pytest.mark.parametrize("order", ORDERINGS, ids=lambda o: o.tag)
    @pytest.mark.parametrize("alpha", [0.5, 0.8, 1.5, 3.0])
    def test_product_marginals(self, rng, order, alpha):
        assert abs(delta_tilde_alpha_marginals(_product(rng, (2, 3, 2)), ABC, alpha, order)) <= 1e-12

    @pytest.mark.parametrize("order", ORDERINGS, ids=lambda o: o.tag)
    @pytest.mark.parametrize("alpha", [0.5, 0.8, 1.5, 3.0])
    def test_paths_agree(self, order, alpha):
        rho, tau, omega, theta = random_quadruple(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(43))
        a = q_tilde_alpha(rho, order, tau, omega, theta, alpha)
        b = q_tilde_alpha(rho, order, tau, omega, theta, alpha, method="schatten")
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))

    @pytest.mark.parametrize("seed", range(5))
    def test_half_is_min_cmi(self, seed):
        rho = random_density(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(44, seed), xi=1e-3)
        m = marginals(rho, ABC)
        ref = -math.log(fidelity(rho.entries, recovered_operator(rho, ABC)))
        assert delta_tilde_alpha_marginals(rho, ABC, 0.5) == pytest.approx(ref, abs=1e-10)
        assert delta_min(m.rho, Ordering.TAU_OMEGA_THETA, m.ac, m.c, m.bc) == pytest.approx(ref, abs=1e-10)
        assert i_min(rho, ABC) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("order", ORDERINGS, ids=lambda o: o.tag)
    @pytest.mark.parametrize("alpha", [0.5, 0.8, 1.5, 3.0])
    def test_commuting_collapse(self, rng, layout222, order, alpha):
        ops = [
            classical_state(rng.dirichlet(np.ones(lay.total_dim)), lay)
            for lay in (layout222, layout222.sub("AC"), layout222.sub("C"), layout222.sub("BC"))
        ]
        rho, tau, omega, theta = ops
        a = delta_tilde_alpha(rho, order, tau, omega, theta, alpha)
        assert a == pytest.approx(delta_alpha(rho, order, tau, omega, theta, alpha), abs=1e-10)

    def test_unknown_method(self, rng, layout222):
        rho, tau, omega, theta = random_quadruple(layout222, rng)
        with pytest.raises(OutOfRange):
            q_tilde_alpha(rho, Ordering.TAU_OMEGA_THETA, tau, omega, theta, 2.0, method="bogus")

    @pytest.mark.parametrize("seed", range(3))
    def test_max_is_large_alpha_limit(self, seed):
        rho, tau, omega, theta = random_quadruple(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(45, seed))
        for order in ORDERINGS:
            big = delta_tilde_alpha(rho, order, tau, omega, theta, 128.0)
            assert abs(big - delta_max(rho, order, tau, omega, theta)) <= 0.05


class TestSibson:
    """Closed-form optimization over ``sigma_BC``."""

    @pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0])
    def test_product_optimizer(self, rng, alpha):
        rho = _product(rng, (2, 3, 2))
        m = marginals(rho, ABC)
        star = sibson_optimal_sigma(rho, ABC, alpha)
        assert_allclose(star.entries, m.bc.entries, atol=1e-12)
        assert abs(renyi_cmi_sibson(rho, ABC, alpha)) <= 1e-12

    @pytest.mark.parametrize("alpha", [0.5, 1.5, 2.0])
    def test_identity_term_vanishes_at_optimum(self, rng, layout222, alpha):
        star = sibson_optimal_sigma(random_density(layout222, rng), ABC, alpha)
        assert abs(renyi_rel_entropy(star, star, alpha).value) <= 1e-10

    @pytest.mark.parametrize("alpha", [0.5, 1.5, 3.0])
    def test_value_matches_delta_at_optimizer(self, rng, layout222, alpha):
        rho = random_density(layout222, rng)
        m = marginals(rho, ABC)
        star = sibson_optimal_sigma(rho, ABC, alpha)
        ref = delta_alpha(rho, Ordering.TAU_OMEGA_THETA, m.ac, m.c, star, alpha)
        assert renyi_cmi_sibson(rho, ABC, alpha) == pytest.approx(ref, abs=1e-10)

    def test_markov_state(self, rng):
        rho = _markov(rng)
        for alpha in (0.5, 1.5, 2.0):
            assert abs(renyi_cmi_sibson(rho, ABC, alpha)) <= 1e-8

    @pytest.mark.parametrize("alpha", [0.5, 1.5])
    def test_trivial_c_is_mutual_information(self, alpha):
        ab = random_density(SystemLayout([("A", 2), ("B", 3)]), trial_rng(9))
        rho = tensor([ab, HermitianOperator(SystemLayout([("C", 1)]), np.ones((1, 1), dtype=complex))])
        assert renyi_cmi_sibson(rho, ABC, alpha) == pytest.approx(renyi_mutual_info(ab, ["A"], alpha), abs=1e-10)


class TestMaxMinCMI:
    """Max- and min-CMI at the marginals."""

    def test_markov(self, rng):
        rho = _markov(rng)
        assert abs(i_max(rho, ABC)) <= 1e-8
        assert abs(i_min(rho, ABC)) <= 1e-8

    def test_product(self, rng):
        rho = _product(rng)
        assert abs(i_max(rho, ABC)) <= 1e-10
        assert abs(i_min(rho, ABC)) <= 1e-10

    @pytest.mark.parametrize("seed", range(10))
    def test_min_below_max(self, seed):
        rho = random_density(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(46, seed), xi=1e-3)
        assert i_min(rho, ABC) <= i_max(rho, ABC) + 1e-9


class TestPinskerGap:
    """Distance to the exp-log operator."""

    def test_markov(self, rng):
        c, dist = pinsker_gap(_markov(rng), ABC)
        assert abs(c) <= 1e-9 and dist <= 1e-7

    def test_product(self, rng):
        c, dist = pinsker_gap(_product(rng), ABC)
        assert abs(c) <= 1e-12 and dist <= 1e-10

    def test_ghz(self):
        c, dist = pinsker_gap(ghz_state().density(), ABC)
        assert c == pytest.approx(math.log(2.0))
        assert dist == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_inequality(self, seed):
        c, dist = pinsker_gap(random_density(SystemLayout([("A", 2), ("B", 2), ("C", 2)]), trial_rng(seed)), ABC)
        assert c >= dist**2 / 4 - 1e-9


class TestLieTrotter:
    """Ordered product of powers and its alpha -> 1 limit."""

    def _triple(self, rng, diagonal=False):
        lay = SystemLayout([("A", 2), ("B", 2), ("C", 2)])
        if diagonal:
            mk = lambda sub: classical_state(rng.dirichlet(np.ones(sub.total_dim)), sub)  # noqa: E731
        else:
            mk = lambda sub: random_density(sub, rng, xi=1e-2)  # noqa: E731
        return mk(lay.sub("AC")), mk(lay.sub("C")), mk(lay.sub("BC")), lay

    @pytest.mark.parametrize("alpha", [0.3, 0.9, 1.5, 3.0])
    def test_commuting_exact(self, rng, alpha):
        tau, omega, theta, lay = self._triple(rng, diagonal=True)
        a = lie_trotter_operator(tau, omega, theta, alpha, lay).entries
        b = lie_trotter_limit(tau, omega, theta, lay).entries
        assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("alpha", [1 - 1e-3, 1 + 1e-3])
    def test_limit(self, alpha):
        tau, omega, theta, lay = self._triple(trial_rng(47))
        a = lie_trotter_operator(tau, omega, theta, alpha, lay).entries
        b = lie_trotter_limit(tau, omega, theta, lay).entries
        assert np.linalg.norm(a - b, 2) <= 1e-2 * np.linalg.norm(b, 2)

    @pytest.mark.parametrize("alpha", [0.5, 2.0])
    def test_identities(self, alpha):
        lay = SystemLayout([("A", 2), ("B", 2), ("C", 2)])
        eye = {s: HermitianOperator(lay.sub(s), np.eye(lay.sub(s).total_dim, dtype=complex)) for s in ("AC", "C", "BC")}
        out = lie_trotter_operator(eye["AC"], eye["C"], eye["BC"], alpha, lay)
        assert_allclose(out.entries, np.eye(8), atol=1e-12)

    def test_refuses_alpha_one(self, rng):
        tau, omega, theta, lay = self._triple(rng)
        with pytest.raises(AlphaEqualsOne):
            lie_trotter_operator(tau, omega, theta, 1.0 + 1e-8, lay)


class TestSandwichedRenyiCMI:
    """Min-max estimate of the optimized sandwiched CMI."""

    CFG = StateSearchConfig(restarts=1, max_evals=600, minimax_rounds=4)

    def test_trivial_c_is_sandwiched_mutual_information(self):
        ab = random_density(SystemLayout([("A", 2), ("B", 2)]), trial_rng(48), xi=1e-2)
        rho = tensor([ab, HermitianOperator(SystemLayout([("C", 1)]), np.ones((1, 1), dtype=complex))])
        est = sandwiched_renyi_cmi(rho, ABC, 1.5, self.CFG, trial_rng(49)).value
        ref = renyi_mutual_info(ab, ["A"], 1.5, sandwiched=True, cfg=self.CFG, rng=trial_rng(50))
        assert est == pytest.approx(ref, abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.5, 0.8])
    def test_product_below_one(self, rng, alpha):
        res = sandwiched_renyi_cmi(_product(rng), ABC, alpha, self.CFG, trial_rng(51))
        assert abs(res.value) <= 1e-6

    @pytest.mark.parametrize("seed", range(3))
    def test_product_inner_supremum_is_positive_above_one(self, seed):
        """At ``alpha = 2``, ``sigma = rho_BC`` and pure ``omega = |psi><psi|`` on C,
        a product state gives ``2 log(<psi|rho_C^{-1/2}|psi> <psi|rho_C^{1/2}|psi>)``.

        By Jensen this is positive unless ``psi`` is an eigenvector of
        ``rho_C``, so the inner supremum does not vanish at the marginals.
        """
        rng = trial_rng(54, seed)
        rho = _product(rng)
        m = marginals(rho, ABC)
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi /= np.linalg.norm(psi)
        omega = HermitianOperator(m.c.layout, np.outer(psi, psi.conj()))
        w, v = np.linalg.eigh(m.c.entries)
        amp = np.abs(v.conj().T @ psi) ** 2
        ref = 2.0 * math.log(float(np.sum(amp / np.sqrt(w))) * float(np.sum(amp * np.sqrt(w))))
        got = delta_tilde_alpha(rho, Ordering.TAU_OMEGA_THETA, m.ac, omega, m.bc, 2.0)
        assert got == pytest.approx(ref, rel=1e-9)
        assert got > 0

    def test_von_neumann_case(self, rng, layout222):
        rho = random_density(layout222, rng, xi=1e-2)
        res = sandwiched_renyi_cmi(rho, ABC, 1.0, self.CFG, trial_rng(52))
        assert res.value == pytest.approx(cmi(rho, ABC), abs=1e-5)

    def test_certificate(self, rng, layout222):
        rho = random_density(layout222, rng, xi=1e-2)
        res = sandwiched_renyi_cmi(rho, ABC, 1.5, self.CFG, trial_rng(53))
        assert res.argmin_state.layout.labels == ("B", "C")
        assert res.argmax_state.layout.labels == ("C",)
        m = marginals(rho, ABC)
        direct = delta_tilde_alpha(rho, Ordering.TAU_OMEGA_THETA, m.ac, res.argmax_state, res.argmin_state, 1.5)
        assert direct == pytest.approx(res.value, abs=1e-9)
        assert res.lower_value <= res.value + 1e-9
