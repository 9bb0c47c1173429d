"""Derivative-free state searches and the infimum estimate."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from rcmi import (
    OutOfRange,
    Partition,
    StateParameterization,
    StateSearchConfig,
    SystemLayout,
    cmi,
    delta,
    fidelity,
    marginal,
    marginals,
    markov_state,
    maximize_over_state,
    minimax_over_states,
    minimize_over_state,
    product_state,
    random_density,
    rel_entropy,
    renyi_cmi_inf_estimate,
    renyi_rel_entropy,
    sibson_mutual_info,
    trial_rng,
)

ABC = Partition("A", "B", "C")
FAST = StateSearchConfig(restarts=2, max_evals=800)


class TestConfig:
    """Budget validation."""

    @pytest.mark.parametrize(
        "kwargs",
        [{"restarts": 0}, {"max_evals": -1}, {"xi": 1.0}, {"xi": -0.1}, {"damping": 0.0}, {"simplex_scale": 0.0}],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(OutOfRange):
            StateSearchConfig(**kwargs)


class TestParameterization:
    """Coordinates to states and back."""

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 4))
    def test_state_is_valid(self, seed, d):
        param = StateParameterization(SystemLayout([("A", d)]), 1e-6)
        s = param.state(param.random(trial_rng(seed)))
        assert abs(np.trace(s).real - 1.0) <= 1e-12
        assert np.linalg.eigvalsh(s).min() >= 1e-6 / d - 1e-15

    @pytest.mark.parametrize("seed", range(5))
    def test_round_trip(self, seed):
        lay = SystemLayout([("A", 3)])
        param = StateParameterization(lay, 1e-6)
        sigma = random_density(lay, trial_rng(seed), xi=1e-3).entries
        assert_allclose(param.state(param.params(sigma)), sigma, atol=1e-10)

    def test_size(self):
        assert StateParameterization(SystemLayout([("A", 4)]), 0.0).size == 15


class TestMinimize:
    """Single-level searches against closed forms."""

    def test_relative_entropy_minimizer(self):
        lay = SystemLayout([("A", 2)])
        target = random_density(lay, trial_rng(60), xi=1e-2)
        res = minimize_over_state(lambda s: rel_entropy(target, s).value, lay, FAST, trial_rng(61))
        assert res.value == pytest.approx(0.0, abs=1e-8)
        assert_allclose(res.argmin_state.entries, target.entries, atol=1e-4)

    def test_maximize_fidelity(self):
        lay = SystemLayout([("A", 2)])
        target = random_density(lay, trial_rng(62), rank=1)
        res = maximize_over_state(lambda s: fidelity(target, s), lay, FAST, trial_rng(63))
        assert res.value == pytest.approx(1.0, abs=1e-5)

    def test_accepts_single_initial_state(self):
        lay = SystemLayout([("A", 2)])
        target = random_density(lay, trial_rng(64), xi=1e-2)
        res = minimize_over_state(lambda s: rel_entropy(target, s).value, lay, FAST, trial_rng(65), init=target)
        assert res.value == pytest.approx(0.0, abs=1e-8)

    def test_deterministic(self):
        lay = SystemLayout([("A", 2)])
        target = random_density(lay, trial_rng(66))
        f = lambda s: rel_entropy(target, s).value  # noqa: E731
        a = minimize_over_state(f, lay, FAST, trial_rng(67))
        b = minimize_over_state(f, lay, FAST, trial_rng(67))
        assert a.value == b.value

    def test_budget_flag(self):
        lay = SystemLayout([("A", 3)])
        target = random_density(lay, trial_rng(68))
        tiny = StateSearchConfig(restarts=1, max_evals=5)
        res = minimize_over_state(lambda s: rel_entropy(target, s).value, lay, tiny, trial_rng(69))
        assert not res.converged
        assert "budget_exceeded" in res.flags

    @pytest.mark.parametrize("alpha", [0.5, 1.5])
    def test_sibson_mutual_information(self, alpha):
        rho = random_density(SystemLayout([("A", 2), ("B", 2)]), trial_rng(70))
        ra = marginal(rho, ["A"])
        res = minimize_over_state(
            lambda s: renyi_rel_entropy(rho, product_state([ra, s]), alpha).value,
            SystemLayout([("B", 2)]),
            FAST,
            trial_rng(71),
        )
        assert res.value == pytest.approx(sibson_mutual_info(rho, ["A"], alpha)[0], abs=1e-6)


class TestMinimax:
    """Alternating min-max search."""

    def test_von_neumann_formulation(self, layout222):
        """``inf_sigma sup_omega Delta(rho, rho_AC, sigma_BC, omega_C)`` is the CMI."""
        rho = random_density(layout222, trial_rng(72), xi=1e-2)
        m = marginals(rho, ABC)
        res = minimax_over_states(
            lambda s, w: delta(m.rho, m.ac, s, w),
            layout222.sub("C"),
            layout222.sub("BC"),
            StateSearchConfig(restarts=1, max_evals=1500, minimax_rounds=6),
            trial_rng(73),
        )
        assert res.value == pytest.approx(cmi(rho, ABC), abs=1e-5)
        assert_allclose(res.argmin_state.entries, m.bc.entries, atol=1e-2)
        assert_allclose(res.argmax_state.entries, m.c.entries, atol=1e-2)

    def test_trivial_inner_reduces_to_minimization(self):
        lay = SystemLayout([("A", 2)])
        target = random_density(lay, trial_rng(74), xi=1e-2)
        inner = SystemLayout([("C", 1)])
        res = minimax_over_states(lambda s, w: rel_entropy(target, s).value, inner, lay, FAST, trial_rng(75))
        assert res.value == pytest.approx(0.0, abs=1e-7)

    def test_bracket(self, layout222):
        rho = random_density(layout222, trial_rng(76), xi=1e-2)
        m = marginals(rho, ABC)
        res = minimax_over_states(
            lambda s, w: delta(m.rho, m.ac, s, w), layout222.sub("C"), layout222.sub("BC"), FAST, trial_rng(77)
        )
        assert res.lower_value <= res.value + 1e-9


class TestInfEstimate:
    """Upper estimate of the fully optimized Petz CMI."""

    CFG = StateSearchConfig(restarts=1, max_evals=400)

    @pytest.mark.parametrize("alpha", [0.75, 1.5])
    def test_product(self, alpha):
        rng = trial_rng(78)
        rho = product_state([random_density(SystemLayout([(x, 2)]), rng) for x in "ABC"])
        assert renyi_cmi_inf_estimate(rho, ABC, alpha, self.CFG, trial_rng(79)).value <= 1e-6

    @pytest.mark.parametrize("alpha", [0.75, 1.5])
    def test_markov(self, alpha):
        rng = trial_rng(80)
        lay = SystemLayout([("A", 2), ("B", 2), ("C", 2)])
        blocks = [
            (random_density(SystemLayout([("A", 2), ("L", 1)]), rng), random_density(SystemLayout([("R", 1), ("B", 2)]), rng)),
            (random_density(SystemLayout([("A", 2), ("L", 1)]), rng), random_density(SystemLayout([("R", 1), ("B", 2)]), rng)),
        ]
        rho = markov_state([0.4, 0.6], blocks, lay)
        assert renyi_cmi_inf_estimate(rho, ABC, alpha, self.CFG, trial_rng(81)).value <= 1e-5

    @pytest.mark.parametrize("seed", range(3))
    def test_bounds(self, seed):
        rng = trial_rng(82, seed)
        lay = SystemLayout([("A", 2), ("B", 3), ("C", 2)])
        rho = random_density(lay, rng)
        for alpha in (0.75, 1.5):
            est = renyi_cmi_inf_estimate(rho, ABC, alpha, self.CFG, trial_rng(83, seed)).value
            assert est <= 2 * math.log(2) + 1e-6
            assert est <= sibson_mutual_info(rho, ["A"], alpha)[0] + 1e-6
