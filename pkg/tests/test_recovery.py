"""Recoverability bounds and the fidelity chain."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcmi import (
    AppendStateRecovery,
    OutOfRange,
    Partition,
    SystemLayout,
    classical_state,
    cmi,
    fidelity_chain,
    ghz_state,
    h2,
    marginal,
    product_state,
    random_density,
    small_cmi_bound,
    trial_rng,
)

ABC = Partition("A", "B", "C")
LAY = SystemLayout([("A", 2), ("B", 2), ("C", 2)])


def _classical_markov(seed: int):
    """``p(a, b, c) = p(c) p(a|c) p(b|c)`` as a diagonal state."""
    rng = trial_rng(seed)
    pc = rng.dirichlet(np.ones(2))
    pa = rng.dirichlet(np.ones(2), size=2)  # pa[c, a]
    pb = rng.dirichlet(np.ones(2), size=2)  # pb[c, b]
    p = np.einsum("c,ca,cb->abc", pc, pa, pb)
    return classical_state(p.ravel(), LAY)


class TestBinaryEntropy:
    """The binary entropy in nats."""

    @pytest.mark.parametrize(
        "x, expected",
        [(0.0, 0.0), (1.0, 0.0), (0.5, math.log(2.0)), (0.25, -0.25 * math.log(0.25) - 0.75 * math.log(0.75))],
    )
    def test_values(self, x, expected):
        assert h2(x) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("x", [-1e-3, 1.5, math.nan])
    def test_out_of_range(self, x):
        with pytest.raises(OutOfRange):
            h2(x)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 1.0))
    def test_symmetric(self, x):
        assert h2(x) == pytest.approx(h2(1.0 - x), abs=1e-12)


class TestSmallCMIBound:
    """Both sides of the recoverability inequality."""

    @pytest.mark.parametrize("seed", range(3))
    def test_classical_markov_recovers_exactly(self, seed):
        rep = small_cmi_bound(_classical_markov(400 + seed), ABC)
        assert rep.epsilon == pytest.approx(0.0, abs=1e-12)
        assert rep.cmi_rho == pytest.approx(0.0, abs=1e-12)
        assert rep.af_bound == pytest.approx(0.0, abs=1e-9)
        assert rep.holds

    def test_product_with_append_state_recovery(self):
        rng = trial_rng(410)
        rho = product_state([random_density(SystemLayout([(x, 2)]), rng) for x in "ABC"])
        rep = small_cmi_bound(rho, ABC, AppendStateRecovery(marginal(rho, ["A"])))
        assert rep.epsilon == pytest.approx(0.0, abs=1e-12)
        assert rep.holds

    def test_ghz_values(self):
        """The Petz map of GHZ marginals returns the classical mixture."""
        rep = small_cmi_bound(ghz_state().density(), ABC)
        assert rep.cmi_rho == pytest.approx(math.log(2.0), abs=1e-12)
        assert rep.cmi_omega == pytest.approx(0.0, abs=1e-12)
        assert rep.epsilon == pytest.approx(1.0, abs=1e-12)
        assert rep.af_bound == pytest.approx(4.0 * math.log(2.0), abs=1e-12)
        assert rep.holds

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_states_satisfy_bound(self, seed):
        rng = trial_rng(seed)
        lay = SystemLayout([("A", 2), ("B", int(rng.integers(2, 4))), ("C", 2)])
        rep = small_cmi_bound(random_density(lay, rng), ABC)
        assert rep.holds

    def test_traces_out_d(self):
        lay = SystemLayout([("A", 2), ("B", 2), ("C", 2), ("D", 2)])
        rho = random_density(lay, trial_rng(420))
        rep = small_cmi_bound(rho, Partition("A", "B", "C", "D"))
        assert rep.cmi_rho == pytest.approx(cmi(marginal(rho, ["A", "B", "C"]), ABC), abs=1e-12)

    def test_rank_deficient_conditioning(self):
        rng = trial_rng(421)
        a = random_density(SystemLayout([("A", 2)]), rng)
        b = random_density(SystemLayout([("B", 2)]), rng)
        c = classical_state(np.array([1.0, 0.0]), SystemLayout([("C", 2)]))
        rep = small_cmi_bound(product_state([a, b, c]), ABC)
        assert rep.epsilon == pytest.approx(0.0, abs=1e-10)
        assert rep.holds


class TestFidelityChain:
    """``I_min >= -log(1 - eps^2) >= eps^2``."""

    def test_markov_is_zero(self):
        chain = fidelity_chain(_classical_markov(430), ABC)
        assert chain.i_min == pytest.approx(0.0, abs=1e-10)
        assert chain.quarter_td_sq == pytest.approx(0.0, abs=1e-20)
        assert chain.holds

    def test_product_is_zero(self):
        rng = trial_rng(431)
        rho = product_state([random_density(SystemLayout([(x, 2)]), rng) for x in "ABC"])
        i_min, q, c = fidelity_chain(rho, ABC)
        assert (i_min, q, c) == pytest.approx((0.0, 0.0, 0.0), abs=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_states_satisfy_chain(self, seed):
        chain = fidelity_chain(random_density(LAY, trial_rng(seed)), ABC)
        assert chain.holds
        assert chain.log_term >= chain.quarter_td_sq
