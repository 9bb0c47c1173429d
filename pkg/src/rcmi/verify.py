"""Property suites: randomized checks of the proved identities and inequalities.

Each suite draws ``trials`` random instances from substreams of ``seed`` and
records, per property, the worst residual. A residual is the violated amount:
``|lhs - rhs|`` for identities and ``lhs - rhs`` for ``lhs <= rhs``. A property
passes when its worst residual is at most its tolerance. Passing ``tol``
replaces every tolerance of the suite, which is how a deliberately impossible
tolerance demonstrates that a suite can fail.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmi import (
    Ordering,
    cmi,
    delta_alpha,
    delta_alpha_marginals,
    delta_tilde_alpha,
    delta_tilde_alpha_marginals,
    marginals,
    renyi_cmi_sibson,
    sibson_optimal_sigma,
)
from .conjecture import cmi_variance
from .divergences import renyi_rel_entropy
from .errors import ConfigError, UnknownSuite
from .linalg import SystemLayout, fidelity
from .partition import Partition
from .recovery import fidelity_chain, small_cmi_bound
from .states import (
    ChannelRecovery,
    apply_channel_local,
    marginal,
    markov_state,
    petz_recovery,
    random_channel,
    random_density,
    random_pure,
    trial_rng,
)

__all__ = ["PropertyResult", "SuiteReport", "SUITES", "run_suite", "suite_names"]

ABC = Partition(("A",), ("B",), ("C",))
LAYOUT_222 = SystemLayout([("A", 2), ("B", 2), ("C", 2)])


@dataclass(frozen=True)
class PropertyResult:
    """Worst residual of one property over a suite run."""

    name: str
    trials: int
    worst: float
    tol: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.worst) and self.worst <= self.tol


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    properties: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def lines(self) -> list[str]:
        out = []
        for p in self.properties:
            status = "PASS" if p.passed else "FAIL"
            out.append(f"{status} {self.suite}/{p.name} trials={p.trials} worst={p.worst:.3e} tol={p.tol:.1e}")
        return out


class _Recorder:
    def __init__(self, tol_override: float | None):
        self.tol_override = tol_override
        self.data: dict[str, list] = {}

    def add(self, name: str, residual: float, tol: float) -> None:
        entry = self.data.setdefault(name, [0, -math.inf, tol])
        entry[0] += 1
        r = float(residual)
        entry[1] = math.inf if math.isnan(r) else max(entry[1], r)

    def results(self) -> list[PropertyResult]:
        out = []
        for name, (n, worst, tol) in self.data.items():
            t = tol if self.tol_override is None else self.tol_override
            out.append(PropertyResult(name, n, worst, t))
        return out


def _random_dims(rng: np.random.Generator, hi: int = 3) -> SystemLayout:
    return SystemLayout([(x, int(rng.integers(2, hi + 1))) for x in "ABC"])


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------
def _sibson_identity(rng_for, trials: int, rec: _Recorder) -> None:
    for t in range(trials):
        rng = rng_for(t)
        rho = random_density(LAYOUT_222, rng)
        sigma = random_density(LAYOUT_222.sub("BC"), rng)
        m_ac, m_c = marginal(rho, ("A", "C")), marginal(rho, ("C",))
        for alpha in (0.5, 1.5, 2.0):
            star = sibson_optimal_sigma(rho, ABC, alpha)
            lhs = delta_alpha(rho, Ordering.TAU_OMEGA_THETA, m_ac, m_c, sigma, alpha)
            rhs = delta_alpha(rho, Ordering.TAU_OMEGA_THETA, m_ac, m_c, star, alpha)
            div = renyi_rel_entropy(star, sigma, alpha).value
            rec.add(f"identity-alpha={alpha:g}", abs(lhs - rhs - div), 1e-9)


def _nonnegativity(rng_for, trials: int, rec: _Recorder) -> None:
    for t in range(trials):
        rng = rng_for(t)
        rho = random_density(_random_dims(rng), rng, rank=int(rng.integers(1, 5)))
        for alpha in (0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0):
            rec.add("sibson-cmi>=0", -renyi_cmi_sibson(rho, ABC, alpha), 1e-9)
        rec.add("cmi>=0", -cmi(rho, ABC), 1e-9)


def _channel_pair(rng, lay: SystemLayout, target: str):
    d = lay.dim(target)
    d_out = int(rng.integers(2, 4))
    ch = random_channel(d, d_out, int(rng.integers(1, 4)) * max(1, -(-d // d_out)), rng)
    return ch


def _monotone(rng_for, trials: int, rec: _Recorder, target: str) -> None:
    if target == "B":
        orders = (Ordering.TAU_OMEGA_THETA, Ordering.OMEGA_TAU_THETA)
        moved = "theta"
    else:
        orders = (Ordering.OMEGA_THETA_TAU, Ordering.THETA_OMEGA_TAU)
        moved = "tau"
    for t in range(trials):
        rng = rng_for(t)
        lay = _random_dims(rng)
        rho = random_density(lay, rng, xi=1e-3)
        ops = {
            "tau": random_density(lay.sub("AC"), rng, xi=1e-3),
            "omega": random_density(lay.sub("C"), rng, xi=1e-3),
            "theta": random_density(lay.sub("BC"), rng, xi=1e-3),
        }
        ch = _channel_pair(rng, lay, target)
        rho2 = apply_channel_local(ch, target, rho)
        ops2 = dict(ops)
        ops2[moved] = apply_channel_local(ch, target, ops[moved])
        for order in orders:
            for alpha in (0.3, 0.7, 1.5, 2.0):
                before = delta_alpha(rho, order, ops["tau"], ops["omega"], ops["theta"], alpha)
                after = delta_alpha(rho2, order, ops2["tau"], ops2["omega"], ops2["theta"], alpha)
                rec.add(f"petz-{order.tag}-alpha={alpha:g}", after - before, 1e-9)
            for alpha in (0.5, 0.8, 1.5, 4.0):
                before = delta_tilde_alpha(rho, order, ops["tau"], ops["omega"], ops["theta"], alpha)
                after = delta_tilde_alpha(rho2, order, ops2["tau"], ops2["omega"], ops2["theta"], alpha)
                rec.add(f"sandwiched-{order.tag}-alpha={alpha:g}", after - before, 1e-9)


def _duality(rng_for, trials: int, rec: _Recorder) -> None:
    lay = SystemLayout([(x, 2) for x in "ABCD"])
    fwd = Partition(("A",), ("B",), ("C",), ("D",))
    dual = Partition(("B",), ("A",), ("D",), ("C",))
    for t in range(trials):
        psi = random_pure(lay, rng_for(t)).density()
        rec.add("von-neumann", abs(cmi(psi, fwd) - cmi(psi, dual)), 1e-8)
        for alpha in (0.5, 0.8, 1.5, 3.0):
            gap = renyi_cmi_sibson(psi, fwd, alpha) - renyi_cmi_sibson(psi, dual, alpha)
            rec.add(f"sibson-alpha={alpha:g}", abs(gap), 1e-8)


def _special_cases(rng_for, trials: int, rec: _Recorder) -> None:
    for t in range(trials):
        rng = rng_for(t)
        lay = _random_dims(rng)
        rho = random_density(lay, rng, xi=1e-3)
        tau = random_density(lay.sub("AC"), rng, xi=1e-3)
        omega = random_density(lay.sub("C"), rng, xi=1e-3)
        theta = random_density(lay.sub("BC"), rng, xi=1e-3)
        for order in Ordering:
            for a, b in ((0.5, 1.5), (0.25, 1.75)):
                lo = delta_alpha(rho, order, tau, omega, theta, a)
                hi = delta_alpha(rho, order, tau, omega, theta, b)
                rec.add(f"petz-{order.tag}-{a:g}<={b:g}", lo - hi, 1e-9)
            for a, b in ((2.0 / 3.0, 2.0), (0.6, 3.0)):
                lo = delta_tilde_alpha(rho, order, tau, omega, theta, a)
                hi = delta_tilde_alpha(rho, order, tau, omega, theta, b)
                rec.add(f"sandwiched-{order.tag}-{a:.3g}<={b:g}", lo - hi, 1e-9)


def _markov(rng_for, trials: int, rec: _Recorder) -> None:
    lay = SystemLayout([("A", 2), ("B", 2), ("C", 4)])
    for t in range(trials):
        rng = rng_for(t)
        blocks = [
            (random_density(SystemLayout([("A", 2), ("L", 2)]), rng), random_density(SystemLayout([("R", 1), ("B", 2)]), rng)),
            (random_density(SystemLayout([("A", 2), ("L", 1)]), rng), random_density(SystemLayout([("R", 2), ("B", 2)]), rng)),
        ]
        q = rng.dirichlet([1.0, 1.0])
        rho = markov_state(q, blocks, lay)
        rec.add("cmi=0", abs(cmi(rho, ABC)), 1e-9)
        for alpha in (0.5, 1.5, 2.0):
            rec.add(f"sibson-alpha={alpha:g}=0", abs(renyi_cmi_sibson(rho, ABC, alpha)), 1e-8)
            # Only the orderings with omega_C in the middle vanish identically:
            # rho_AC and rho_BC of a Markov state need not commute.
            for order in (Ordering.TAU_OMEGA_THETA, Ordering.THETA_OMEGA_TAU):
                rec.add(f"petz-{order.tag}-alpha={alpha:g}=0", abs(delta_alpha_marginals(rho, ABC, alpha, order)), 1e-8)
        rec.add("cmi-variance=0", abs(cmi_variance(rho, ABC)), 1e-9)
        rec.add("petz-fidelity=1", 1.0 - fidelity(rho, _petz(rho)), 1e-9)


def _petz(rho):
    m = marginals(rho, ABC)
    return petz_recovery(m.ac, m.c)(m.bc, rho.layout)


def _recovery(rng_for, trials: int, rec: _Recorder) -> None:
    for t in range(trials):
        rng = rng_for(t)
        lay = _random_dims(rng)
        rho = random_density(lay, rng, rank=int(rng.integers(1, lay.total_dim + 1)))
        r = small_cmi_bound(rho, ABC)
        rec.add("petz-cmi-rho<=bound", r.cmi_rho - r.af_bound, 1e-9)
        rec.add("petz-cmi-omega<=bound", r.cmi_omega - r.af_bound, 1e-9)
        rec.add("pinsker", r.pinsker_term - r.cmi_rho, 1e-9)
        dc, da = lay.dim("C"), lay.dim("A")
        ch = random_channel(dc, da * dc, int(rng.integers(1, 4)), rng)
        r2 = small_cmi_bound(rho, ABC, ChannelRecovery(ch.kraus, ("C",), lay.sub("AC")))
        rec.add("channel-cmi-rho<=bound", r2.cmi_rho - r2.af_bound, 1e-9)
        rec.add("channel-cmi-omega<=bound", r2.cmi_omega - r2.af_bound, 1e-9)
        fc = fidelity_chain(random_density(lay, rng, xi=1e-3), ABC)
        rec.add("fidelity-imin>=log-term", fc.log_term - fc.i_min, 1e-9)
        rec.add("fidelity-log-term>=quarter-td-sq", fc.quarter_td_sq - fc.log_term, 1e-9)


def _alpha_limit(rng_for, trials: int, rec: _Recorder) -> None:
    for t in range(trials):
        rng = rng_for(t)
        rho = random_density(_random_dims(rng), rng, xi=1e-3)
        ref = cmi(rho, ABC)
        for alpha in (1.0 - 1e-3, 1.0 + 1e-3):
            rec.add(f"petz-alpha={alpha:g}", abs(delta_alpha_marginals(rho, ABC, alpha) - ref), 1e-2)
            rec.add(f"sandwiched-alpha={alpha:g}", abs(delta_tilde_alpha_marginals(rho, ABC, alpha) - ref), 1e-2)


SuiteFn = Callable[[Callable[[int], np.random.Generator], int, _Recorder], None]

SUITES: dict[str, SuiteFn] = {
    "sibson-identity": _sibson_identity,
    "nonnegativity": _nonnegativity,
    "monotone-local-B": lambda r, n, rec: _monotone(r, n, rec, "B"),
    "monotone-local-A": lambda r, n, rec: _monotone(r, n, rec, "A"),
    "duality": _duality,
    "special-cases": _special_cases,
    "markov": _markov,
    "recovery": _recovery,
    "alpha-limit": _alpha_limit,
}


def suite_names() -> list[str]:
    return list(SUITES)


def run_suite(name: str, seed: int = 0, trials: int = 50, tol: float | None = None) -> SuiteReport:
    """Run suite ``name`` on ``trials`` random instances.

    Raises
    ------
    UnknownSuite
        If ``name`` is not registered.
    """
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    key = zlib.crc32(name.encode())
    rec = _Recorder(tol)
    SUITES[name](lambda t: trial_rng(seed, key, t), trials, rec)
    return SuiteReport(name, seed, trials, rec.results())
