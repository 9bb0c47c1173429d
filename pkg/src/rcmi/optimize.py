"""Derivative-free search over density operators.

States are parameterized as

    sigma(L) = (1 - xi) L L^dagger / Tr{L L^dagger} + xi I / d

with ``L`` complex lower triangular (real diagonal). The ``d^2`` real
coordinates of ``L`` are searched with SciPy's adaptive Nelder-Mead. The
floor ``xi`` keeps every candidate strictly positive so that logarithms and
negative powers stay finite.

Each search is a sequence of Nelder-Mead runs: the supplied starting states
first, then alternately a restart from the incumbent and a random start. The
incumbent restart rebuilds the simplex around the best point, which is what
drives the final digits of accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .cmi import Ordering, delta_alpha, marginals
from .divergences import sibson_mutual_info
from .errors import OutOfRange
from .linalg import SUPP_TOL, HermitianOperator, SystemLayout, embed_array, hermitize, mpow, ptrace_array
from .partition import Partition
from .states import DensityOperator

__all__ = [
    "StateSearchConfig",
    "OptResult",
    "StateParameterization",
    "minimize_over_state",
    "maximize_over_state",
    "minimax_over_states",
    "renyi_cmi_inf_estimate",
]

_PENALTY = 1e300


@dataclass(frozen=True)
class StateSearchConfig:
    """Budget and tolerances of a state search.

    Attributes
    ----------
    restarts : int
        Number of Nelder-Mead runs per search.
    max_evals : int
        Function evaluations allowed per run.
    step_tol, value_tol : float
        Nelder-Mead ``xatol`` and ``fatol``.
    xi : float
        Weight of the maximally mixed floor in the parameterization.
    minimax_rounds : int
        Cap on alternating best-response rounds in :func:`minimax_over_states`.
    damping : float
        Weight of the new best response when updating the outer state.
    gap_tol : float
        Min-max gap above which the two orders are reported as disagreeing.
    simplex_scale : float
        Edge length of the initial simplex relative to ``max(|x_i|, 0.5)``.
    """

    restarts: int = 8
    max_evals: int = 2000
    step_tol: float = 1e-8
    value_tol: float = 1e-9
    xi: float = 1e-6
    minimax_rounds: int = 8
    damping: float = 0.5
    gap_tol: float = 1e-4
    simplex_scale: float = 0.1

    def __post_init__(self) -> None:
        for name in ("restarts", "max_evals", "step_tol", "value_tol", "minimax_rounds", "simplex_scale"):
            if getattr(self, name) <= 0:
                raise OutOfRange(f"{name} must be positive")
        if not 0 <= self.xi < 1:
            raise OutOfRange("xi must lie in [0, 1)")
        if not 0 < self.damping <= 1:
            raise OutOfRange("damping must lie in (0, 1]")


@dataclass(frozen=True)
class OptResult:
    """Outcome of a state search.

    Attributes
    ----------
    value : float
        Best objective value found (for min-max: ``sup_omega f(sigma*, omega)``).
    argmin_state : DensityOperator
        Minimizing (outer) state.
    converged : bool
        False when the evaluation budget ran out before the tolerances were met.
    evals_used : int
    argmax_state : DensityOperator or None
        Maximizing inner state of a min-max search.
    lower_value : float or None
        For min-max searches, ``inf_sigma f(sigma, omega*)``; the min-max
        value lies between ``lower_value`` and ``value``.
    flags : tuple of str
        Any of ``"budget_exceeded"``, ``"oscillation"``, ``"gap"``.
    """

    value: float
    argmin_state: DensityOperator
    converged: bool
    evals_used: int
    argmax_state: DensityOperator | None = None
    lower_value: float | None = None
    flags: tuple[str, ...] = field(default=())

    @property
    def gap(self) -> float | None:
        return None if self.lower_value is None else self.value - self.lower_value


class StateParameterization:
    """Map between real vectors and strictly positive states on ``layout``.

    ``L[0, 0]`` is pinned to one, which removes the scale redundancy
    ``L -> c L`` and leaves ``d^2 - 1`` real coordinates.
    """

    def __init__(self, layout: SystemLayout, xi: float):
        self.layout = layout
        self.d = layout.total_dim
        self.xi = xi
        self._tril = np.tril_indices(self.d, k=-1)
        self.n_off = len(self._tril[0])
        self.size = self.d - 1 + 2 * self.n_off

    def state(self, x: np.ndarray) -> np.ndarray:
        d = self.d
        low = np.zeros((d, d), dtype=complex)
        low[0, 0] = 1.0
        low[np.arange(1, d), np.arange(1, d)] = x[: d - 1]
        k = d - 1
        low[self._tril] = x[k : k + self.n_off] + 1j * x[k + self.n_off :]
        m = low @ low.conj().T
        tr = float(np.real(np.trace(m)))
        if not math.isfinite(tr):
            m, tr = np.eye(d, dtype=complex), float(d)
        return hermitize((1.0 - self.xi) * m / tr + self.xi * np.eye(d) / d)

    def params(self, sigma: np.ndarray) -> np.ndarray:
        """Coordinates of (a state close to) ``sigma``."""
        d = self.d
        s = hermitize(np.asarray(sigma, dtype=complex))
        s = s / float(np.real(np.trace(s)))
        t = (s - self.xi * np.eye(d) / d) / (1.0 - self.xi)
        w, v = np.linalg.eigh(t)
        w = np.clip(w, 1e-13, None)
        low = np.linalg.cholesky(hermitize((v * w) @ v.conj().T))
        low = low / low[0, 0].real
        return np.concatenate([np.real(np.diag(low))[1:], low[self._tril].real, low[self._tril].imag])

    def random(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.size)


def _wrap(objective, param: StateParameterization, sign: float):
    layout = param.layout

    def f(x: np.ndarray) -> float:
        sigma = DensityOperator._trusted(layout, param.state(x))
        try:
            v = float(objective(sigma))
        except (ArithmeticError, ValueError):
            return _PENALTY
        return sign * v if math.isfinite(v) else _PENALTY

    return f


def _simplex(x0: np.ndarray, scale: float) -> np.ndarray:
    """Right-angled initial simplex; every coordinate moves, including zeros."""
    h = scale * np.maximum(np.abs(x0), 0.5)
    return np.vstack([x0, x0 + np.diag(h)])


def _as_matrix(x) -> np.ndarray:
    return x.entries if isinstance(x, HermitianOperator) else np.asarray(x, dtype=complex)


def _search(
    objective: Callable[[DensityOperator], float],
    layout: SystemLayout,
    cfg: StateSearchConfig,
    rng: np.random.Generator,
    init: Sequence | None,
    sign: float,
) -> OptResult:
    param = StateParameterization(layout, cfg.xi)
    if param.d == 1:
        only = DensityOperator._trusted(layout, np.ones((1, 1), dtype=complex))
        return OptResult(float(objective(only)), only, True, 1)
    f = _wrap(objective, param, sign)
    if init is None:
        init = []
    elif isinstance(init, HermitianOperator) or (isinstance(init, np.ndarray) and init.ndim == 2):
        init = [init]
    starts = [param.params(_as_matrix(s)) for s in init]
    best_x, best_f = None, math.inf
    evals = 0
    converged = False
    opts = dict(maxfev=cfg.max_evals, xatol=cfg.step_tol, fatol=cfg.value_tol, adaptive=param.size > 4)
    for r in range(cfg.restarts):
        if r < len(starts):
            x0 = starts[r]
        elif best_x is None or (r - len(starts)) % 2 == 1:
            x0 = param.random(rng)
        else:
            x0 = best_x
        polish = best_x is not None and x0 is best_x
        res = minimize(f, x0, method="Nelder-Mead", options={**opts, "initial_simplex": _simplex(x0, cfg.simplex_scale)})
        evals += int(res.nfev)
        improved = best_f - float(res.fun)
        if float(res.fun) < best_f:
            best_x, best_f = np.array(res.x), float(res.fun)
        if polish:
            converged = improved <= cfg.value_tol * max(1.0, abs(best_f))
    if not converged and best_x is not None:
        # one last polish from the incumbent decides convergence
        res = minimize(f, best_x, method="Nelder-Mead", options={**opts, "initial_simplex": _simplex(best_x, cfg.simplex_scale)})
        evals += int(res.nfev)
        improved = best_f - float(res.fun)
        if float(res.fun) < best_f:
            best_x, best_f = np.array(res.x), float(res.fun)
        converged = improved <= cfg.value_tol * max(1.0, abs(best_f))
    state = DensityOperator._trusted(layout, param.state(best_x))
    # evaluate the supplied starting states exactly as well; they may sit on the boundary
    value = sign * best_f
    for s in init or []:
        cand = DensityOperator._trusted(layout, hermitize(_as_matrix(s)))
        try:
            v = float(objective(cand))
        except (ArithmeticError, ValueError):
            continue
        if math.isfinite(v) and sign * v < sign * value:
            value, state = v, cand
    flags = () if converged else ("budget_exceeded",)
    return OptResult(value, state, converged, evals, flags=flags)


def minimize_over_state(
    objective: Callable[[DensityOperator], float],
    layout: SystemLayout,
    cfg: StateSearchConfig | None = None,
    rng: np.random.Generator | None = None,
    init: Sequence | None = None,
) -> OptResult:
    """Local-search minimum of ``objective`` over states on ``layout``.

    Parameters
    ----------
    objective : callable
        Maps a :class:`DensityOperator` to a real number.
    layout : SystemLayout
    cfg : StateSearchConfig, optional
    rng : numpy.random.Generator, optional
        Source of random restarts; results are deterministic given its state.
    init : sequence of states or matrices, optional
        Starting points tried before random restarts. They are also
        evaluated exactly, without the positivity floor.

    Returns
    -------
    OptResult
        ``converged`` is False (and ``"budget_exceeded"`` flagged) when the
        final polish did not meet the tolerances; the best point is still
        returned.
    """
    cfg = cfg or StateSearchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    return _search(objective, layout, cfg, rng, init, 1.0)


def maximize_over_state(objective, layout, cfg=None, rng=None, init=None) -> OptResult:
    """Local-search maximum; ``value`` is the maximum and ``argmin_state`` the maximizer."""
    cfg = cfg or StateSearchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    return _search(objective, layout, cfg, rng, init, -1.0)


def minimax_over_states(
    objective: Callable[[DensityOperator, DensityOperator], float],
    inner_max_layout: SystemLayout,
    outer_min_layout: SystemLayout,
    cfg: StateSearchConfig | None = None,
    rng: np.random.Generator | None = None,
    init_outer=None,
    init_inner=None,
) -> OptResult:
    """Estimate ``inf_sigma sup_omega objective(sigma, omega)`` by alternating best responses.

    Each round resolves the inner maximization at the current ``sigma``,
    then minimizes against that ``omega`` and moves ``sigma`` part of the
    way (``cfg.damping``) toward the minimizer. After each round

    * ``upper = sup_omega f(sigma, omega)`` at the damped ``sigma``;
    * ``lower = inf_sigma f(sigma, omega)`` at the current ``omega``.

    The true min-max value lies in ``[lower, upper]`` up to local-search
    error. Iteration stops once ``upper - lower <= cfg.gap_tol`` or after
    ``cfg.minimax_rounds`` rounds. ``"oscillation"`` is flagged when the gap
    fails to shrink over two consecutive rounds and ``"gap"`` when the final
    gap exceeds ``cfg.gap_tol``.
    """
    cfg = cfg or StateSearchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    d_out = outer_min_layout.total_dim
    d_in = inner_max_layout.total_dim
    sigma = hermitize(_as_matrix(init_outer)) if init_outer is not None else np.eye(d_out, dtype=complex) / d_out
    omega = hermitize(_as_matrix(init_inner)) if init_inner is not None else np.eye(d_in, dtype=complex) / d_in
    evals = 0
    converged = True
    flags: list[str] = []

    def inner(sig: np.ndarray, start: np.ndarray) -> OptResult:
        s = DensityOperator._trusted(outer_min_layout, sig)
        return maximize_over_state(lambda w: objective(s, w), inner_max_layout, cfg, rng, init=[start])

    def outer(om: np.ndarray, start: np.ndarray) -> OptResult:
        w = DensityOperator._trusted(inner_max_layout, om)
        return minimize_over_state(lambda s: objective(s, w), outer_min_layout, cfg, rng, init=[start])

    up = inner(sigma, omega)
    evals += up.evals_used
    converged &= up.converged
    omega = up.argmin_state.entries
    upper, lower = up.value, -math.inf
    best = (upper, sigma, omega)
    gaps: list[float] = []
    for _ in range(cfg.minimax_rounds):
        lo = outer(omega, sigma)
        evals += lo.evals_used
        converged &= lo.converged
        lower = max(lower, lo.value)
        sigma_new = hermitize((1.0 - cfg.damping) * sigma + cfg.damping * lo.argmin_state.entries)
        # compare the damped move with the full best response and keep the better
        cands = []
        for s in (sigma_new, lo.argmin_state.entries):
            r = inner(s, omega)
            evals += r.evals_used
            converged &= r.converged
            cands.append((r.value, s, r.argmin_state.entries))
        upper_r, sigma, omega = min(cands, key=lambda t: t[0])
        if upper_r < best[0]:
            best = (upper_r, sigma, omega)
        gap = best[0] - lower
        gaps.append(gap)
        if gap <= cfg.gap_tol:
            break
        if len(gaps) >= 3 and gaps[-1] >= gaps[-2] >= gaps[-3]:
            flags.append("oscillation")
            break
    upper, sigma, omega = best
    if upper - lower > cfg.gap_tol:
        flags.append("gap")
    if not converged:
        flags.append("budget_exceeded")
    return OptResult(
        value=upper,
        argmin_state=DensityOperator._trusted(outer_min_layout, sigma),
        converged=converged,
        evals_used=evals,
        argmax_state=DensityOperator._trusted(inner_max_layout, omega),
        lower_value=lower,
        flags=tuple(flags),
    )


def _inf_witnesses(m, alpha: float, supp_tol: float) -> list[np.ndarray]:
    """Candidate ``sigma_ABC`` whose values equal the known upper bounds."""
    lay = m.layout
    a, b, c = m.part.a, m.part.b, m.part.c
    out = [m.rho.entries]
    rho_pow = mpow(m.rho.entries, alpha, supp_tol)
    for first, second in ((a, b + c), (b, a + c)):
        lay_first = lay.sub(first)
        lay_rest = lay.without(first)
        rho_first = ptrace_array(m.rho.entries, lay, lay_rest.labels)
        # mutual-information witness rho_X (x) sigma*_rest
        if abs(alpha - 1.0) > 1e-12:
            _, sig = sibson_mutual_info(m.rho, first, alpha, supp_tol)
        else:
            sig = ptrace_array(m.rho.entries, lay, first)
        out.append(embed_array(rho_first, lay_first, lay) @ embed_array(sig, lay_rest, lay))
        # conditional-entropy witnesses pi_X (x) sigma_rest
        pi = np.eye(lay_first.total_dim) / lay_first.total_dim
        g = hermitize(ptrace_array(rho_pow, lay, first))
        if alpha > 0:
            opt = mpow(g, 1.0 / alpha, supp_tol)
            opt = opt / float(np.real(np.trace(opt)))
            out.append(embed_array(pi, lay_first, lay) @ embed_array(opt, lay_rest, lay))
        rest_marg = ptrace_array(m.rho.entries, lay, first)
        out.append(embed_array(pi, lay_first, lay) @ embed_array(rest_marg, lay_rest, lay))
    return [hermitize(x) for x in out]


def renyi_cmi_inf_estimate(
    rho: HermitianOperator,
    part: Partition,
    alpha: float,
    cfg: StateSearchConfig | None = None,
    rng: np.random.Generator | None = None,
    supp_tol: float = SUPP_TOL,
) -> OptResult:
    """Upper estimate of ``inf_sigma_ABC delta_alpha(rho, sigma_AC, sigma_C, sigma_BC)``.

    The search starts from closed-form witnesses: ``rho`` itself, the
    minimizers behind ``I_alpha(A;BC)`` and ``I_alpha(B;AC)``, and the
    maximally-mixed-times-optimizer states behind the conditional-entropy
    bounds. The result is therefore never above any of those bounds.
    """
    cfg = cfg or StateSearchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    m = marginals(rho, part)
    lay = m.layout
    ac, bc, cc = lay.sub(part.a + part.c), lay.sub(part.b + part.c), lay.sub(part.c)
    order = Ordering.TAU_OMEGA_THETA

    def objective(sigma: DensityOperator) -> float:
        s = sigma.entries
        tau = DensityOperator._trusted(ac, hermitize(ptrace_array(s, lay, part.b)))
        theta = DensityOperator._trusted(bc, hermitize(ptrace_array(s, lay, part.a)))
        omega = DensityOperator._trusted(cc, hermitize(ptrace_array(s, lay, part.a + part.b)))
        return delta_alpha(m.rho, order, tau, omega, theta, alpha, supp_tol)

    witnesses = _inf_witnesses(m, alpha, supp_tol)
    scored = []
    for w in witnesses:
        try:
            scored.append((objective(DensityOperator._trusted(lay, w)), w))
        except (ArithmeticError, ValueError):
            continue
    scored.sort(key=lambda t: t[0])
    init = [w for _, w in scored[:2]] or None
    res = minimize_over_state(objective, lay, cfg, rng, init=init)
    if scored and scored[0][0] < res.value:
        res = replace(res, value=scored[0][0], argmin_state=DensityOperator._trusted(lay, scored[0][1]))
    return res
