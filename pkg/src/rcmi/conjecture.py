"""Numerical probes of monotonicity in the Renyi order.

For a fixed quadruple ``(rho, tau, omega, theta)`` the Petz-type quantity
``delta_alpha`` can be written with ``gamma = alpha - 1`` as
``log Tr Y(gamma) / gamma`` with

    Y(gamma) = rho^{1+gamma} X1^{c1 gamma/2} X2^{c2 gamma/2} X3^{c3 gamma} X2^{c2 gamma/2} X1^{c1 gamma/2}

where ``c = -1`` for ``tau`` and ``theta`` and ``c = +1`` for ``omega``. Its
derivative in ``gamma`` has the sign of the *numerator*

    gamma Tr{dY/dgamma} - Tr{Y} log Tr{Y},

so a negative numerator would be a counterexample to monotonicity. The
sandwiched family uses ``gamma = (alpha - 1) / alpha`` and

    Z(gamma) = rho^{1/2} X1^{c1 gamma/2} X2^{c2 gamma/2} X3^{c3 gamma} X2^{c2 gamma/2} X1^{c1 gamma/2} rho^{1/2} mu^gamma

for an auxiliary state ``mu``. For small ``gamma`` both numerators behave like
``gamma^2 V / 2`` with ``V`` an information variance.

:func:`run_sweep` evaluates the numerator on fresh random inputs over a grid
of ``gamma`` values and counts sign violations.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cmi import ConditioningWarning, Ordering, delta, marginals
from .errors import ConfigError, GammaZero, RCMIError, SupportViolation
from .linalg import SUPP_TOL, HermitianOperator, SystemLayout, embed_array, hermitize, mlog, mpow
from .partition import Partition
from .states import DensityOperator, classical_state, random_density, trial_rng

__all__ = [
    "Numerator",
    "numerator_nonsandwiched",
    "numerator_sandwiched",
    "trace_y",
    "trace_z",
    "optimal_mu",
    "info_variance",
    "cmi_variance",
    "sandwiched_variance",
    "SweepConfig",
    "TrialRecord",
    "GammaSummary",
    "gamma_grid",
    "run_sweep",
    "summarize",
    "sweep_preset",
    "worker_count",
]

#: Relative round-off floor used to tag numerators whose sign cannot be resolved.
TAG_REL = 1e-9
#: Relative analytic vs finite-difference mismatch that tags a trial.
FD_REL_TOL = 1e-4

_COEF = {"tau": -1.0, "theta": -1.0, "omega": 1.0}


@dataclass(frozen=True)
class Numerator:
    """Derivative numerator and its ingredients.

    Attributes
    ----------
    numerator : float
        ``gamma Tr{Y'} - Tr{Y} log Tr{Y}``.
    trace : float
        ``Tr{Y(gamma)}`` (or ``Tr{Z(gamma)}``).
    derivative : float
        ``Tr{dY/dgamma}`` used in the numerator.
    derivative_fd : float or None
        Finite-difference derivative, when requested.
    scale : float
        ``max(|gamma Tr Y'|, |Tr Y log Tr Y|)``; the numerator is a difference
        of two terms of this size, so its round-off is proportional to it.
    """

    numerator: float
    trace: float
    derivative: float
    derivative_fd: float | None
    scale: float

    def __iter__(self):
        yield self.numerator
        yield self.trace

    @property
    def fd_rel_error(self) -> float | None:
        if self.derivative_fd is None:
            return None
        return abs(self.derivative - self.derivative_fd) / max(abs(self.derivative_fd), abs(self.derivative), 1e-300)


def _check_gamma(gamma: float) -> None:
    if gamma == 0 or abs(gamma) < 1e-14:
        raise GammaZero("the numerator is undefined at gamma = 0")


@dataclass
class _Prepared:
    """Spectral data shared by all evaluations on one quadruple."""

    layout: SystemLayout
    rho_w: np.ndarray
    rho_v: np.ndarray
    eigs: list  # [(w, v, sub_layout)] for X1, X2, X3
    coefs: list  # exponent multipliers for X1, X2, X3 (outer two halved)


def _prepare(rho, tau, omega, theta, ordering) -> _Prepared:
    ordering = Ordering.parse(ordering)
    ops = {"tau": tau, "omega": omega, "theta": theta}
    eigs, coefs = [], []
    for k, name in enumerate(ordering.value):
        x = ops[name]
        sp = x.spectrum
        eigs.append((sp.eigenvalues, sp.eigenvectors, x.layout))
        coefs.append(_COEF[name] * (0.5 if k < 2 else 1.0))
    sp = rho.spectrum
    return _Prepared(rho.layout, sp.eigenvalues, sp.eigenvectors, eigs, coefs)


def _fn(w: np.ndarray, v: np.ndarray, vals: np.ndarray) -> np.ndarray:
    return (v * vals) @ v.conj().T


def _pos(w: np.ndarray) -> np.ndarray:
    if w[0] <= SUPP_TOL * max(1.0, float(w[-1])):
        raise SupportViolation("derivative numerators require strictly positive inputs")
    return w


def _factor_list(p: _Prepared, gamma: float, with_logs: bool):
    """Palindrome factors ``F0 F1 F2 F1 F0`` (and their log generators)."""
    facs, logs = [], []
    for (w, v, lay), c in zip(p.eigs, p.coefs):
        w = _pos(w)
        facs.append(embed_array(_fn(w, v, w ** (c * gamma)), lay, p.layout))
        if with_logs:
            logs.append(embed_array(_fn(w, v, c * np.log(w)), lay, p.layout))
    order = [0, 1, 2, 1, 0]
    return [facs[i] for i in order], ([logs[i] for i in order] if with_logs else None)


def _trace_y(p: _Prepared, gamma: float) -> float:
    w = _pos(p.rho_w)
    f, _ = _factor_list(p, gamma, False)
    m = _fn(w, p.rho_v, w ** (1.0 + gamma))
    for x in f:
        m = m @ x
    return float(np.real(np.trace(m)))


def trace_y(rho, tau, omega, theta, ordering, gamma: float) -> float:
    """``Tr{Y(gamma)}``, equal to ``Q_alpha`` at ``alpha = 1 + gamma``."""
    return _trace_y(_prepare(rho, tau, omega, theta, ordering), gamma)


def _insertion_derivative(p: _Prepared, gamma: float) -> tuple[float, float]:
    """``(Tr Y, Tr dY/dgamma)`` from the log-insertion expansion."""
    w = _pos(p.rho_w)
    f, lg = _factor_list(p, gamma, True)
    r0 = _fn(w, p.rho_v, w ** (1.0 + gamma))
    l0 = _fn(w, p.rho_v, np.log(w))
    factors = [r0] + f
    gens = [l0] + lg
    n = len(factors)
    # suffix[j] = factors[j] @ ... @ factors[n-1]
    suffix = [None] * (n + 1)
    suffix[n] = np.eye(factors[0].shape[0], dtype=complex)
    for j in range(n - 1, -1, -1):
        suffix[j] = factors[j] @ suffix[j + 1]
    prefix = np.eye(factors[0].shape[0], dtype=complex)
    deriv = 0.0
    for j in range(n):
        deriv += float(np.real(np.trace(prefix @ gens[j] @ suffix[j])))
        prefix = prefix @ factors[j]
    return float(np.real(np.trace(suffix[0]))), deriv


def _finalize(gamma: float, tr: float, deriv: float, fd: float | None) -> Numerator:
    if not tr > 0:
        raise SupportViolation(f"trace of the gamma-family is {tr}")
    a = gamma * deriv
    b = tr * math.log(tr)
    return Numerator(a - b, tr, deriv, fd, max(abs(a), abs(b)))


def numerator_nonsandwiched(
    rho: HermitianOperator,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    ordering: Ordering | str,
    gamma: float,
    check_fd: bool = False,
    fd_step: float = 1e-5,
) -> Numerator:
    """Derivative numerator of the Petz-type family at ``alpha = 1 + gamma``.

    ``Tr{dY/dgamma}`` is the sum of the six log-insertion terms (one for
    ``rho^{1+gamma}`` and one per factor of the palindrome). With
    ``check_fd=True`` the central difference of ``Tr Y`` with step ``fd_step``
    is computed as well.

    Raises
    ------
    GammaZero
    SupportViolation
        If an input is not strictly positive.
    """
    _check_gamma(gamma)
    p = _prepare(rho, tau, omega, theta, ordering)
    tr, deriv = _insertion_derivative(p, gamma)
    fd = None
    if check_fd:
        fd = (_trace_y(p, gamma + fd_step) - _trace_y(p, gamma - fd_step)) / (2.0 * fd_step)
    return _finalize(gamma, tr, deriv, fd)


def _trace_z(p: _Prepared, mu_w: np.ndarray, mu_v: np.ndarray, gamma: float) -> float:
    w = _pos(p.rho_w)
    f, _ = _factor_list(p, gamma, False)
    half = _fn(w, p.rho_v, np.sqrt(w))
    m = half
    for x in f:
        m = m @ x
    m = m @ half @ _fn(mu_w, mu_v, _pos(mu_w) ** gamma)
    return float(np.real(np.trace(m)))


def trace_z(rho, tau, omega, theta, mu, ordering, gamma: float) -> float:
    """``Tr{Z(gamma)}`` for the sandwiched family."""
    p = _prepare(rho, tau, omega, theta, ordering)
    return _trace_z(p, mu.spectrum.eigenvalues, mu.spectrum.eigenvectors, gamma)


def numerator_sandwiched(
    rho: HermitianOperator,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    mu: HermitianOperator,
    ordering: Ordering | str,
    gamma: float,
    fd_step: float = 1e-5,
) -> Numerator:
    """Derivative numerator of the sandwiched family at ``gamma = (alpha - 1)/alpha``.

    ``Tr{dZ/dgamma}`` is obtained from central differences with steps ``h``
    and ``h/2`` combined by Richardson extrapolation. ``derivative_fd`` holds
    the plain central difference with step ``h`` for comparison.
    """
    _check_gamma(gamma)
    p = _prepare(rho, tau, omega, theta, ordering)
    mw, mv = mu.spectrum.eigenvalues, mu.spectrum.eigenvectors

    def central(h: float) -> float:
        return (_trace_z(p, mw, mv, gamma + h) - _trace_z(p, mw, mv, gamma - h)) / (2.0 * h)

    d1 = central(fd_step)
    d2 = central(fd_step / 2.0)
    deriv = (4.0 * d2 - d1) / 3.0
    return _finalize(gamma, _trace_z(p, mw, mv, gamma), deriv, d1)


def optimal_mu(rho, tau, omega, theta, ordering, gamma: float) -> DensityOperator:
    """Hölder-optimal ``mu = A^alpha / Tr A^alpha`` with ``A = rho^{1/2} W rho^{1/2}``.

    At this ``mu``, ``Tr Z(gamma) = ||A||_alpha = Q~_alpha^{1/alpha}`` where
    ``alpha = 1 / (1 - gamma)``.
    """
    _check_gamma(gamma)
    if gamma >= 1:
        raise ConfigError("the sandwiched family needs gamma < 1")
    alpha = 1.0 / (1.0 - gamma)
    p = _prepare(rho, tau, omega, theta, ordering)
    w = _pos(p.rho_w)
    f, _ = _factor_list(p, gamma, False)
    half = _fn(w, p.rho_v, np.sqrt(w))
    m = half
    for x in f:
        m = m @ x
    a = hermitize(m @ half)
    mu = mpow(a, alpha)
    return DensityOperator._trusted(rho.layout, hermitize(mu / float(np.real(np.trace(mu)))))


# ---------------------------------------------------------------------------
# Variances
# ---------------------------------------------------------------------------
def _log_ratio(rho, tau, omega, theta, include_rho: bool) -> np.ndarray:
    lay = rho.layout
    h = np.zeros((lay.total_dim, lay.total_dim), dtype=complex)
    for x, s in ((tau, -1.0), (theta, -1.0), (omega, 1.0)):
        sp = x.spectrum
        h = h + s * embed_array(mlog(x.entries, eig=(sp.eigenvalues, sp.eigenvectors)), x.layout, lay)
    if include_rho:
        sp = rho.spectrum
        h = h + mlog(rho.entries, eig=(sp.eigenvalues, sp.eigenvectors))
    return hermitize(h)


def info_variance(rho, tau, omega, theta) -> float:
    """``Tr rho [log rho - log tau - log theta + log omega - Delta]^2``.

    Raises
    ------
    SupportViolation
        If ``supp(rho)`` is not inside the supports of ``tau``, ``theta``, ``omega``.
    """
    if not math.isfinite(delta(rho, tau, theta, omega)):
        raise SupportViolation("information variance requires the support condition")
    h = _log_ratio(rho, tau, omega, theta, include_rho=True)
    half = mpow(rho.entries, 0.5)
    mean = float(np.real(np.trace(rho.entries @ h)))
    k = (h - mean * np.eye(h.shape[0])) @ half
    return float(np.real(np.vdot(k, k)))


def cmi_variance(rho, part: Partition) -> float:
    """Information variance at the marginals ``(rho_AC, rho_C, rho_BC)``."""
    m = marginals(rho, part)
    return info_variance(m.rho, m.ac, m.c, m.bc)


def sandwiched_variance(rho, tau, omega, theta, mu) -> float:
    """``<phi|H^2|phi> - <phi|H|phi>^2`` on the doubled space.

    ``H = L (x) I + I (x) (log mu)^T`` with ``L = log omega - log tau - log theta``
    and ``|phi> = (rho^{1/2} (x) I)|Gamma>``. With ``Phi = rho^{1/2}`` this is
    ``||L Phi + Phi M||_F^2 - (Tr rho L + Tr rho M)^2`` where ``M = log mu``.
    """
    ell = _log_ratio(rho, tau, omega, theta, include_rho=False)
    sp = mu.spectrum
    m = mlog(mu.entries, eig=(sp.eigenvalues, sp.eigenvectors))
    phi = mpow(rho.entries, 0.5)
    hphi = ell @ phi + phi @ m
    first = float(np.real(np.vdot(phi, hphi)))
    second = float(np.real(np.vdot(hphi, hphi)))
    return second - first**2


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SweepConfig:
    """Parameters of a sign-study campaign.

    Attributes
    ----------
    family : {"nonsandwiched", "sandwiched"}
    ordering : Ordering
    gamma_start, gamma_end, gamma_step : float
        Inclusive grid ``start, start + step, ...`` up to ``end``; ``gamma = 0`` is skipped.
    trials_per_gamma : int
    dims : tuple of int
        Dimensions of A, B, C (upper bounds when ``random_dims``).
    seed : int
    random_dims : bool
        Draw each local dimension uniformly from ``2..dims[i]`` per trial.
    xi : float
        Maximally mixed admixture making every sampled state strictly positive.
    tol_violation : float
        A numerator below ``-tol_violation`` is a violation.
    tag_rel : float
        Trials with ``|numerator| <= tag_rel * scale`` are tagged as unresolved.
    check_fd : bool
        Compare analytic and finite-difference derivatives (tagging mismatches).
    classical : bool
        Sample only diagonal (commuting) inputs.
    """

    family: str = "nonsandwiched"
    ordering: Ordering = Ordering.TAU_OMEGA_THETA
    gamma_start: float = -0.99
    gamma_end: float = 10.0
    gamma_step: float = 0.05
    trials_per_gamma: int = 1000
    dims: tuple[int, ...] = (2, 2, 2)
    seed: int = 0
    random_dims: bool = False
    xi: float = 1e-3
    tol_violation: float = 1e-9
    tag_rel: float = TAG_REL
    check_fd: bool = False
    classical: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordering", Ordering.parse(self.ordering))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.family not in ("nonsandwiched", "sandwiched"):
            raise ConfigError(f"family must be 'nonsandwiched' or 'sandwiched', got {self.family!r}")
        if not self.gamma_step > 0:
            raise ConfigError("gamma_step must be positive")
        if self.gamma_end < self.gamma_start:
            raise ConfigError("gamma_end must not be below gamma_start")
        if self.trials_per_gamma < 1:
            raise ConfigError("trials_per_gamma must be at least 1")
        if len(self.dims) != 3 or any(not 2 <= d <= 6 for d in self.dims):
            raise ConfigError("dims must list three local dimensions in [2, 6]")
        if self.family == "nonsandwiched" and self.gamma_start <= -1:
            raise ConfigError("the Petz-type family needs gamma > -1 (alpha > 0)")
        if self.family == "sandwiched" and self.gamma_end >= 1:
            raise ConfigError("the sandwiched family needs gamma < 1")
        if not 0 < self.xi < 1:
            raise ConfigError("xi must lie in (0, 1)")


def sweep_preset(name: str, family: str = "nonsandwiched", **overrides) -> SweepConfig:
    """Named configurations.

    ``"full"``: step 0.05, 1000 trials, dims up to 6 drawn per trial.
    ``"desk"``: step 0.5, 100 trials, dims drawn from 2..4.
    ``"smoke"``: step 2.5, 5 trials, qubits.
    """
    lo, hi = (-0.99, 10.0) if family == "nonsandwiched" else (-10.0, 0.99)
    presets = {
        "full": dict(gamma_step=0.05, trials_per_gamma=1000, dims=(6, 6, 6), random_dims=True),
        "desk": dict(gamma_step=0.5, trials_per_gamma=100, dims=(4, 4, 4), random_dims=True),
        "smoke": dict(gamma_step=2.5, trials_per_gamma=5, dims=(2, 2, 2), random_dims=False),
    }
    if name not in presets:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    kw = dict(family=family, gamma_start=lo, gamma_end=hi, **presets[name])
    kw.update(overrides)
    return SweepConfig(**kw)


def gamma_grid(start: float, end: float, step: float) -> list[float]:
    """Grid ``start + k step`` up to ``end`` (inclusive), rounded, without zero."""
    n = int(math.floor((end - start) / step + 1e-9)) + 1
    grid = [round(start + k * step, 12) for k in range(n)]
    return [g for g in grid if abs(g) > 1e-12]


@dataclass(frozen=True)
class TrialRecord:
    """One evaluated trial of a sweep."""

    family: str
    ordering: str
    gamma: float
    trial_index: int
    seed: int
    numerator: float
    trace: float
    tagged: bool
    violation: bool
    fd_rel_error: float | None = None
    error: str | None = None

    @property
    def trace_Y(self) -> float:  # noqa: N802 - field name used in reports
        return self.trace


@dataclass
class GammaSummary:
    gamma: float
    trials: int = 0
    violations: int = 0
    tagged: int = 0
    tagged_violations: int = 0
    failed: int = 0
    min_numerator: float = math.inf


def _sample_dims(cfg: SweepConfig, rng: np.random.Generator) -> tuple[int, ...]:
    if not cfg.random_dims:
        return cfg.dims
    return tuple(int(rng.integers(2, d + 1)) for d in cfg.dims)


def _sample(layout: SystemLayout, rng: np.random.Generator, cfg: SweepConfig) -> DensityOperator:
    if cfg.classical:
        p = rng.standard_normal(layout.total_dim) ** 2 + rng.standard_normal(layout.total_dim) ** 2
        p = (1 - cfg.xi) * p / p.sum() + cfg.xi / layout.total_dim
        return classical_state(p / p.sum(), layout)
    return random_density(layout, rng, xi=cfg.xi)


def _run_trial(cfg: SweepConfig, gi: int, gamma: float, ti: int) -> TrialRecord:
    rng = trial_rng(cfg.seed, gi, ti)
    base = dict(family=cfg.family, ordering=cfg.ordering.tag, gamma=gamma, trial_index=ti, seed=cfg.seed)
    try:
        da, db, dc = _sample_dims(cfg, rng)
        lay = SystemLayout([("A", da), ("B", db), ("C", dc)])
        rho = _sample(lay, rng, cfg)
        tau = _sample(lay.sub("AC"), rng, cfg)
        omega = _sample(lay.sub("C"), rng, cfg)
        theta = _sample(lay.sub("BC"), rng, cfg)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConditioningWarning)
            if cfg.family == "nonsandwiched":
                num = numerator_nonsandwiched(rho, tau, omega, theta, cfg.ordering, gamma, check_fd=cfg.check_fd)
            else:
                mu = _sample(lay, rng, cfg)
                num = numerator_sandwiched(rho, tau, omega, theta, mu, cfg.ordering, gamma)
        fd_err = num.fd_rel_error if (cfg.check_fd or cfg.family == "sandwiched") else None
        tagged = abs(num.numerator) <= cfg.tag_rel * num.scale or bool(caught)
        if cfg.check_fd and fd_err is not None and fd_err > FD_REL_TOL:
            tagged = True
        if not math.isfinite(num.numerator):
            tagged = True
        return TrialRecord(
            **base,
            numerator=num.numerator,
            trace=num.trace,
            tagged=tagged,
            violation=num.numerator < -cfg.tol_violation,
            fd_rel_error=fd_err,
        )
    except (RCMIError, np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        return TrialRecord(
            **base, numerator=math.nan, trace=math.nan, tagged=True, violation=False, error=f"{type(exc).__name__}: {exc}"
        )


def worker_count() -> int:
    """Worker threads for sweeps: ``RCMI_THREADS`` if set, else the CPU count."""
    env = os.environ.get("RCMI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"RCMI_THREADS must be an integer, got {env!r}") from None
    return max(1, os.cpu_count() or 1)


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[TrialRecord]:
    """Evaluate the numerator on ``trials_per_gamma`` fresh inputs per grid point.

    Each trial draws from its own substream keyed on
    ``(seed, gamma_index, trial_index)``, so the records do not depend on
    the number of worker threads. Records are returned ordered by
    ``(gamma, trial_index)``. Failures are recorded, never raised.
    """
    grid = gamma_grid(cfg.gamma_start, cfg.gamma_end, cfg.gamma_step)
    jobs = [(gi, g, ti) for gi, g in enumerate(grid) for ti in range(cfg.trials_per_gamma)]
    workers = worker_count() if workers is None else max(1, int(workers))
    if workers == 1:
        return [_run_trial(cfg, *j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: _run_trial(cfg, *j), jobs))


def summarize(records: Sequence[TrialRecord]) -> list[GammaSummary]:
    """Per-gamma counts; ``violations`` counts untagged violations only."""
    out: dict[float, GammaSummary] = {}
    for r in records:
        s = out.setdefault(r.gamma, GammaSummary(r.gamma))
        s.trials += 1
        if r.error is not None:
            s.failed += 1
            continue
        s.min_numerator = min(s.min_numerator, r.numerator)
        if r.tagged:
            s.tagged += 1
            s.tagged_violations += int(r.violation)
        else:
            s.violations += int(r.violation)
    return list(out.values())
