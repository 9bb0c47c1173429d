"""Relative entropies, entropies, conditional entropies and mutual informations.

All quantities are in nats. Values that are infinite because a support
condition fails are returned as ``math.inf`` with ``support_violated=True``;
they are never replaced by large finite numbers.

Inputs may be :class:`~rcmi.linalg.HermitianOperator` instances or bare
square arrays. When both arguments of a divergence are operators their
layouts must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import LayoutMismatch, OutOfRange, ZeroOperator
from .linalg import (
    PSD_TOL,
    SUPP_TOL,
    HermitianOperator,
    SystemLayout,
    eigh,
    embed_array,
    hermitize,
    mlog,
    mpow,
    mproj,
    ptrace_array,
)

__all__ = [
    "ALPHA_ONE_TOL",
    "DivergenceResult",
    "support_included",
    "orthogonal",
    "rel_entropy",
    "renyi_rel_entropy",
    "sandwiched_renyi",
    "d_max",
    "d_min",
    "entropy",
    "renyi_entropy",
    "cond_renyi_entropy",
    "renyi_mutual_info",
    "sibson_mutual_info",
    "log_trace_power",
]

#: Below this distance from one, Renyi quantities return their von Neumann value.
ALPHA_ONE_TOL = 1e-7
#: Relative weight of P outside supp(Q) tolerated before declaring non-inclusion.
SUPPORT_WEIGHT_TOL = 1e-10


@dataclass(frozen=True)
class DivergenceResult:
    """Extended-real divergence value.

    Attributes
    ----------
    value : float
        Finite value or ``math.inf``.
    support_violated : bool
        True exactly when ``value`` is infinite because of a support condition.
    """

    value: float
    support_violated: bool = False

    def __float__(self) -> float:
        return self.value

    @classmethod
    def infinite(cls) -> "DivergenceResult":
        return cls(math.inf, True)


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, HermitianOperator) and isinstance(q, HermitianOperator):
        if p.layout != q.layout:
            raise LayoutMismatch(f"layouts differ: {p.layout} vs {q.layout}")
    pm = p.entries if isinstance(p, HermitianOperator) else hermitize(np.asarray(p, dtype=complex))
    qm = q.entries if isinstance(q, HermitianOperator) else hermitize(np.asarray(q, dtype=complex))
    if pm.shape != qm.shape:
        raise LayoutMismatch(f"shapes differ: {pm.shape} vs {qm.shape}")
    return pm, qm


def _trace(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))


def _trp(pm: np.ndarray) -> float:
    tr = _trace(pm)
    if tr <= PSD_TOL:
        raise ZeroOperator("first argument of a divergence must be non-zero")
    return tr


def support_included(p: np.ndarray, q: np.ndarray, supp_tol: float = SUPP_TOL) -> bool:
    """Whether ``supp(p)`` is contained in ``supp(q)`` (both PSD arrays).

    Decided by the weight ``Tr{p (I - q^0)}`` relative to ``Tr p``.
    """
    proj = mproj(q, supp_tol)
    outside = _trace(p) - _trace(p @ proj)
    return outside <= SUPPORT_WEIGHT_TOL * max(_trace(p), 1e-300)


def orthogonal(p: np.ndarray, q: np.ndarray, supp_tol: float = SUPP_TOL) -> bool:
    """Whether ``Tr{p^0 q^0} <= supp_tol``."""
    return _trace(mproj(p, supp_tol) @ mproj(q, supp_tol)) <= supp_tol


def _plogp(w: np.ndarray, supp_tol: float) -> float:
    keep = w > supp_tol * max(1.0, float(w[-1]))
    return float(np.sum(w[keep] * np.log(w[keep])))


def log_trace_power(w: np.ndarray, power: float, supp_tol: float = SUPP_TOL) -> float:
    """``log sum_i w_i^power`` over eigenvalues above ``supp_tol * max(w)``.

    The cutoff is relative: ``w`` is typically the spectrum of a product such
    as ``Q^{g/2} P Q^{g/2}``, whose overall scale can be far below one while
    its small eigenvalues are still resolved to full relative precision.
    ``w`` must be sorted ascending.
    """
    top = float(w[-1]) if w.size else 0.0
    keep = w > supp_tol * top
    if not np.any(keep):
        return -math.inf
    return float(logsumexp(power * np.log(w[keep])))


def rel_entropy(p, q, supp_tol: float = SUPP_TOL) -> DivergenceResult:
    """Umegaki relative entropy ``[Tr P]^{-1} (Tr P log P - Tr P log Q)``.

    Returns
    -------
    DivergenceResult
        Infinite when ``supp(P)`` is not contained in ``supp(Q)``.

    Examples
    --------
    >>> rel_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2).value  # doctest: +ELLIPSIS
    0.6931471805599...
    """
    pm, qm = _pair(p, q)
    trp = _trp(pm)
    if not support_included(pm, qm, supp_tol):
        return DivergenceResult.infinite()
    wp, _ = eigh(pm)
    val = (_plogp(wp, supp_tol) - _trace(pm @ mlog(qm, supp_tol))) / trp
    return DivergenceResult(val)


def _check_alpha(alpha: float, lo: float = 0.0) -> None:
    if not alpha >= lo or math.isnan(alpha):
        raise OutOfRange(f"alpha={alpha} outside the admissible domain")


def renyi_rel_entropy(p, q, alpha: float, supp_tol: float = SUPP_TOL) -> DivergenceResult:
    """Petz-Renyi relative entropy.

    ``D_alpha(P||Q) = (alpha-1)^{-1} log( Tr{P^alpha Q^{1-alpha}} / Tr P )``

    Finite when ``supp(P)`` lies in ``supp(Q)``, or when ``alpha < 1`` and
    the supports are not orthogonal. For ``|alpha - 1| < 1e-7`` the Umegaki
    value is returned.
    """
    _check_alpha(alpha)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return rel_entropy(p, q, supp_tol)
    pm, qm = _pair(p, q)
    trp = _trp(pm)
    if alpha > 1 and not support_included(pm, qm, supp_tol):
        return DivergenceResult.infinite()
    if alpha < 1 and orthogonal(pm, qm, supp_tol):
        return DivergenceResult.infinite()
    val = _trace(mpow(pm, alpha, supp_tol) @ mpow(qm, 1.0 - alpha, supp_tol))
    if val <= 0:
        return DivergenceResult.infinite()
    return DivergenceResult(math.log(val / trp) / (alpha - 1.0))


def sandwiched_renyi(
    p, q, alpha: float, supp_tol: float = SUPP_TOL, form: str = "sandwich"
) -> DivergenceResult:
    """Sandwiched Renyi relative entropy.

    ``(alpha-1)^{-1} log( Tr{(Q^{g/2} P Q^{g/2})^alpha} / Tr P )`` with
    ``g = (1-alpha)/alpha``.

    Parameters
    ----------
    form : {"sandwich", "norm", "swapped"}
        ``"sandwich"`` evaluates the eigenvalues of ``Q^{g/2} P Q^{g/2}``;
        ``"norm"`` goes through the Schatten quantity of the same matrix;
        ``"swapped"`` uses ``P^{1/2} Q^{g} P^{1/2}``. All three agree up to
        round-off and are exposed for cross-checking.
    """
    _check_alpha(alpha)
    if form not in ("sandwich", "norm", "swapped"):
        raise OutOfRange(f"unknown form {form!r}")
    if alpha == 0:
        raise OutOfRange("the sandwiched family is defined for alpha > 0")
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return rel_entropy(p, q, supp_tol)
    pm, qm = _pair(p, q)
    trp = _trp(pm)
    if alpha > 1 and not support_included(pm, qm, supp_tol):
        return DivergenceResult.infinite()
    if alpha < 1 and orthogonal(pm, qm, supp_tol):
        return DivergenceResult.infinite()
    g = (1.0 - alpha) / alpha
    if form == "swapped":
        sp = mpow(pm, 0.5, supp_tol)
        inner = hermitize(sp @ mpow(qm, g, supp_tol) @ sp)
    else:
        qg = mpow(qm, g / 2.0, supp_tol)
        inner = hermitize(qg @ pm @ qg)
    if form == "norm":
        s = np.linalg.svd(inner, compute_uv=False)
        s = s[s > 0]
        if s.size == 0:
            return DivergenceResult.infinite()
        logq = alpha * math.log(float(np.sum((s / s.max()) ** alpha)) ** (1 / alpha) * s.max())
    else:
        w = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
        logq = log_trace_power(w, alpha, supp_tol)
    if not math.isfinite(logq):
        return DivergenceResult.infinite()
    return DivergenceResult((logq - math.log(trp)) / (alpha - 1.0))


def d_max(p, q, supp_tol: float = SUPP_TOL) -> DivergenceResult:
    """Max-relative entropy ``log || Q^{-1/2} P Q^{-1/2} ||_inf``."""
    pm, qm = _pair(p, q)
    _trp(pm)
    if not support_included(pm, qm, supp_tol):
        return DivergenceResult.infinite()
    qi = mpow(qm, -0.5, supp_tol)
    lam = float(np.linalg.eigvalsh(hermitize(qi @ pm @ qi))[-1])
    return DivergenceResult(math.log(lam))


def d_min(p, q, supp_tol: float = SUPP_TOL) -> DivergenceResult:
    """Min-relative entropy ``-log F(P, Q)``."""
    pm, qm = _pair(p, q)
    _trp(pm)
    s = np.linalg.svd(mpow(pm, 0.5, supp_tol) @ mpow(qm, 0.5, supp_tol), compute_uv=False)
    f = float(np.sum(s)) ** 2
    if f <= supp_tol:
        return DivergenceResult.infinite()
    return DivergenceResult(-math.log(f))


def _eigvals(rho) -> np.ndarray:
    if isinstance(rho, HermitianOperator):
        return rho.spectrum.eigenvalues
    return np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))


def entropy(rho, supp_tol: float = SUPP_TOL) -> float:
    """Von Neumann entropy ``-Tr rho log rho``."""
    w = _eigvals(rho)
    return -_plogp(w, supp_tol)


def renyi_entropy(rho, alpha: float, supp_tol: float = SUPP_TOL) -> float:
    """Renyi entropy ``(1-alpha)^{-1} log Tr rho^alpha``.

    ``alpha = 0`` gives the log-rank, ``alpha = inf`` the min-entropy and
    ``|alpha - 1| < 1e-7`` the von Neumann entropy.
    """
    _check_alpha(alpha)
    w = _eigvals(rho)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return entropy(rho, supp_tol)
    if math.isinf(alpha):
        return -math.log(float(w[-1]))
    return log_trace_power(w, alpha, supp_tol) / (1.0 - alpha)


# ---------------------------------------------------------------------------
# Conditional entropies and mutual informations
# ---------------------------------------------------------------------------
def _split(rho: HermitianOperator, a: Sequence[str]) -> tuple[SystemLayout, SystemLayout]:
    a = tuple(a)
    for lab in a:
        rho.layout.index(lab)
    b_labels = [lab for lab in rho.layout.labels if lab not in a]
    if not a or not b_labels:
        raise OutOfRange("both the A and B groups must be non-empty")
    return rho.layout.sub(a), rho.layout.sub(b_labels)


def cond_renyi_entropy(
    rho: HermitianOperator,
    a: Sequence[str],
    alpha: float,
    variant: str = "optimized",
    supp_tol: float = SUPP_TOL,
) -> float:
    """Conditional Renyi entropy ``H_alpha(A|B)`` with B the remaining systems.

    Parameters
    ----------
    variant : {"optimized", "fixed_marginal"}
        ``"optimized"`` is ``-min_sigma D_alpha(rho_AB || I_A (x) sigma_B)``,
        evaluated in closed form with the minimizer proportional to
        ``(Tr_A rho^alpha)^{1/alpha}``. ``"fixed_marginal"`` fixes
        ``sigma_B = rho_B``.
    """
    _check_alpha(alpha)
    lay_a, lay_b = _split(rho, a)
    lay = rho.layout
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        rho_b = ptrace_array(rho.entries, lay, lay_a.labels)
        return entropy(rho, supp_tol) - entropy(rho_b, supp_tol)
    if variant == "fixed_marginal":
        rho_b = ptrace_array(rho.entries, lay, lay_a.labels)
        sigma = embed_array(rho_b, lay_b, lay)
        return -renyi_rel_entropy(rho.entries, sigma, alpha, supp_tol).value
    if variant != "optimized":
        raise OutOfRange(f"unknown variant {variant!r}")
    g = hermitize(ptrace_array(mpow(rho.entries, alpha, supp_tol), lay, lay_a.labels))
    w = np.clip(np.linalg.eigvalsh(g), 0.0, None)
    if alpha == 0:
        return math.log(float(w[-1]))
    return alpha / (1.0 - alpha) * log_trace_power(w, 1.0 / alpha, supp_tol)


def sibson_mutual_info(
    rho: HermitianOperator, a: Sequence[str], alpha: float, supp_tol: float = SUPP_TOL
) -> tuple[float, np.ndarray]:
    """Closed-form ``min_sigma D_alpha(rho_AB || rho_A (x) sigma_B)`` and its minimizer.

    Returns
    -------
    value : float
    sigma_b : ndarray
        Optimal ``sigma_B`` as a matrix on the B systems (remaining labels).
    """
    _check_alpha(alpha)
    lay_a, lay_b = _split(rho, a)
    lay = rho.layout
    rho_a = ptrace_array(rho.entries, lay, lay_b.labels)
    ra = embed_array(mpow(rho_a, (1.0 - alpha) / 2.0, supp_tol), lay_a, lay)
    inner = hermitize(ra @ mpow(rho.entries, alpha, supp_tol) @ ra)
    g = hermitize(ptrace_array(inner, lay, lay_a.labels))
    w, v = eigh(g)
    w = np.clip(w, 0.0, None)
    if alpha == 0:
        val = -math.log(float(w[-1]))
        top = v[:, -1:]
        return val, top @ top.conj().T
    sig = mpow(g, 1.0 / alpha, supp_tol, eig=(w, v))
    sig = hermitize(sig / _trace(sig))
    return alpha / (alpha - 1.0) * log_trace_power(w, 1.0 / alpha, supp_tol), sig


def renyi_mutual_info(
    rho: HermitianOperator,
    a: Sequence[str],
    alpha: float,
    sandwiched: bool = False,
    cfg=None,
    rng: np.random.Generator | None = None,
    supp_tol: float = SUPP_TOL,
) -> float:
    """Renyi mutual information ``min_sigma D(rho_AB || rho_A (x) sigma_B)``.

    The Petz family uses the closed-form minimizer. The sandwiched family is
    minimized numerically over ``sigma_B`` (see :mod:`rcmi.optimize`); pass
    ``cfg`` and ``rng`` to control the search.
    """
    _check_alpha(alpha)
    lay_a, lay_b = _split(rho, a)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        lay = rho.layout
        ra = ptrace_array(rho.entries, lay, lay_b.labels)
        rb = ptrace_array(rho.entries, lay, lay_a.labels)
        return entropy(ra, supp_tol) + entropy(rb, supp_tol) - entropy(rho, supp_tol)
    if not sandwiched:
        return sibson_mutual_info(rho, a, alpha, supp_tol)[0]

    from .optimize import StateSearchConfig, minimize_over_state

    lay = rho.layout
    rho_a = ptrace_array(rho.entries, lay, lay_b.labels)
    rho_b = ptrace_array(rho.entries, lay, lay_a.labels)
    ra_full = embed_array(rho_a, lay_a, lay)

    def objective(sigma) -> float:
        t = ra_full @ embed_array(sigma.entries, lay_b, lay)
        return sandwiched_renyi(rho.entries, t, alpha, supp_tol).value

    cfg = cfg or StateSearchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    res = minimize_over_state(objective, lay_b, cfg, rng, init=[rho_b])
    return res.value
