"""Conditional mutual information and its Renyi generalizations.

The central objects are the four-argument functionals built from a state
``rho_ABC`` and three positive operators ``tau_AC``, ``omega_C`` and
``theta_BC``:

* ``delta`` : ``Tr rho [log rho - log tau - log theta + log omega]``;
* ``q_alpha`` / ``delta_alpha`` : ``Tr rho^alpha`` against a palindromic
  product of powers of ``tau``, ``omega`` and ``theta``;
* ``q_tilde_alpha`` / ``delta_tilde_alpha`` : the sandwiched analogue.

The palindromic product is fixed by an :class:`Ordering`. For the ordering
``(X1, X2, X3)`` and the Petz family the product is

    X1^{s1/2} X2^{s2/2} X3^{s3} X2^{s2/2} X1^{s1/2}

where ``s = 1 - alpha`` for ``tau`` and ``theta`` and ``s = alpha - 1`` for
``omega``. The first element is outermost and the last element carries the
full power. The sandwiched family divides every exponent by ``alpha``.

The operators ``tau``, ``omega`` and ``theta`` may live on any sub-layout of
``rho.layout``; they are extended by identities before multiplication.
Evaluated at the marginals ``(rho_AC, rho_C, rho_BC)`` all of these reduce
to conditional mutual informations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .divergences import ALPHA_ONE_TOL, entropy, log_trace_power, renyi_entropy
from .errors import AlphaEqualsOne, OrthogonalityViolation, OutOfRange
from .linalg import (
    PSD_TOL,
    SUPP_TOL,
    HermitianOperator,
    SystemLayout,
    eigh,
    embed_array,
    hermitize,
    joint_layout,
    mexp,
    mlog,
    mpow,
    mproj,
    ptrace_array,
)
from .partition import Partition
from .states import DensityOperator, marginal

__all__ = [
    "Partition",
    "Ordering",
    "ConditioningWarning",
    "Marginals",
    "marginals",
    "cmi",
    "naive_renyi_cmi",
    "delta",
    "q_alpha",
    "delta_alpha",
    "log_q_tilde_alpha",
    "q_tilde_alpha",
    "delta_tilde_alpha",
    "delta_max",
    "delta_min",
    "delta_alpha_marginals",
    "delta_tilde_alpha_marginals",
    "renyi_cmi_sibson",
    "sibson_optimal_sigma",
    "sandwiched_renyi_cmi",
    "i_max",
    "i_min",
    "pinsker_gap",
    "lie_trotter_operator",
    "lie_trotter_limit",
    "recovered_operator",
]

#: Relative deviation from Hermiticity of ordered products that triggers a warning.
ASYMMETRY_WARN = 1e-8


class ConditioningWarning(RuntimeWarning):
    """Emitted when round-off in an ordered operator product is unusually large."""


class Ordering(Enum):
    """Left-to-right placement of ``(tau_AC, omega_C, theta_BC)``."""

    TAU_OMEGA_THETA = ("tau", "omega", "theta")
    THETA_OMEGA_TAU = ("theta", "omega", "tau")
    OMEGA_TAU_THETA = ("omega", "tau", "theta")
    OMEGA_THETA_TAU = ("omega", "theta", "tau")
    TAU_THETA_OMEGA = ("tau", "theta", "omega")
    THETA_TAU_OMEGA = ("theta", "tau", "omega")

    @property
    def tag(self) -> str:
        return "-".join(self.value)

    @classmethod
    def parse(cls, text: "str | Ordering | Sequence[str]") -> "Ordering":
        """Accept an :class:`Ordering`, a tuple of names, or ``"tau-omega-theta"``.

        Commas, dashes or whitespace may separate the names.
        """
        if isinstance(text, Ordering):
            return text
        if isinstance(text, str):
            names = tuple(s for s in text.replace(",", " ").replace("-", " ").split() if s)
        else:
            names = tuple(text)
        for member in cls:
            if member.value == names:
                return member
        raise OutOfRange(f"unknown ordering {text!r}")


#: Sign attached to each operator in the exponents: ``+1`` multiplies ``1 - alpha``.
_SIGN = {"tau": 1.0, "theta": 1.0, "omega": -1.0}


# ---------------------------------------------------------------------------
# Marginals
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Marginals:
    """A state restricted to ``A B C`` together with its ``AC``, ``C``, ``BC`` marginals."""

    rho: DensityOperator
    ac: DensityOperator
    c: DensityOperator
    bc: DensityOperator
    part: Partition

    @property
    def layout(self) -> SystemLayout:
        return self.rho.layout


def marginals(rho: HermitianOperator, part: Partition) -> Marginals:
    """Reduce ``rho`` to the systems of ``part`` and compute its marginals.

    Raises
    ------
    BadPartition
    """
    part.validate(rho.layout)
    r = marginal(rho, part.abc) if part.d else _as_density(rho)
    return Marginals(
        rho=r,
        ac=marginal(r, part.a + part.c),
        c=marginal(r, part.c),
        bc=marginal(r, part.b + part.c),
        part=part,
    )


def _as_density(x: HermitianOperator) -> DensityOperator:
    if isinstance(x, DensityOperator):
        return x
    return DensityOperator._trusted(x.layout, x.entries)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------
def _pow_embedded(x: HermitianOperator, p: float, target: SystemLayout, supp_tol: float) -> np.ndarray:
    sp = x.spectrum
    small = mpow(x.entries, p, supp_tol, eig=(sp.eigenvalues, sp.eigenvectors))
    return embed_array(small, x.layout, target)


def _log_embedded(x: HermitianOperator, target: SystemLayout, supp_tol: float) -> np.ndarray:
    sp = x.spectrum
    small = mlog(x.entries, supp_tol, eig=(sp.eigenvalues, sp.eigenvectors))
    return embed_array(small, x.layout, target)


def _palindrome(f0: np.ndarray, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    half = f0 @ f1
    return half @ f2 @ half.conj().T


def _checked_hermitian(m: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(m))))
    asym = float(np.max(np.abs(m - m.conj().T))) / scale
    if asym > ASYMMETRY_WARN:
        warnings.warn(
            f"ordered product deviates from Hermitian by {asym:.2e} (relative)",
            ConditioningWarning,
            stacklevel=3,
        )
    return hermitize(m)


def _factors(
    rho: HermitianOperator,
    ordering: Ordering,
    ops: dict[str, HermitianOperator],
    scale: float,
    supp_tol: float,
    inner_half: bool = False,
) -> list[np.ndarray]:
    """Powers of the ordered operators, embedded in ``rho.layout``.

    The outer two factors get exponent ``sign * scale / 2`` and the inner one
    ``sign * scale`` (or ``sign * scale / 2`` when ``inner_half``).
    """
    out = []
    for k, name in enumerate(ordering.value):
        p = _SIGN[name] * scale * (0.5 if (k < 2 or inner_half) else 1.0)
        out.append(_pow_embedded(ops[name], p, rho.layout, supp_tol))
    return out


def _check_alpha(alpha: float, positive: bool = False) -> None:
    if math.isnan(alpha) or alpha < 0 or (positive and alpha == 0):
        raise OutOfRange(f"alpha={alpha} outside the admissible domain")


def _orthogonality_check(rho: HermitianOperator, k: np.ndarray, value: float, supp_tol: float) -> None:
    """Raise if ``rho`` is orthogonal to ``k k^dagger`` (so the trace vanishes)."""
    if value > supp_tol and math.isfinite(value):
        return
    if not math.isfinite(value):
        raise OrthogonalityViolation(f"trace evaluated to {value}")
    overlap = float(np.real(np.trace(mproj(rho.entries, supp_tol) @ mproj(hermitize(k @ k.conj().T), supp_tol))))
    if overlap <= supp_tol:
        raise OrthogonalityViolation("rho is orthogonal to the ordered operator product")


# ---------------------------------------------------------------------------
# von Neumann quantities
# ---------------------------------------------------------------------------
def cmi(rho: HermitianOperator, part: Partition) -> float:
    """``I(A;B|C) = H(AC) + H(BC) - H(C) - H(ABC)``.

    Examples
    --------
    >>> from rcmi.states import ghz_state
    >>> round(cmi(ghz_state().density(), Partition("A", "B", "C")), 12)
    0.693147180560
    """
    m = marginals(rho, part)
    return entropy(m.ac) + entropy(m.bc) - entropy(m.c) - entropy(m.rho)


def naive_renyi_cmi(rho: HermitianOperator, part: Partition, alpha: float) -> float:
    """``H_a(AC) + H_a(BC) - H_a(C) - H_a(ABC)``; may be negative."""
    _check_alpha(alpha)
    m = marginals(rho, part)
    h = lambda x: renyi_entropy(x, alpha)  # noqa: E731
    return h(m.ac) + h(m.bc) - h(m.c) - h(m.rho)


def _supported(rho: HermitianOperator, x: HermitianOperator, supp_tol: float) -> bool:
    proj = embed_array(mproj(x.entries, supp_tol), x.layout, rho.layout)
    r = rho.entries
    outside = float(np.real(np.trace(r) - np.trace(r @ proj)))
    return outside <= 1e-10 * max(float(np.real(np.trace(r))), 1e-300)


def delta(
    rho: HermitianOperator,
    tau: HermitianOperator,
    theta: HermitianOperator,
    omega: HermitianOperator,
    supp_tol: float = SUPP_TOL,
) -> float:
    """``Tr rho [log rho - log tau - log theta + log omega]``.

    Note the argument order ``(rho, tau_AC, theta_BC, omega_C)``. Returns
    ``math.inf`` when ``supp(rho)`` is not contained in the support of each of
    ``tau``, ``theta`` and ``omega`` (extended by identities).
    """
    for x in (tau, theta, omega):
        if not _supported(rho, x, supp_tol):
            return math.inf
    lay = rho.layout
    h = -_log_embedded(tau, lay, supp_tol) - _log_embedded(theta, lay, supp_tol)
    h = h + _log_embedded(omega, lay, supp_tol)
    return -entropy(rho, supp_tol) + float(np.real(np.trace(rho.entries @ h)))


# ---------------------------------------------------------------------------
# Petz-type family
# ---------------------------------------------------------------------------
def _ops(tau, omega, theta) -> dict[str, HermitianOperator]:
    return {"tau": tau, "omega": omega, "theta": theta}


def _rho_pow(rho: HermitianOperator, p: float, supp_tol: float) -> np.ndarray:
    sp = rho.spectrum
    return mpow(rho.entries, p, supp_tol, eig=(sp.eigenvalues, sp.eigenvectors))


def q_alpha(
    rho: HermitianOperator,
    ordering: Ordering | str,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    alpha: float,
    supp_tol: float = SUPP_TOL,
) -> float:
    """``Tr rho^alpha X1^{s1/2} X2^{s2/2} X3^{s3} X2^{s2/2} X1^{s1/2}``.

    Raises
    ------
    OrthogonalityViolation
        If the trace vanishes because ``rho`` is orthogonal to the product.
    """
    _check_alpha(alpha)
    ordering = Ordering.parse(ordering)
    f = _factors(rho, ordering, _ops(tau, omega, theta), 1.0 - alpha, supp_tol)
    m = _checked_hermitian(_palindrome(*f))
    val = float(np.real(np.trace(_rho_pow(rho, alpha, supp_tol) @ m)))
    if val <= supp_tol:
        g = _factors(rho, ordering, _ops(tau, omega, theta), 1.0 - alpha, supp_tol, inner_half=True)
        _orthogonality_check(rho, g[0] @ g[1] @ g[2], val, supp_tol)
    return val


def delta_alpha(
    rho: HermitianOperator,
    ordering: Ordering | str,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    alpha: float,
    supp_tol: float = SUPP_TOL,
) -> float:
    """``log(Q_alpha) / (alpha - 1)``; the von Neumann ``delta`` near ``alpha = 1``."""
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return delta(rho, tau, theta, omega, supp_tol)
    return math.log(q_alpha(rho, ordering, tau, omega, theta, alpha, supp_tol)) / (alpha - 1.0)


# ---------------------------------------------------------------------------
# Sandwiched family
# ---------------------------------------------------------------------------
def log_q_tilde_alpha(
    rho: HermitianOperator,
    ordering: Ordering | str,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    alpha: float,
    supp_tol: float = SUPP_TOL,
    method: str = "hermitian",
) -> float:
    """Natural log of the sandwiched trace ``Q~_alpha``.

    Parameters
    ----------
    method : {"hermitian", "schatten"}
        ``"hermitian"`` uses the eigenvalues of ``rho^{1/2} M rho^{1/2}``,
        clamping tiny negative round-off at zero. ``"schatten"`` uses the
        singular values of ``rho^{1/2} X1^{p1/2} X2^{p2/2} X3^{p3/2}``.
    """
    _check_alpha(alpha, positive=True)
    ordering = Ordering.parse(ordering)
    ops = _ops(tau, omega, theta)
    scale = (1.0 - alpha) / alpha
    rho_half = _rho_pow(rho, 0.5, supp_tol)
    if method == "schatten":
        f = _factors(rho, ordering, ops, scale, supp_tol, inner_half=True)
        k = rho_half @ f[0] @ f[1] @ f[2]
        s = np.linalg.svd(k, compute_uv=False)
        val = log_trace_power(np.sort(s), 2.0 * alpha, math.sqrt(supp_tol))
    elif method == "hermitian":
        f = _factors(rho, ordering, ops, scale, supp_tol)
        m = _checked_hermitian(_palindrome(*f))
        a = hermitize(rho_half @ m @ rho_half)
        w = np.linalg.eigvalsh(a)
        if w[0] < -PSD_TOL * max(1.0, abs(float(w[-1]))):
            warnings.warn(f"sandwich has eigenvalue {w[0]:.2e} below -psd_tol", ConditioningWarning, stacklevel=2)
        val = log_trace_power(np.clip(w, 0.0, None), alpha, supp_tol)
    else:
        raise OutOfRange(f"unknown method {method!r}")
    if not math.isfinite(val):
        raise OrthogonalityViolation("rho is orthogonal to the ordered operator product")
    return val


def q_tilde_alpha(rho, ordering, tau, omega, theta, alpha, supp_tol: float = SUPP_TOL, method: str = "hermitian") -> float:
    """``Q~_alpha = || rho^{1/2} X1^{p1/2} X2^{p2/2} X3^{p3/2} ||_{2 alpha}^{2 alpha}``."""
    return math.exp(log_q_tilde_alpha(rho, ordering, tau, omega, theta, alpha, supp_tol, method))


def delta_tilde_alpha(
    rho: HermitianOperator,
    ordering: Ordering | str,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    alpha: float,
    supp_tol: float = SUPP_TOL,
    method: str = "hermitian",
) -> float:
    """``log(Q~_alpha) / (alpha - 1)``; the von Neumann ``delta`` near ``alpha = 1``."""
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return delta(rho, tau, theta, omega, supp_tol)
    return log_q_tilde_alpha(rho, ordering, tau, omega, theta, alpha, supp_tol, method) / (alpha - 1.0)


def delta_max(
    rho: HermitianOperator,
    ordering: Ordering | str,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    supp_tol: float = SUPP_TOL,
) -> float:
    """``log || rho^{1/2} M rho^{1/2} ||_inf`` with the sandwiched exponents at infinite order.

    For the ordering ``(tau, omega, theta)`` the middle operator is
    ``tau^{-1/2} omega^{1/2} theta^{-1} omega^{1/2} tau^{-1/2}``.
    """
    ordering = Ordering.parse(ordering)
    f = _factors(rho, ordering, _ops(tau, omega, theta), -1.0, supp_tol)
    m = _checked_hermitian(_palindrome(*f))
    rho_half = _rho_pow(rho, 0.5, supp_tol)
    lam = float(np.linalg.eigvalsh(hermitize(rho_half @ m @ rho_half))[-1])
    if lam <= 0:
        raise OrthogonalityViolation("rho is orthogonal to the ordered operator product")
    return math.log(lam)


def delta_min(
    rho: HermitianOperator,
    ordering: Ordering | str,
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    supp_tol: float = SUPP_TOL,
) -> float:
    """Sandwiched order one half, written as ``-log F(rho, M)``."""
    ordering = Ordering.parse(ordering)
    f = _factors(rho, ordering, _ops(tau, omega, theta), 1.0, supp_tol)
    m = _checked_hermitian(_palindrome(*f))
    s = np.linalg.svd(_rho_pow(rho, 0.5, supp_tol) @ mpow(m, 0.5, supp_tol), compute_uv=False)
    fid = float(np.sum(s)) ** 2
    if fid <= supp_tol:
        raise OrthogonalityViolation("rho is orthogonal to the ordered operator product")
    return -math.log(fid)


def delta_alpha_marginals(
    rho: HermitianOperator, part: Partition, alpha: float, ordering: Ordering | str = Ordering.TAU_OMEGA_THETA
) -> float:
    """``delta_alpha`` evaluated at ``(rho_AC, rho_C, rho_BC)``."""
    m = marginals(rho, part)
    return delta_alpha(m.rho, ordering, m.ac, m.c, m.bc, alpha)


def delta_tilde_alpha_marginals(
    rho: HermitianOperator, part: Partition, alpha: float, ordering: Ordering | str = Ordering.TAU_OMEGA_THETA
) -> float:
    """``delta_tilde_alpha`` evaluated at ``(rho_AC, rho_C, rho_BC)``."""
    m = marginals(rho, part)
    return delta_tilde_alpha(m.rho, ordering, m.ac, m.c, m.bc, alpha)


# ---------------------------------------------------------------------------
# Optimized Renyi CMIs
# ---------------------------------------------------------------------------
def _sibson_operator(m: Marginals, alpha: float, supp_tol: float) -> np.ndarray:
    """``Tr_A{ K^dagger rho^alpha K }`` with ``K = rho_AC^{(1-a)/2} rho_C^{(a-1)/2}``."""
    lay = m.layout
    k = _pow_embedded(m.ac, (1.0 - alpha) / 2.0, lay, supp_tol) @ _pow_embedded(
        m.c, (alpha - 1.0) / 2.0, lay, supp_tol
    )
    inner = k.conj().T @ _rho_pow(m.rho, alpha, supp_tol) @ k
    return hermitize(ptrace_array(hermitize(inner), lay, m.part.a))


def renyi_cmi_sibson(rho: HermitianOperator, part: Partition, alpha: float, supp_tol: float = SUPP_TOL) -> float:
    """Closed form of ``inf_sigma delta_alpha(rho, rho_AC, rho_C, sigma_BC)``.

    ``(alpha/(alpha-1)) log Tr{ G^{1/alpha} }`` with
    ``G = rho_C^{(a-1)/2} Tr_A{rho_AC^{(1-a)/2} rho^a rho_AC^{(1-a)/2}} rho_C^{(a-1)/2}``.
    Returns :func:`cmi` for ``|alpha - 1| < 1e-7``.
    """
    _check_alpha(alpha, positive=True)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return cmi(rho, part)
    m = marginals(rho, part)
    w = np.clip(np.linalg.eigvalsh(_sibson_operator(m, alpha, supp_tol)), 0.0, None)
    return alpha / (alpha - 1.0) * log_trace_power(w, 1.0 / alpha, supp_tol)


def sibson_optimal_sigma(rho: HermitianOperator, part: Partition, alpha: float, supp_tol: float = SUPP_TOL) -> DensityOperator:
    """Minimizer ``sigma*_BC = G^{1/alpha} / Tr G^{1/alpha}`` of the Sibson problem."""
    _check_alpha(alpha, positive=True)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        return marginals(rho, part).bc
    m = marginals(rho, part)
    s = mpow(_sibson_operator(m, alpha, supp_tol), 1.0 / alpha, supp_tol)
    s = hermitize(s)
    return DensityOperator._trusted(m.bc.layout, s / float(np.real(np.trace(s))))


def sandwiched_renyi_cmi(
    rho: HermitianOperator,
    part: Partition,
    alpha: float,
    cfg=None,
    rng: np.random.Generator | None = None,
    supp_tol: float = SUPP_TOL,
):
    """Estimate ``inf_sigma_BC sup_omega_C delta_tilde_alpha(rho, rho_AC, omega_C, sigma_BC)``.

    Uses the alternating min-max search of :func:`rcmi.optimize.minimax_over_states`,
    started at the marginals. The returned :class:`~rcmi.optimize.OptResult`
    carries the best ``sigma_BC`` (``argmin_state``) and ``omega_C``
    (``argmax_state``) as a certificate, and a lower value obtained by
    minimizing against the final ``omega_C``.
    """
    from .optimize import StateSearchConfig, minimax_over_states

    _check_alpha(alpha, positive=True)
    m = marginals(rho, part)
    if abs(alpha - 1.0) < ALPHA_ONE_TOL:
        alpha = 1.0
    lay = m.layout
    rho_half = _rho_pow(m.rho, 0.5, supp_tol)
    e = (1.0 - alpha) / (2.0 * alpha)
    tau_f = _pow_embedded(m.ac, e, lay, supp_tol)
    log_rho_term = None
    if alpha == 1.0:
        # von Neumann case: delta(rho, rho_AC, sigma, omega)
        log_rho_term = -entropy(m.rho) - float(np.real(np.trace(m.rho.entries @ _log_embedded(m.ac, lay, supp_tol))))

    def objective(sigma: HermitianOperator, omega: HermitianOperator) -> float:
        if log_rho_term is not None:
            h = -embed_array(mlog(sigma.entries, supp_tol), sigma.layout, lay) + embed_array(
                mlog(omega.entries, supp_tol), omega.layout, lay
            )
            return log_rho_term + float(np.real(np.trace(m.rho.entries @ h)))
        f1 = embed_array(mpow(omega.entries, -e, supp_tol), omega.layout, lay)
        f2 = embed_array(mpow(sigma.entries, 2.0 * e, supp_tol), sigma.layout, lay)
        a = hermitize(rho_half @ _palindrome(tau_f, f1, f2) @ rho_half)
        w = np.clip(np.linalg.eigvalsh(a), 0.0, None)
        return log_trace_power(w, alpha, supp_tol) / (alpha - 1.0)

    cfg = cfg or StateSearchConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    return minimax_over_states(
        objective,
        inner_max_layout=m.c.layout,
        outer_min_layout=m.bc.layout,
        cfg=cfg,
        rng=rng,
        init_outer=m.bc.entries,
        init_inner=m.c.entries,
    )


# ---------------------------------------------------------------------------
# Max / min CMI, Pinsker, Lie-Trotter
# ---------------------------------------------------------------------------
def recovered_operator(rho: HermitianOperator, part: Partition, supp_tol: float = SUPP_TOL) -> np.ndarray:
    """``rho_AC^{1/2} rho_C^{-1/2} rho_BC rho_C^{-1/2} rho_AC^{1/2}`` on the ``ABC`` layout."""
    m = marginals(rho, part)
    lay = m.layout
    k = _pow_embedded(m.ac, 0.5, lay, supp_tol) @ _pow_embedded(m.c, -0.5, lay, supp_tol)
    return hermitize(k @ embed_array(m.bc.entries, m.bc.layout, lay) @ k.conj().T)


def i_max(rho: HermitianOperator, part: Partition, supp_tol: float = SUPP_TOL) -> float:
    """Max-CMI ``log || rho^{1/2} tau^{-1/2} omega^{1/2} theta^{-1} omega^{1/2} tau^{-1/2} rho^{1/2} ||_inf``."""
    m = marginals(rho, part)
    return delta_max(m.rho, Ordering.TAU_OMEGA_THETA, m.ac, m.c, m.bc, supp_tol)


def i_min(rho: HermitianOperator, part: Partition, supp_tol: float = SUPP_TOL) -> float:
    """Min-CMI ``-log F(rho, rho_AC^{1/2} rho_C^{-1/2} rho_BC rho_C^{-1/2} rho_AC^{1/2})``."""
    m = marginals(rho, part)
    rec = recovered_operator(m.rho, part, supp_tol)
    s = np.linalg.svd(_rho_pow(m.rho, 0.5, supp_tol) @ mpow(rec, 0.5, supp_tol), compute_uv=False)
    fid = float(np.sum(s)) ** 2
    return -math.log(fid) if fid > 0 else math.inf


def pinsker_gap(rho: HermitianOperator, part: Partition, supp_tol: float = SUPP_TOL) -> tuple[float, float]:
    """Return ``(I(A;B|C), || rho - exp{log rho_AC + log rho_BC - log rho_C} ||_1)``."""
    m = marginals(rho, part)
    lay = m.layout
    h = _log_embedded(m.ac, lay, supp_tol) + _log_embedded(m.bc, lay, supp_tol) - _log_embedded(m.c, lay, supp_tol)
    # With log 0 = -inf the exponential lives on supp(rho_AC) and supp(rho_BC):
    # compress onto the intersection of the two supports before exponentiating.
    outside = 2.0 * np.eye(lay.total_dim) - _pow_embedded(m.ac, 0.0, lay, supp_tol) - _pow_embedded(m.bc, 0.0, lay, supp_tol)
    w, v = eigh(outside)
    v = v[:, w < 1e-9]
    e = v @ mexp(hermitize(v.conj().T @ h @ v)) @ v.conj().T if v.shape[1] else np.zeros_like(h)
    diff = hermitize(m.rho.entries - e)
    dist = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    return cmi(m.rho, part), dist


def _common(tau, omega, theta, layout):
    lay = layout or joint_layout(tau.layout, theta.layout, omega.layout)
    return lay


def lie_trotter_operator(
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    alpha: float,
    layout: SystemLayout | None = None,
) -> HermitianOperator:
    """``[tau^{(1-a)/2} omega^{(a-1)/2} theta^{1-a} omega^{(a-1)/2} tau^{(1-a)/2}]^{1/(1-a)}``.

    Operators are extended by identities to ``layout`` (default: the union of
    their layouts, in order of first appearance).

    Raises
    ------
    AlphaEqualsOne
        If ``|alpha - 1| < 1e-6``.
    """
    if abs(alpha - 1.0) < 1e-6:
        raise AlphaEqualsOne("the Lie-Trotter operator needs |alpha - 1| >= 1e-6")
    lay = _common(tau, omega, theta, layout)
    s = 1.0 - alpha
    f0 = embed_array(mpow(tau.entries, s / 2), tau.layout, lay)
    f1 = embed_array(mpow(omega.entries, -s / 2), omega.layout, lay)
    f2 = embed_array(mpow(theta.entries, s), theta.layout, lay)
    out = mpow(hermitize(_palindrome(f0, f1, f2)), 1.0 / s)
    return HermitianOperator._trusted(lay, hermitize(out))


def lie_trotter_limit(
    tau: HermitianOperator,
    omega: HermitianOperator,
    theta: HermitianOperator,
    layout: SystemLayout | None = None,
) -> HermitianOperator:
    """``exp{log tau + log theta - log omega}`` on the common layout."""
    lay = _common(tau, omega, theta, layout)
    h = (
        embed_array(mlog(tau.entries), tau.layout, lay)
        + embed_array(mlog(theta.entries), theta.layout, lay)
        - embed_array(mlog(omega.entries), omega.layout, lay)
    )
    return HermitianOperator._trusted(lay, hermitize(mexp(h)))
