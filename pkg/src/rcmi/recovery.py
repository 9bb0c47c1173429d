"""Recoverability bounds on the conditional mutual information.

If a recovery map ``R_{C -> AC}`` rebuilds ``rho_ABC`` from ``rho_BC`` up to
trace-norm error ``eps``, then both ``I(A;B|C)_rho`` and ``I(A;B|C)_omega``
with ``omega = R(rho_BC)`` are at most ``4 eps log d_B + 2 h2(eps)``.
:func:`fidelity_chain` evaluates the chain linking the min-CMI of the Petz
recovered state to the trace distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .cmi import cmi, i_min, marginals, pinsker_gap
from .errors import OutOfRange
from .linalg import HermitianOperator, SystemLayout, fidelity, trace_distance
from .partition import Partition
from .states import DensityOperator, PetzRecovery, petz_recovery

__all__ = ["h2", "RecoveryReport", "small_cmi_bound", "FidelityChain", "fidelity_chain", "SLACK"]

#: Slack allowed in every asserted inequality.
SLACK = 1e-9

RecoveryMap = Callable[..., DensityOperator]


def h2(x: float) -> float:
    """Binary entropy ``-x log x - (1 - x) log(1 - x)`` in nats.

    Raises
    ------
    OutOfRange
        If ``x`` lies outside ``[0, 1]``.

    Examples
    --------
    >>> round(h2(0.5), 12) == round(math.log(2), 12)
    True
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise OutOfRange(f"h2 needs an argument in [0, 1], got {x}")
    return -sum(p * math.log(p) for p in (x, 1.0 - x) if p > 0)


@dataclass(frozen=True)
class RecoveryReport:
    """Outcome of :func:`small_cmi_bound`.

    Attributes
    ----------
    epsilon : float
        ``||rho - R(rho_BC)||_1`` (raw, may exceed one).
    cmi_rho, cmi_omega : float
        ``I(A;B|C)`` of ``rho`` and of the recovered state ``omega``.
    af_bound : float
        ``4 eps log d_B + 2 h2(min(eps, 1))``.
    fidelity_term : float
        ``-log F(rho, omega)``.
    pinsker_term : float
        ``||rho - exp{log rho_AC + log rho_BC - log rho_C}||_1^2 / 4``, a lower
        bound on ``cmi_rho``.
    renormalized : bool
        The recovery map lost trace (rank-deficient ``rho_C``) and its output
        was renormalized.
    """

    epsilon: float
    cmi_rho: float
    cmi_omega: float
    af_bound: float
    fidelity_term: float
    pinsker_term: float
    renormalized: bool = False

    @property
    def holds_rho(self) -> bool:
        return self.cmi_rho <= self.af_bound + SLACK

    @property
    def holds_omega(self) -> bool:
        return self.cmi_omega <= self.af_bound + SLACK

    @property
    def holds_pinsker(self) -> bool:
        return self.cmi_rho >= self.pinsker_term - SLACK

    @property
    def holds(self) -> bool:
        return self.holds_rho and self.holds_omega and self.holds_pinsker


def _abc(rho: HermitianOperator, part: Partition) -> tuple[DensityOperator, Partition, SystemLayout]:
    m = marginals(rho, part)
    return m.rho, Partition(part.a, part.b, part.c), m.layout


def small_cmi_bound(
    rho: HermitianOperator,
    part: Partition,
    recovery: RecoveryMap | None = None,
) -> RecoveryReport:
    """Evaluate both sides of the small-CMI recoverability bound.

    Parameters
    ----------
    rho : HermitianOperator
        State on (at least) the systems of ``part``; any ``D`` group is traced out.
    part : Partition
    recovery : callable, optional
        Map ``R(x, target)`` from operators on ``B C`` to states on the ``ABC``
        layout, for instance :class:`~rcmi.states.ChannelRecovery`. Defaults to
        the Petz map of ``(rho_AC, rho_C)``.

    Returns
    -------
    RecoveryReport
        The inequalities are reported through ``holds_*`` flags, never raised.
    """
    rho3, part3, lay = _abc(rho, part)
    m = marginals(rho3, part3)
    renorm = False
    if recovery is None:
        recovery = petz_recovery(m.ac, m.c)
    if isinstance(recovery, PetzRecovery):
        omega, renorm = recovery.apply(m.bc, lay)
    else:
        omega = recovery(m.bc, lay)
    eps = trace_distance(rho3, omega)
    d_b = math.prod(lay.dim(x) for x in part3.b)
    bound = 4.0 * eps * math.log(d_b) + 2.0 * h2(min(eps, 1.0))
    fid = fidelity(rho3, omega)
    c_rho, dist = pinsker_gap(rho3, part3)
    return RecoveryReport(
        epsilon=eps,
        cmi_rho=c_rho,
        cmi_omega=cmi(omega, part3),
        af_bound=bound,
        fidelity_term=-math.log(fid) if fid > 0 else math.inf,
        pinsker_term=0.25 * dist**2,
        renormalized=renorm,
    )


@dataclass(frozen=True)
class FidelityChain:
    """``I_min >= -log(1 - eps^2) >= eps^2`` with ``eps = ||rho - omega||_1 / 2``.

    ``cmi`` is reported next to ``i_min``; ``cmi >= i_min`` is expected but
    unproven, so it is exposed as ``conjectural_holds`` and never asserted.
    """

    i_min: float
    log_term: float
    quarter_td_sq: float
    cmi: float

    def __iter__(self):
        yield self.i_min
        yield self.quarter_td_sq
        yield self.cmi

    @property
    def holds(self) -> bool:
        return self.i_min >= self.log_term - SLACK and self.log_term >= self.quarter_td_sq - SLACK

    @property
    def conjectural_holds(self) -> bool:
        return self.cmi >= self.i_min - SLACK


def fidelity_chain(rho: HermitianOperator, part: Partition) -> FidelityChain:
    """Min-CMI of the Petz recovered state against the trace distance.

    With ``omega = rho_AC^{1/2} rho_C^{-1/2} rho_BC rho_C^{-1/2} rho_AC^{1/2}``
    and ``t = ||rho - omega||_1 / 2``, the Fuchs-van de Graaf inequality gives
    ``-log F(rho, omega) >= -log(1 - t^2) >= t^2 = ||rho - omega||_1^2 / 4``.
    """
    rho3, part3, lay = _abc(rho, part)
    m = marginals(rho3, part3)
    omega, _ = petz_recovery(m.ac, m.c).apply(m.bc, lay)
    t = min(0.5 * trace_distance(rho3, omega), 1.0)
    log_term = -math.log1p(-(t * t)) if t < 1.0 else math.inf
    return FidelityChain(
        i_min=i_min(rho3, part3),
        log_term=log_term,
        quarter_td_sq=t * t,
        cmi=cmi(rho3, part3),
    )
