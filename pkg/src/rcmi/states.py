"""Density operators, pure states, channels, samplers and recovery maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadDims,
    BadDistribution,
    BadRank,
    DimMismatch,
    InvariantViolation,
    LabelCollision,
    MarginalMismatch,
    NotPSD,
    UnknownSystem,
)
from .linalg import (
    PSD_TOL,
    SUPP_TOL,
    HermitianOperator,
    SystemLayout,
    eigh,
    embed_array,
    hermitize,
    joint_layout,
    mpow,
    permute_array,
    ptrace_array,
)

__all__ = [
    "TRACE_TOL",
    "DensityOperator",
    "PureState",
    "QuantumChannel",
    "trial_rng",
    "random_density",
    "random_pure",
    "purify",
    "random_channel",
    "apply_channel_local",
    "apply_kraus",
    "PetzRecovery",
    "AppendStateRecovery",
    "ChannelRecovery",
    "petz_recovery",
    "markov_state",
    "classical_state",
    "max_entangled",
    "ghz_state",
    "maximally_mixed",
    "marginal",
    "product_state",
]

TRACE_TOL = 1e-10


class DensityOperator(HermitianOperator):
    """Positive semi-definite, unit-trace :class:`HermitianOperator`."""

    def __post_init__(self) -> None:
        super().__post_init__()
        w = self.spectrum.eigenvalues
        if w.size and w[0] < -PSD_TOL:
            raise NotPSD(f"density operator has eigenvalue {w[0]:.3e} < -psd_tol")
        tr = self.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"density operator has trace {tr!r}")

    @classmethod
    def from_operator(cls, op: HermitianOperator) -> "DensityOperator":
        return cls(op.layout, op.entries)


def _density(layout: SystemLayout, m: np.ndarray) -> DensityOperator:
    """Trusted constructor that normalizes the trace."""
    m = hermitize(m)
    return DensityOperator._trusted(layout, m / np.real(np.trace(m)))


def marginal(rho: HermitianOperator, keep: Iterable[str]) -> DensityOperator:
    """Reduced state on ``keep`` (in the layout's order)."""
    keep = set(keep)
    for lab in keep:
        rho.layout.index(lab)
    remove = [lab for lab in rho.layout.labels if lab not in keep]
    m = hermitize(ptrace_array(rho.entries, rho.layout, remove))
    return DensityOperator._trusted(rho.layout.without(remove), m)


def maximally_mixed(layout: SystemLayout) -> DensityOperator:
    d = layout.total_dim
    return DensityOperator._trusted(layout, np.eye(d, dtype=complex) / d)


def product_state(ops: Sequence[HermitianOperator]) -> DensityOperator:
    """Tensor product of density operators, as a :class:`DensityOperator`."""
    layout = ops[0].layout
    m = ops[0].entries
    for op in ops[1:]:
        layout = layout.concat(op.layout)
        m = np.kron(m, op.entries)
    return DensityOperator._trusted(layout, m)


@dataclass(frozen=True)
class PureState:
    """Unit vector on a layout."""

    layout: SystemLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if v.size != self.layout.total_dim:
            raise DimMismatch(f"{v.size} amplitudes for layout of dim {self.layout.total_dim}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise InvariantViolation(f"pure state has norm {np.linalg.norm(v)!r}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    def density(self) -> DensityOperator:
        v = self.amplitudes
        return DensityOperator._trusted(self.layout, np.outer(v, v.conj()))


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map in Kraus form, ``N(X) = sum_k K_k X K_k^dagger``.

    Attributes
    ----------
    kraus : ndarray, shape (k, d_out, d_in)
    in_label, out_label : str or None
        Optional labels of the input and output systems.
    """

    kraus: np.ndarray = field(repr=False)
    in_label: str | None = None
    out_label: str | None = None

    def __post_init__(self) -> None:
        k = np.array(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3:
            raise BadDims("Kraus operators must form an array of shape (k, d_out, d_in)")
        comp = np.einsum("kai,kaj->ij", k.conj(), k)
        err = float(np.max(np.abs(comp - np.eye(k.shape[2]))))
        if err > 1e-10:
            raise InvariantViolation(f"Kraus completeness residual {err:.3e}")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def d_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def d_out(self) -> int:
        return self.kraus.shape[1]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Apply the channel to a ``d_in x d_in`` matrix."""
        return np.einsum("kai,ij,kbj->ab", self.kraus, x, self.kraus.conj())


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------
def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for the substream ``(seed, *keys)``.

    Substreams with different keys are statistically independent, and each is
    reproducible on its own, so trials can be evaluated in any order.
    """
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(k) for k in keys]])
    return np.random.Generator(np.random.Philox(ss))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_density(
    layout: SystemLayout,
    rng: np.random.Generator,
    rank: int | None = None,
    xi: float = 0.0,
) -> DensityOperator:
    """Sample a state from the induced (Ginibre) measure.

    Parameters
    ----------
    layout : SystemLayout
    rng : numpy.random.Generator
    rank : int, optional
        Rank of the Ginibre factor, default full rank.
    xi : float, optional
        Mixing weight with the maximally mixed state,
        ``(1 - xi) rho + xi I / d``. Use a positive value when strictly
        positive states are required.
    """
    d = layout.total_dim
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise BadRank(f"rank {rank} outside [1, {d}]")
    g = _ginibre(rng, d, rank)
    m = g @ g.conj().T
    m = m / np.real(np.trace(m))
    if xi:
        m = (1.0 - xi) * m + xi * np.eye(d) / d
    return _density(layout, m)


def random_pure(layout: SystemLayout, rng: np.random.Generator) -> PureState:
    v = _ginibre(rng, layout.total_dim, 1)[:, 0]
    return PureState(layout, v / np.linalg.norm(v))


def purify(rho: HermitianOperator, ancilla: str = "R", supp_tol: float = SUPP_TOL) -> PureState:
    """Purification ``sum_i sqrt(lambda_i) |v_i>|i>`` on ``rho.layout + ancilla``.

    The ancilla dimension equals the numerical rank of ``rho``.
    """
    if ancilla in rho.layout:
        raise LabelCollision(f"ancilla label {ancilla!r} already in layout")
    w, v = eigh(rho.entries)
    keep = w > supp_tol * max(1.0, float(w[-1]))
    lam, vec = w[keep], v[:, keep]
    r = int(keep.sum())
    psi = (vec * np.sqrt(lam)).reshape(-1)  # index (system, ancilla), ancilla fastest
    psi = psi / np.linalg.norm(psi)
    return PureState(rho.layout.concat(SystemLayout([(ancilla, r)])), psi)


def random_channel(
    d_in: int,
    d_out: int,
    d_env: int,
    rng: np.random.Generator,
    in_label: str | None = None,
    out_label: str | None = None,
) -> QuantumChannel:
    """Random channel from a Haar-like isometry ``d_in -> d_out * d_env``.

    The isometry comes from the QR decomposition of a Ginibre matrix. The
    environment index is traced out, giving ``d_env`` Kraus operators.
    """
    if min(d_in, d_out, d_env) < 1 or d_out * d_env < d_in:
        raise BadDims(f"need d_out*d_env >= d_in, got {d_out}*{d_env} < {d_in}")
    q, r = np.linalg.qr(_ginibre(rng, d_out * d_env, d_in))
    q = q * (np.diag(r) / np.abs(np.diag(r)))  # fix phases so the law is Haar
    kraus = q.reshape(d_out, d_env, d_in).transpose(1, 0, 2)
    return QuantumChannel(np.ascontiguousarray(kraus), in_label, out_label)


def apply_kraus(
    kraus: np.ndarray,
    x: np.ndarray,
    layout: SystemLayout,
    inputs: Sequence[str],
    outputs: SystemLayout,
) -> tuple[np.ndarray, SystemLayout]:
    """Apply Kraus operators to the factors ``inputs`` of ``x``.

    The input factors are replaced by ``outputs``, placed first, followed by
    the untouched systems in their original order.
    """
    for lab in inputs:
        layout.index(lab)
    rest = [lab for lab in layout.labels if lab not in inputs]
    perm = [layout.index(lab) for lab in list(inputs) + rest]
    xp = permute_array(x, layout.dims, perm)
    din = math.prod(layout.dim(lab) for lab in inputs)
    if kraus.shape[2] != din:
        raise DimMismatch(f"channel input dim {kraus.shape[2]} vs system dim {din}")
    dr = math.prod(layout.dim(lab) for lab in rest)
    dout = kraus.shape[1]
    if dout != outputs.total_dim:
        raise DimMismatch(f"channel output dim {dout} vs declared {outputs.total_dim}")
    x4 = xp.reshape(din, dr, din, dr)
    y4 = np.einsum("kai,irjs,kbj->arbs", kraus, x4, kraus.conj(), optimize=True)
    new_layout = outputs.concat(layout.sub(rest))
    return y4.reshape(dout * dr, dout * dr), new_layout


def apply_channel_local(ch: QuantumChannel, target: str, rho: HermitianOperator) -> HermitianOperator:
    """Apply ``ch`` to subsystem ``target``, keeping the layout order.

    The output layout is the input layout with ``target``'s dimension
    replaced by ``ch.d_out``. The result has the same type as ``rho``.

    Raises
    ------
    UnknownSystem, DimMismatch
    """
    lay = rho.layout
    if target not in lay:
        raise UnknownSystem(f"system {target!r} not in layout {lay.labels}")
    if lay.dim(target) != ch.d_in:
        raise DimMismatch(f"channel input dim {ch.d_in} vs system dim {lay.dim(target)}")
    out_sys = SystemLayout([(target, ch.d_out)])
    y, ylay = apply_kraus(ch.kraus, rho.entries, lay, [target], out_sys)
    final = lay.with_dim(target, ch.d_out)
    perm = [ylay.index(lab) for lab in final.labels]
    y = hermitize(permute_array(y, ylay.dims, perm))
    return type(rho)._trusted(final, y)


# ---------------------------------------------------------------------------
# Recovery maps (C -> AC)
# ---------------------------------------------------------------------------
def _target_for(x: HermitianOperator, extra: SystemLayout, target: SystemLayout | None) -> SystemLayout:
    if target is None:
        return joint_layout(extra, x.layout)
    return target


@dataclass(frozen=True)
class PetzRecovery:
    """Petz transpose map ``X -> rho_AC^{1/2} rho_C^{-1/2} X rho_C^{-1/2} rho_AC^{1/2}``.

    Calling the map on an operator ``X`` on systems ``B C`` returns the
    operator on ``A B C`` obtained by acting on the ``C`` factor. When
    ``rho_C`` is rank deficient the map is only trace non-increasing; the
    output is then renormalized and :meth:`apply` reports it.
    """

    rho_ac: HermitianOperator
    rho_c: HermitianOperator
    kernel: np.ndarray = field(repr=False)

    @property
    def a_layout(self) -> SystemLayout:
        return self.rho_ac.layout.without(self.rho_c.layout.labels)

    def apply(
        self, x: HermitianOperator, target: SystemLayout | None = None
    ) -> tuple[DensityOperator, bool]:
        target = _target_for(x, self.rho_ac.layout, target)
        k = embed_array(self.kernel, self.rho_ac.layout, target)
        xf = embed_array(x.entries, x.layout, target)
        out = hermitize(k @ xf @ k.conj().T)
        tr_in = x.trace()
        tr_out = float(np.real(np.trace(out)))
        renorm = abs(tr_out - tr_in) > 1e-10
        return _density(target, out), renorm

    def __call__(self, x: HermitianOperator, target: SystemLayout | None = None) -> DensityOperator:
        return self.apply(x, target)[0]


def petz_recovery(rho_ac: HermitianOperator, rho_c: HermitianOperator, tol: float = 1e-8) -> PetzRecovery:
    """Build the Petz recovery map ``C -> AC`` for the pair ``(rho_AC, rho_C)``.

    Raises
    ------
    MarginalMismatch
        If ``rho_C`` differs from ``Tr_A rho_AC`` by more than ``tol``.
    """
    a_labels = [lab for lab in rho_ac.layout.labels if lab not in rho_c.layout]
    for lab in rho_c.layout.labels:
        if lab not in rho_ac.layout:
            raise MarginalMismatch(f"system {lab!r} of rho_C missing from rho_AC")
    red = ptrace_array(rho_ac.entries, rho_ac.layout, a_labels)
    red_layout = rho_ac.layout.without(a_labels)
    perm = [red_layout.index(lab) for lab in rho_c.layout.labels]
    red = permute_array(red, red_layout.dims, perm)
    err = float(np.max(np.abs(red - rho_c.entries)))
    if err > tol:
        raise MarginalMismatch(f"Tr_A rho_AC differs from rho_C by {err:.3e}")
    c_full = embed_array(mpow(rho_c.entries, -0.5), rho_c.layout, rho_ac.layout)
    kernel = mpow(rho_ac.entries, 0.5) @ c_full
    return PetzRecovery(rho_ac, rho_c, kernel)


@dataclass(frozen=True)
class AppendStateRecovery:
    """Recovery ``X_C -> rho_A (x) X_C`` that ignores the conditioning system."""

    rho_a: HermitianOperator

    def __call__(self, x: HermitianOperator, target: SystemLayout | None = None) -> DensityOperator:
        target = _target_for(x, self.rho_a.layout, target)
        m = embed_array(self.rho_a.entries, self.rho_a.layout, target) @ embed_array(
            x.entries, x.layout, target
        )
        return _density(target, m)


@dataclass(frozen=True)
class ChannelRecovery:
    """Recovery given by an arbitrary channel from the C systems to A and C.

    ``kraus`` has shape ``(k, d_A * d_C, d_C)`` with output factors ordered
    as ``out_layout`` (the A systems followed by the C systems).
    """

    kraus: np.ndarray = field(repr=False)
    c_labels: tuple[str, ...]
    out_layout: SystemLayout

    def __call__(self, x: HermitianOperator, target: SystemLayout | None = None) -> DensityOperator:
        y, ylay = apply_kraus(self.kraus, x.entries, x.layout, self.c_labels, self.out_layout)
        target = ylay if target is None else target
        perm = [ylay.index(lab) for lab in target.labels]
        return _density(target, permute_array(y, ylay.dims, perm))


# ---------------------------------------------------------------------------
# Structured states
# ---------------------------------------------------------------------------
def _as_matrix(x) -> np.ndarray:
    return np.asarray(x.entries if isinstance(x, HermitianOperator) else x, dtype=complex)


def markov_state(
    q: Sequence[float],
    blocks: Sequence[tuple],
    layout: SystemLayout,
    a: Sequence[str] = ("A",),
    b: Sequence[str] = ("B",),
    c: Sequence[str] = ("C",),
) -> DensityOperator:
    """Quantum Markov state ``sum_j q_j sigma_{A L_j} (x) sigma_{R_j B}``.

    The conditioning space decomposes as the direct sum over ``j`` of
    ``L_j (x) R_j``; block ``j`` occupies consecutive basis vectors of the C
    space starting after the previous blocks.

    Parameters
    ----------
    q : sequence of float
        Block weights, non-negative and summing to one.
    blocks : sequence of (sigma_AL, sigma_RB)
        ``sigma_AL`` is a state on ``A (x) L_j`` (A factor first) and
        ``sigma_RB`` a state on ``R_j (x) B`` (R factor first).
    layout : SystemLayout
        Target layout; ``a``, ``b`` and ``c`` name its systems.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or len(q) != len(blocks) or np.any(q < 0) or abs(q.sum() - 1) > 1e-12:
        raise BadDistribution("q must be a probability vector with one entry per block")
    da = math.prod(layout.dim(x) for x in a)
    db = math.prod(layout.dim(x) for x in b)
    dc = math.prod(layout.dim(x) for x in c)
    if set(a) | set(b) | set(c) != set(layout.labels):
        raise DimMismatch("a, b, c must cover the layout")
    acb = np.zeros((da * dc * db, da * dc * db), dtype=complex)
    offset = 0
    for qj, (s_al, s_rb) in zip(q, blocks):
        s_al, s_rb = _as_matrix(s_al), _as_matrix(s_rb)
        if s_al.shape[0] % da or s_rb.shape[0] % db:
            raise DimMismatch("block dimension not divisible by the A or B dimension")
        dl, dr = s_al.shape[0] // da, s_rb.shape[0] // db
        blk = np.kron(s_al, s_rb)  # factors A, L, R, B
        iso = np.zeros((dc, dl * dr))
        if offset + dl * dr > dc:
            raise DimMismatch("blocks exceed the dimension of C")
        iso[offset : offset + dl * dr, :] = np.eye(dl * dr)
        v = np.kron(np.kron(np.eye(da), iso), np.eye(db))
        acb += qj * v @ blk @ v.T
        offset += dl * dr
    if offset != dc:
        raise DimMismatch(f"blocks span {offset} dimensions of C, expected {dc}")
    order = list(a) + list(c) + list(b)
    src = layout.reordered(order)
    perm = [src.index(lab) for lab in layout.labels]
    return _density(layout, permute_array(acb, src.dims, perm))


def classical_state(pmf: np.ndarray, layout: SystemLayout) -> DensityOperator:
    """Diagonal state whose diagonal is ``pmf`` (indexed in layout order)."""
    p = np.asarray(pmf, dtype=float).reshape(-1)
    if p.size != layout.total_dim:
        raise DimMismatch(f"pmf has {p.size} entries for layout of dim {layout.total_dim}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
        raise BadDistribution("pmf must be non-negative and sum to one")
    return DensityOperator._trusted(layout, np.diag(p).astype(complex))


def max_entangled(dim: int, labels: tuple[str, str] = ("A", "B")) -> PureState:
    """``sum_j |j>|j> / sqrt(dim)``."""
    v = np.eye(dim, dtype=complex).reshape(-1) / math.sqrt(dim)
    return PureState(SystemLayout([(labels[0], dim), (labels[1], dim)]), v)


def ghz_state(labels: Sequence[str] = ("A", "B", "C"), dim: int = 2) -> PureState:
    """``sum_j |j...j> / sqrt(dim)`` on ``len(labels)`` systems."""
    n = len(labels)
    v = np.zeros(dim**n, dtype=complex)
    for j in range(dim):
        v[sum(j * dim**k for k in range(n))] = 1.0
    return PureState(SystemLayout([(lab, dim) for lab in labels]), v / math.sqrt(dim))
