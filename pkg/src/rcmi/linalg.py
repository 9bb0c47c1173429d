"""Hermitian spectral calculus and tensor-product bookkeeping.

Every operator in the package lives on a :class:`SystemLayout`, an ordered
list of labelled subsystems. The full-space basis index is the mixed-radix
number whose most significant digit belongs to the first listed system, so
``SystemLayout([("A", 2), ("B", 3)])`` is the usual ``numpy.kron`` ordering.

Functions of Hermitian operators follow the generalized-inverse convention:
``f(A) = sum_i f(a_i) |i><i|`` where the sum only runs over the support of
``A``. In particular ``A^0`` is the projector onto the support and negative
powers are pseudo-inverses. An eigenvalue is considered zero when

    lambda <= supp_tol * max(1, lambda_max)

with ``supp_tol = 1e-12`` by default. The same cutoff is applied to positive
powers so that numerically-null directions are treated consistently
everywhere.

Two layers are exposed. The typed layer (:class:`HermitianOperator`,
:func:`apply_spectral_fn`, :func:`embed`, ...) validates its inputs and is
what user code should call. The array layer (:func:`mpow`, :func:`mlog`,
:func:`embed_array`, ...) works on bare ``numpy`` matrices and is used in the
inner loops of the entropic quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimMismatch,
    LabelCollision,
    LayoutMismatch,
    NonHermitian,
    NotPSD,
    UnknownSystem,
)

__all__ = [
    "SUPP_TOL",
    "HERM_TOL",
    "PSD_TOL",
    "EIG_TOL",
    "SystemLayout",
    "HermitianOperator",
    "Spectrum",
    "SpectralFunction",
    "eig_hermitian",
    "apply_spectral_fn",
    "tensor",
    "embed",
    "partial_trace",
    "permute",
    "schatten_alpha",
    "trace_distance",
    "fidelity",
    "hermitize",
    "eigh",
    "mpow",
    "mlog",
    "mexp",
    "mproj",
    "embed_array",
    "ptrace_array",
    "permute_array",
    "joint_layout",
]

SUPP_TOL = 1e-12
HERM_TOL = 1e-10
PSD_TOL = 1e-10
EIG_TOL = 1e-10


# ---------------------------------------------------------------------------
# Layouts
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SystemLayout:
    """Ordered list of labelled subsystems.

    Parameters
    ----------
    systems : sequence of (str, int)
        ``(label, dim)`` pairs. Labels must be unique and dims positive.

    Examples
    --------
    >>> lay = SystemLayout([("A", 2), ("B", 3)])
    >>> lay.total_dim
    6
    >>> lay.sub(["B"]).dims
    (3,)
    """

    systems: tuple[tuple[str, int], ...]

    def __init__(self, systems: Iterable[tuple[str, int]]):
        items = tuple((str(lab), int(d)) for lab, d in systems)
        labels = [lab for lab, _ in items]
        if len(set(labels)) != len(labels):
            raise LabelCollision(f"duplicate subsystem labels in {labels}")
        for lab, d in items:
            if d < 1:
                raise DimMismatch(f"subsystem {lab!r} has non-positive dimension {d}")
        object.__setattr__(self, "systems", items)

    @classmethod
    def from_dims(cls, labels: Sequence[str] | str, dims: Sequence[int]) -> "SystemLayout":
        """Build a layout from parallel label and dimension sequences.

        A plain string is split into single-character labels, so
        ``SystemLayout.from_dims("ABC", (2, 2, 2))`` works.
        """
        labels = list(labels)
        if len(labels) != len(dims):
            raise DimMismatch("labels and dims have different lengths")
        return cls(zip(labels, dims))

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.systems)

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.systems)

    @cached_property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def __len__(self) -> int:
        return len(self.systems)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownSystem(f"system {label!r} not in layout {self.labels}") from None

    def dim(self, label: str) -> int:
        return self.systems[self.index(label)][1]

    def sub(self, labels: Iterable[str]) -> "SystemLayout":
        """Sub-layout on ``labels``, kept in this layout's order."""
        wanted = set(labels)
        for lab in wanted:
            self.index(lab)
        return SystemLayout([s for s in self.systems if s[0] in wanted])

    def without(self, labels: Iterable[str]) -> "SystemLayout":
        drop = set(labels)
        for lab in drop:
            self.index(lab)
        return SystemLayout([s for s in self.systems if s[0] not in drop])

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        return SystemLayout(self.systems + other.systems)

    def reordered(self, labels: Sequence[str]) -> "SystemLayout":
        if sorted(labels) != sorted(self.labels):
            raise UnknownSystem(f"{list(labels)} is not a permutation of {self.labels}")
        return SystemLayout([(lab, self.dim(lab)) for lab in labels])

    def with_dim(self, label: str, dim: int) -> "SystemLayout":
        i = self.index(label)
        items = list(self.systems)
        items[i] = (label, int(dim))
        return SystemLayout(items)

    def __str__(self) -> str:
        return "⊗".join(f"{lab}[{d}]" for lab, d in self.systems)


def joint_layout(*layouts: SystemLayout) -> SystemLayout:
    """Union of layouts, labels ordered by first appearance."""
    seen: dict[str, int] = {}
    for lay in layouts:
        for lab, d in lay.systems:
            if lab in seen and seen[lab] != d:
                raise DimMismatch(f"system {lab!r} has dims {seen[lab]} and {d}")
            seen.setdefault(lab, d)
    return SystemLayout(seen.items())


# ---------------------------------------------------------------------------
# Array-level helpers
# ---------------------------------------------------------------------------
def hermitize(m: np.ndarray) -> np.ndarray:
    """Return ``(m + m^dagger) / 2``."""
    return 0.5 * (m + m.conj().T)


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a matrix assumed Hermitian (after hermitizing)."""
    try:
        w, v = np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise ConvergenceFailure("eigensolver returned non-finite eigenvalues")
    return w, v


def _cutoff(w: np.ndarray, supp_tol: float) -> float:
    return supp_tol * max(1.0, float(w[-1]) if w.size else 0.0)


def _check_psd(w: np.ndarray, psd_tol: float, what: str) -> None:
    if w.size and w[0] < -psd_tol * max(1.0, abs(float(w[-1]))):
        raise NotPSD(f"{what} requires a positive semi-definite operator; min eigenvalue {w[0]:.3e}")


def _from_eig(v: np.ndarray, vals: np.ndarray) -> np.ndarray:
    return (v * vals) @ v.conj().T


def mpow(
    m: np.ndarray,
    p: float,
    supp_tol: float = SUPP_TOL,
    psd_tol: float = PSD_TOL,
    eig: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Generalized matrix power of a positive semi-definite matrix.

    Eigenvalues at or below the support cutoff map to zero, for every ``p``
    (so ``p = 0`` gives the support projector and ``p < 0`` a pseudo-inverse
    power).
    """
    w, v = eig if eig is not None else eigh(m)
    _check_psd(w, psd_tol, "fractional power")
    keep = w > _cutoff(w, supp_tol)
    vals = np.zeros_like(w)
    vals[keep] = w[keep] ** p if p != 0 else 1.0
    return _from_eig(v, vals)


def mlog(
    m: np.ndarray,
    supp_tol: float = SUPP_TOL,
    psd_tol: float = PSD_TOL,
    eig: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Natural logarithm restricted to the support (zero on the kernel)."""
    w, v = eig if eig is not None else eigh(m)
    _check_psd(w, psd_tol, "logarithm")
    keep = w > _cutoff(w, supp_tol)
    vals = np.zeros_like(w)
    vals[keep] = np.log(w[keep])
    return _from_eig(v, vals)


def mexp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential of a Hermitian matrix."""
    w, v = eigh(m)
    return _from_eig(v, np.exp(w))


def mproj(m: np.ndarray, supp_tol: float = SUPP_TOL) -> np.ndarray:
    """Projector onto the support of a positive semi-definite matrix."""
    w, v = eigh(m)
    keep = w > _cutoff(w, supp_tol)
    return v[:, keep] @ v[:, keep].conj().T


def permute_array(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square matrix.

    The result acts on factors ``dims[perm[0]], dims[perm[1]], ...``.
    """
    n = len(dims)
    if list(perm) == list(range(n)):
        return m
    d = math.prod(dims)
    t = m.reshape(tuple(dims) * 2)
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(d, d)


@lru_cache(maxsize=512)
def _embed_plan(sub: SystemLayout, target: SystemLayout) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index map full -> sub and the identity mask on the complementary systems."""
    _check_sublayout(sub, target)
    digits = np.indices(target.dims).reshape(len(target), -1)
    sub_idx = np.zeros(target.total_dim, dtype=np.intp)
    for lab, d in sub.systems:
        sub_idx = sub_idx * d + digits[target.index(lab)]
    rest_idx = np.zeros(target.total_dim, dtype=np.intp)
    for lab, d in target.systems:
        if lab not in sub:
            rest_idx = rest_idx * d + digits[target.index(lab)]
    mask = rest_idx[:, None] == rest_idx[None, :]
    return sub_idx[:, None], sub_idx[None, :], mask


def embed_array(m: np.ndarray, sub: SystemLayout, target: SystemLayout) -> np.ndarray:
    """Array version of :func:`embed`."""
    if sub.labels == target.labels and sub == target:
        return m
    rows, cols, mask = _embed_plan(sub, target)
    return m[rows, cols] * mask


def ptrace_array(m: np.ndarray, layout: SystemLayout, remove: Iterable[str]) -> np.ndarray:
    """Array version of :func:`partial_trace`; returns the kept block."""
    remove = set(remove)
    for lab in remove:
        layout.index(lab)
    if not remove:
        return m
    keep = [lab for lab in layout.labels if lab not in remove]
    gone = [lab for lab in layout.labels if lab in remove]
    perm = [layout.index(lab) for lab in keep + gone]
    mp = permute_array(m, layout.dims, perm)
    dk = math.prod(layout.dim(lab) for lab in keep)
    dr = math.prod(layout.dim(lab) for lab in gone)
    return np.einsum("iaja->ij", mp.reshape(dk, dr, dk, dr))


def _check_sublayout(sub: SystemLayout, target: SystemLayout) -> None:
    for lab, d in sub.systems:
        if lab not in target:
            raise UnknownSystem(f"system {lab!r} not in target layout {target.labels}")
        if target.dim(lab) != d:
            raise DimMismatch(f"system {lab!r}: dim {d} vs {target.dim(lab)} in target")


# ---------------------------------------------------------------------------
# Typed layer
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition ``H = U diag(eigenvalues) U^dagger``.

    Attributes
    ----------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the eigenvectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return _from_eig(self.eigenvectors, self.eigenvalues)


@dataclass(frozen=True)
class HermitianOperator:
    """Dense Hermitian matrix attached to a :class:`SystemLayout`.

    The stored matrix is re-Hermitized on construction, after checking that
    ``max |X - X^dagger| <= herm_tol * max(1, max |X|)``.
    """

    layout: SystemLayout
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=complex)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise DimMismatch(f"matrix shape {m.shape} does not match layout dim {d}")
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if asym > HERM_TOL * scale:
            raise NonHermitian(f"Hermiticity residual {asym:.3e} exceeds {HERM_TOL:.0e}")
        m = hermitize(m)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def _trusted(cls, layout: SystemLayout, entries: np.ndarray):
        """Construct without validation from an already-Hermitian matrix."""
        obj = object.__new__(cls)
        m = np.asarray(entries, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(obj, "layout", layout)
        object.__setattr__(obj, "entries", m)
        return obj

    @property
    def matrix(self) -> np.ndarray:
        return self.entries

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    @cached_property
    def spectrum(self) -> Spectrum:
        w, v = eigh(self.entries)
        return Spectrum(w, v)

    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _same_layout(self, other)
        return HermitianOperator._trusted(self.layout, self.entries + other.entries)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _same_layout(self, other)
        return HermitianOperator._trusted(self.layout, self.entries - other.entries)

    def scaled(self, c: float) -> "HermitianOperator":
        return HermitianOperator._trusted(self.layout, float(c) * self.entries)


def _same_layout(x: HermitianOperator, y: HermitianOperator) -> None:
    if x.layout != y.layout:
        raise LayoutMismatch(f"layouts differ: {x.layout} vs {y.layout}")


@dataclass(frozen=True)
class SpectralFunction:
    """A scalar function lifted to Hermitian operators.

    ``kind`` is one of ``"power"``, ``"log"``, ``"exp"``, ``"support_projector"``;
    ``p`` is the exponent for ``"power"``.
    """

    kind: str
    p: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in {"power", "log", "exp", "support_projector"}:
            raise ValueError(f"unknown spectral function {self.kind!r}")

    @classmethod
    def power(cls, p: float) -> "SpectralFunction":
        return cls("power", float(p))

    @classmethod
    def log(cls) -> "SpectralFunction":
        return cls("log")

    @classmethod
    def exp(cls) -> "SpectralFunction":
        return cls("exp")

    @classmethod
    def support_projector(cls) -> "SpectralFunction":
        return cls("support_projector")


def eig_hermitian(h: HermitianOperator) -> Spectrum:
    """Spectral decomposition with eigenvalues in ascending order.

    Raises
    ------
    NonHermitian
        Raised at construction time of ``h`` if it is not Hermitian.
    ConvergenceFailure
        If LAPACK does not converge.
    """
    return h.spectrum


def apply_spectral_fn(
    h: HermitianOperator, f: SpectralFunction, supp_tol: float = SUPP_TOL
) -> HermitianOperator:
    """Apply ``f`` through the spectral decomposition of ``h``.

    Powers and logarithms are evaluated only on eigenvalues above the support
    cutoff. Integer powers are permitted on indefinite operators; fractional
    powers and logarithms require positive semi-definite input.

    Examples
    --------
    >>> lay = SystemLayout([("A", 2)])
    >>> x = HermitianOperator(lay, np.diag([2.0, 0.0]))
    >>> np.real(np.diag(apply_spectral_fn(x, SpectralFunction.power(-1)).matrix))
    array([0.5, 0. ])
    """
    sp = h.spectrum
    w, v = sp.eigenvalues, sp.eigenvectors
    if f.kind == "exp":
        out = _from_eig(v, np.exp(w))
    elif f.kind == "support_projector" or (f.kind == "power" and f.p == 0):
        cut = supp_tol * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
        keep = np.abs(w) > cut
        out = v[:, keep] @ v[:, keep].conj().T
    elif f.kind == "log":
        out = mlog(h.entries, supp_tol=supp_tol, eig=(w, v))
    elif float(f.p).is_integer() and f.p > 0:
        out = _from_eig(v, w ** int(f.p))
    elif float(f.p).is_integer():
        cut = supp_tol * max(1.0, float(np.max(np.abs(w))) if w.size else 0.0)
        keep = np.abs(w) > cut
        vals = np.zeros_like(w)
        vals[keep] = w[keep] ** f.p
        out = _from_eig(v, vals)
    else:
        out = mpow(h.entries, f.p, supp_tol=supp_tol, eig=(w, v))
    return HermitianOperator._trusted(h.layout, hermitize(out))


def tensor(ops: Sequence[HermitianOperator]) -> HermitianOperator:
    """Kronecker product in the listed order; layouts are concatenated."""
    if not ops:
        raise ValueError("tensor of an empty list")
    layout = ops[0].layout
    mat = ops[0].entries
    for op in ops[1:]:
        layout = layout.concat(op.layout)
        mat = np.kron(mat, op.entries)
    return HermitianOperator._trusted(layout, mat)


def embed(x: HermitianOperator, target: SystemLayout) -> HermitianOperator:
    """Extend ``x`` by identities to ``target``, in the target's system order."""
    return HermitianOperator._trusted(target, embed_array(x.entries, x.layout, target))


def partial_trace(x: HermitianOperator, remove: Iterable[str]) -> HermitianOperator:
    """Trace out the systems in ``remove``."""
    remove = set(remove)
    out = ptrace_array(x.entries, x.layout, remove)
    return HermitianOperator._trusted(x.layout.without(remove), hermitize(out))


def permute(x: HermitianOperator, order: Sequence[str]) -> HermitianOperator:
    """Reorder the tensor factors of ``x`` to follow ``order``."""
    new = x.layout.reordered(order)
    perm = [x.layout.index(lab) for lab in order]
    return HermitianOperator._trusted(new, permute_array(x.entries, x.layout.dims, perm))


def schatten_alpha(x: np.ndarray | HermitianOperator, alpha: float) -> float:
    """Schatten alpha-quantity ``(sum_i s_i^alpha)^(1/alpha)``.

    Defined for every ``alpha > 0`` (it is only a norm for ``alpha >= 1``).
    ``alpha = inf`` returns the largest singular value. Large ``alpha`` is
    evaluated relative to the largest singular value to avoid overflow.
    """
    m = x.entries if isinstance(x, HermitianOperator) else np.asarray(x)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    smax = float(s.max()) if s.size else 0.0
    if smax == 0.0:
        return 0.0
    if math.isinf(alpha):
        return smax
    return smax * float(np.sum((s / smax) ** alpha)) ** (1.0 / alpha)


def trace_distance(rho: HermitianOperator, sigma: HermitianOperator) -> float:
    """Trace norm ``||rho - sigma||_1`` (no factor 1/2)."""
    _same_layout(rho, sigma)
    w = np.linalg.eigvalsh(hermitize(rho.entries - sigma.entries))
    return float(np.sum(np.abs(w)))


def fidelity(p: HermitianOperator | np.ndarray, q: HermitianOperator | np.ndarray) -> float:
    """Fidelity ``F(P, Q) = ||sqrt(P) sqrt(Q)||_1^2``.

    Raises
    ------
    NotPSD
        If either argument has an eigenvalue below ``-psd_tol``.
    """
    pm = p.entries if isinstance(p, HermitianOperator) else np.asarray(p)
    qm = q.entries if isinstance(q, HermitianOperator) else np.asarray(q)
    if isinstance(p, HermitianOperator) and isinstance(q, HermitianOperator):
        _same_layout(p, q)
    sp = mpow(pm, 0.5)
    sq = mpow(qm, 0.5)
    s = np.linalg.svd(sp @ sq, compute_uv=False)
    return float(np.sum(s)) ** 2
