"""Tolerance-aware dense linear algebra primitives.

Every operation in the toolkit routes its rank, nullspace, and definiteness
decisions through this module so that a single :class:`ToleranceConfig`
governs all of them.  Matrices are plain ``numpy.ndarray`` values; matrices
with zero rows or columns are first-class and propagate through every
operation.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from .errors import NotPSD, NotSquare, NotSymmetric

_EPS = float(np.finfo(np.float64).eps)

# Structural decisions (staircase compressions, feedback-existence rank
# tests) work on products of several orthogonal and pseudo-inverse factors,
# whose "exact zeros" land well above machine epsilon.  They scale the
# configured rank_rtol by this factor so that transform roundoff stays
# below threshold while genuine rank information stays above it.
STRUCTURAL_RANK_SAFETY = 256.0


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical policy for rank, definiteness, and stability decisions.

    rank_rtol
        Relative singular-value cutoff: sigma is counted as nonzero when
        ``sigma > rank_rtol * sigma_max * max(rows, cols)``.
    psd_tol
        Absolute eigenvalue threshold for (semi)definiteness decisions,
        applied after scaling by ``max(1, ||M||_2)``.
    axis_tol
        An eigenvalue is treated as purely imaginary when ``|Re| <= axis_tol``.
    stability_margin
        Required ``-Re(lambda)`` for an "asymptotically stable" verdict.
    """

    rank_rtol: float = _EPS
    psd_tol: float = 1e-10
    axis_tol: float = 1e-8
    stability_margin: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rtol", "psd_tol", "axis_tol", "stability_margin"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"tolerance {name} must be positive")


DEFAULT_TOL = ToleranceConfig()


def structural_tol(tol: ToleranceConfig) -> ToleranceConfig:
    """Rank policy for multi-stage structural decisions; see
    :data:`STRUCTURAL_RANK_SAFETY`."""
    return dataclasses.replace(
        tol, rank_rtol=min(tol.rank_rtol * STRUCTURAL_RANK_SAFETY, 1e-6)
    )


class DefinitenessKind(enum.Enum):
    POSITIVE_DEFINITE = "positive_definite"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    INDEFINITE = "indefinite"
    NEGATIVE_SEMIDEFINITE = "negative_semidefinite"
    NEGATIVE_DEFINITE = "negative_definite"


@dataclass(frozen=True)
class Definiteness:
    """Classification of a symmetric matrix with its extreme eigenvalues."""

    kind: DefinitenessKind
    min_eigenvalue: float
    max_eigenvalue: float

    @property
    def is_definite(self) -> bool:
        return self.kind is DefinitenessKind.POSITIVE_DEFINITE

    @property
    def is_semidefinite(self) -> bool:
        return self.kind in (
            DefinitenessKind.POSITIVE_DEFINITE,
            DefinitenessKind.POSITIVE_SEMIDEFINITE,
        )


def as_matrix(M) -> np.ndarray:
    """Coerce to a 2-D float (or complex) ndarray without copying when possible."""
    A = np.asarray(M)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    elif A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={A.ndim}")
    if not np.iscomplexobj(A):
        A = A.astype(np.float64, copy=False)
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    return A


def spectral_norm(M) -> float:
    """Largest singular value; 0.0 for matrices with an empty dimension."""
    A = as_matrix(M)
    if min(A.shape) == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[0])


def _rank_threshold(s: np.ndarray, shape: tuple[int, int], tol: ToleranceConfig) -> float:
    if s.size == 0:
        return 0.0
    return tol.rank_rtol * float(s[0]) * max(shape)


def numerical_rank(M, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above the relative cutoff.

    The zero matrix and matrices with an empty dimension have rank 0.
    """
    A = as_matrix(M)
    if min(A.shape) == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > _rank_threshold(s, A.shape, tol)))


def nullspace_basis(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical right nullspace (cols x nullity)."""
    A = as_matrix(M)
    q = A.shape[1]
    if q == 0:
        return np.zeros((0, 0))
    if A.shape[0] == 0:
        return np.eye(q)
    _, s, vh = np.linalg.svd(A)
    r = int(np.sum(s > _rank_threshold(s, A.shape, tol)))
    return vh[r:, :].conj().T


def range_basis(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical column space (rows x rank)."""
    A = as_matrix(M)
    if min(A.shape) == 0:
        return np.zeros((A.shape[0], 0))
    u, s, _ = np.linalg.svd(A)
    r = int(np.sum(s > _rank_threshold(s, A.shape, tol)))
    return u[:, :r]


def pseudo_inverse(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse with the same truncation rule as numerical_rank."""
    A = as_matrix(M)
    p, q = A.shape
    if min(p, q) == 0:
        return np.zeros((q, p))
    u, s, vh = np.linalg.svd(A, full_matrices=False)
    thr = _rank_threshold(s, A.shape, tol)
    inv = np.where(s > thr, 1.0 / np.where(s > thr, s, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


def _require_square(M: np.ndarray):
    if M.shape[0] != M.shape[1]:
        raise NotSquare(f"square matrix required, got shape {M.shape}")


def sym_skew_split(D) -> tuple[np.ndarray, np.ndarray]:
    """Split a square matrix into its symmetric and skew-symmetric parts.

    Returns ``(S, N)`` with ``S = (D + D^T)/2`` exactly symmetric,
    ``N = (D - D^T)/2`` exactly skew, and ``S + N == D`` up to one rounding.
    """
    A = as_matrix(D)
    _require_square(A)
    S = (A + A.T) / 2.0
    N = (A - A.T) / 2.0
    return S, N


def classify_definiteness(M, tol: ToleranceConfig = DEFAULT_TOL) -> Definiteness:
    """Classify the symmetric part of a square matrix by its spectrum.

    The input is symmetrized as ``(M + M^T)/2`` before the eigendecomposition;
    the decision band is ``psd_tol * max(1, ||M||_2)``.
    """
    A = as_matrix(M)
    _require_square(A)
    if A.shape[0] == 0:
        return Definiteness(DefinitenessKind.POSITIVE_DEFINITE, np.inf, -np.inf)
    H = (A + A.T) / 2.0
    w = np.linalg.eigvalsh(H)
    lo, hi = float(w[0]), float(w[-1])
    band = tol.psd_tol * max(1.0, max(abs(lo), abs(hi)))
    if lo > band:
        kind = DefinitenessKind.POSITIVE_DEFINITE
    elif hi < -band:
        kind = DefinitenessKind.NEGATIVE_DEFINITE
    elif lo >= -band:
        kind = DefinitenessKind.POSITIVE_SEMIDEFINITE
    elif hi <= band:
        kind = DefinitenessKind.NEGATIVE_SEMIDEFINITE
    else:
        kind = DefinitenessKind.INDEFINITE
    return Definiteness(kind, lo, hi)


def psd_sqrt(M, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Symmetric PSD square root, with eigenvalues clipped at zero.

    Raises NotSymmetric or NotPSD when the input violates either property
    beyond the ``psd_tol`` band.
    """
    A = as_matrix(M)
    _require_square(A)
    if A.shape[0] == 0:
        return np.zeros((0, 0))
    scale = max(1.0, spectral_norm(A))
    if spectral_norm(A - A.T) > tol.psd_tol * scale:
        raise NotSymmetric("psd_sqrt requires a symmetric matrix")
    H = (A + A.T) / 2.0
    w, V = np.linalg.eigh(H)
    if w[0] < -tol.psd_tol * scale:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} below the PSD band")
    root = np.sqrt(np.clip(w, 0.0, None))
    X = (V * root) @ V.T
    return (X + X.T) / 2.0
