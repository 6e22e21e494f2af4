"""Structural analysis of matrix pencils ``s E - A``.

The workhorse is a staircase reduction with orthogonal transformations that
deflates a (possibly rectangular, possibly singular) pencil into its
Kronecker constituents: right/left minimal indices, infinite elementary
divisors, and a square regular part with invertible E whose generalized
eigenvalues are the finite spectrum.

All "full rank on the whole imaginary axis" questions are decided through
this reduction: the rank of ``[s E - A, B]`` drops below its normal value
exactly at the finite eigenvalues of the regular part of the augmented
pencil, so the decision is a finite check on those eigenvalues instead of a
sampling sweep.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    HypothesisViolated,
    NotSquare,
    NumericalBreakdown,
    ShapeMismatch,
    ToleranceBreakdown,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    as_matrix,
    classify_definiteness,
    nullspace_basis,
    numerical_rank,
    pseudo_inverse,
    range_basis,
    spectral_norm,
    structural_tol,
)
from .model import PHSystem


class StabilityClass(enum.Enum):
    ASYMPTOTICALLY_STABLE = "asymptotically_stable"
    STABLE_NOT_ASYMPTOTIC = "stable_not_asymptotic"
    UNSTABLE = "unstable"
    SINGULAR = "singular"


@dataclass(frozen=True)
class KroneckerSummary:
    """Block data of a staircase-reduced pencil ``s E - A`` of shape p x q."""

    rows: int
    cols: int
    normal_rank: int
    finite_eigenvalues: np.ndarray          # complex, eigenvalues of the regular part
    infinite_block_sizes: tuple[int, ...]   # one entry per infinite elementary divisor
    right_minimal_indices: tuple[int, ...]  # epsilon value per right singular block
    left_minimal_indices: tuple[int, ...]   # eta value per left singular block
    regular_A: np.ndarray = field(repr=False)
    regular_E: np.ndarray = field(repr=False)

    @property
    def n_regular(self) -> int:
        return self.regular_E.shape[0]

    @property
    def is_regular(self) -> bool:
        return (self.rows == self.cols
                and not self.right_minimal_indices
                and not self.left_minimal_indices)

    @property
    def index(self) -> int | None:
        """Largest infinite block size for regular pencils, else None."""
        if not self.is_regular:
            return None
        return max(self.infinite_block_sizes, default=0)

    def dimension_accounting(self) -> tuple[int, int]:
        """Rows and columns implied by the block data; must equal (rows, cols)."""
        inf_total = sum(self.infinite_block_sizes)
        r = self.n_regular + inf_total
        rows = r + sum(self.right_minimal_indices) + sum(e + 1 for e in self.left_minimal_indices)
        cols = r + sum(e + 1 for e in self.right_minimal_indices) + sum(self.left_minimal_indices)
        return rows, cols


@dataclass(frozen=True)
class PencilReport:
    regular: bool
    index: int | None                      # None when the pencil is singular
    finite_eigenvalues: np.ndarray
    rank_E: int
    stability_class: StabilityClass
    spectral_abscissa: float | None        # max Re(lambda), None when no finite spectrum
    axis_distance: float | None            # min |Re(lambda)|, None when no finite spectrum
    summary: KroneckerSummary = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "kind": "pencil",
            "regular": bool(self.regular),
            "index": self.index,
            "rank_E": int(self.rank_E),
            "stability_class": self.stability_class.value,
            "finite_eigenvalues": [[float(l.real), float(l.imag)]
                                   for l in self.finite_eigenvalues],
            "spectral_abscissa": self.spectral_abscissa,
            "axis_distance": self.axis_distance,
            "infinite_block_sizes": list(self.summary.infinite_block_sizes),
            "right_minimal_indices": list(self.summary.right_minimal_indices),
            "left_minimal_indices": list(self.summary.left_minimal_indices),
        }


def _decide_rank(s: np.ndarray, thr: float, stage: str) -> int:
    r = int(np.sum(s > thr))
    kept_min = float(s[r - 1]) if r > 0 else np.inf
    dropped_max = float(s[r]) if r < s.size else 0.0
    if kept_min < 10.0 * thr and dropped_max > thr / 10.0:
        raise ToleranceBreakdown(stage, thr, kept_min, dropped_max)
    return r


def _deflate_right_and_infinite(A, E, thr_a, thr_e, stage):
    """Alternating kernel-column / row compressions of ``s E - A``.

    Per step j records nu_j (kernel width of E) and s_j (row rank of A on
    that kernel), then deflates to the trailing subpencil.  Terminates with
    E of full column rank.  Thresholds are anchored at the original pencil
    norms so that later stages keep a consistent notion of "zero".
    """
    nu, ss = [], []
    Ac, Ec = A, E
    step = 1
    while Ec.shape[1] > 0:
        q = Ec.shape[1]
        _, s_e, vh_e = np.linalg.svd(Ec)
        r_e = _decide_rank(s_e, thr_e, f"{stage}: E-compression, step {step}")
        k = q - r_e
        if k == 0:
            break
        V = np.hstack([vh_e[r_e:, :].T, vh_e[:r_e, :].T])
        An, En = Ac @ V, Ec @ V
        u_a, s_a, _ = np.linalg.svd(An[:, :k])
        r_a = _decide_rank(s_a, thr_a, f"{stage}: A-compression, step {step}")
        Ac = (u_a.T @ An)[r_a:, k:]
        Ec = (u_a.T @ En)[r_a:, k:]
        nu.append(k)
        ss.append(r_a)
        step += 1
    return nu, ss, Ac, Ec


def _minimal_and_infinite(nu, ss, stage):
    """Right minimal indices and infinite divisor sizes from the step counts.

    nu_j - s_j blocks have minimal index j-1; the infinite divisors of size
    at least j number s_j minus the minimal indices that are still alive at
    later steps.
    """
    K = len(nu)
    minimal = []
    for j in range(1, K + 1):
        minimal.extend([j - 1] * (nu[j - 1] - ss[j - 1]))
    inf_geq = []
    for j in range(1, K + 1):
        alive_minimal = sum(nu[i - 1] - ss[i - 1] for i in range(j + 1, K + 1))
        inf_geq.append(ss[j - 1] - alive_minimal)
    inf_geq.append(0)
    sizes = []
    for j in range(1, K + 1):
        count = inf_geq[j - 1] - inf_geq[j]
        if count < 0:
            raise NumericalBreakdown(f"inconsistent staircase counts at {stage}")
        sizes.extend([j] * count)
    return minimal, sizes


def kronecker_staircase(A, E, tol: ToleranceConfig = DEFAULT_TOL) -> KroneckerSummary:
    """Kronecker block data of the pencil ``s E - A`` (rectangular allowed)."""
    A = as_matrix(A)
    E = as_matrix(E)
    if A.shape != E.shape:
        raise ShapeMismatch(f"pencil blocks differ in shape: {A.shape} vs {E.shape}")
    p, q = A.shape
    maxdim = max(p, q, 1)
    rtol = structural_tol(tol).rank_rtol
    thr_e = rtol * maxdim * spectral_norm(E)
    thr_a = rtol * maxdim * spectral_norm(A)

    nu_r, ss_r, A1, E1 = _deflate_right_and_infinite(A, E, thr_a, thr_e, "right pass")
    right_minimal, infinite_sizes = _minimal_and_infinite(nu_r, ss_r, "right pass")

    nu_l, ss_l, A2t, E2t = _deflate_right_and_infinite(A1.T, E1.T, thr_a, thr_e, "left pass")
    left_minimal, leftover = _minimal_and_infinite(nu_l, ss_l, "left pass")
    if leftover:
        raise NumericalBreakdown("left pass uncovered infinite structure; "
                                 "rank decisions are inconsistent")

    A_reg, E_reg = A2t.T, E2t.T
    if A_reg.shape[0] != A_reg.shape[1]:
        raise NumericalBreakdown("regular part is not square after deflation")
    if A_reg.shape[0]:
        finite = sla.eigvals(A_reg, E_reg)
        if not np.all(np.isfinite(finite)):
            raise NumericalBreakdown("non-finite eigenvalues in the deflated regular part")
    else:
        finite = np.zeros(0, dtype=complex)

    summary = KroneckerSummary(
        rows=p,
        cols=q,
        normal_rank=q - len(right_minimal),
        finite_eigenvalues=finite,
        infinite_block_sizes=tuple(infinite_sizes),
        right_minimal_indices=tuple(right_minimal),
        left_minimal_indices=tuple(left_minimal),
        regular_A=A_reg,
        regular_E=E_reg,
    )
    if summary.dimension_accounting() != (p, q):
        raise NumericalBreakdown("staircase block sizes do not account for the pencil shape")
    return summary


def _cluster_multiplicity(evs: np.ndarray, lam: complex, rtol: float = 1e-8) -> int:
    return int(np.sum(np.abs(evs - lam) <= rtol * max(1.0, abs(lam))))


def _axis_eigenvalues_semisimple(summary: KroneckerSummary, tol: ToleranceConfig) -> bool:
    """Algebraic multiplicity equals rank deficiency of the shifted regular part."""
    evs = summary.finite_eigenvalues
    axis = evs[np.abs(evs.real) <= tol.axis_tol]
    seen: list[complex] = []
    for lam in axis:
        if any(abs(lam - mu) <= 1e-8 * max(1.0, abs(mu)) for mu in seen):
            continue
        seen.append(complex(lam))
        alg = _cluster_multiplicity(evs, lam)
        shifted = lam * summary.regular_E - summary.regular_A
        geo = summary.n_regular - numerical_rank(shifted, structural_tol(tol))
        if geo < alg:
            return False
    return True


def pencil_report(E, A, tol: ToleranceConfig = DEFAULT_TOL) -> PencilReport:
    """Regularity, index, finite spectrum, and stability class of ``s E - A``."""
    E = as_matrix(E)
    A = as_matrix(A)
    if E.shape[0] != E.shape[1] or A.shape != E.shape:
        raise NotSquare("pencil_report requires square E and A of equal shape")
    summary = kronecker_staircase(A, E, tol)
    evs = summary.finite_eigenvalues
    re = evs.real
    abscissa = float(re.max()) if evs.size else None
    axis_dist = float(np.abs(re).min()) if evs.size else None

    if not summary.is_regular:
        cls = StabilityClass.SINGULAR
    elif evs.size == 0 or np.all(re <= -tol.stability_margin):
        cls = StabilityClass.ASYMPTOTICALLY_STABLE
    elif np.any(re > tol.axis_tol):
        cls = StabilityClass.UNSTABLE
    elif _axis_eigenvalues_semisimple(summary, tol):
        cls = StabilityClass.STABLE_NOT_ASYMPTOTIC
    else:
        cls = StabilityClass.UNSTABLE

    return PencilReport(
        regular=summary.is_regular,
        index=summary.index,
        finite_eigenvalues=evs,
        rank_E=numerical_rank(E, tol),
        stability_class=cls,
        spectral_abscissa=abscissa,
        axis_distance=axis_dist,
        summary=summary,
    )


def singular_common_nullspace(sys: PHSystem, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True when E, J, R share a nullspace direction, which for valid
    port-Hamiltonian data is equivalent to ``s E - (J - R)`` being singular."""
    stacked = np.vstack([sys.E, sys.J, sys.R])
    return numerical_rank(stacked, structural_tol(tol)) < sys.n


def _axis_full_row_rank(M, K, tol: ToleranceConfig) -> tuple[bool, list[complex]]:
    """Decide rank(s M - K) == rows for every s on the imaginary axis.

    Returns the offending s values: the axis eigenvalues of the regular
    part, plus s = 0 as a representative witness when the normal rank is
    already deficient (then every axis point offends).
    """
    M = as_matrix(M)
    K = as_matrix(K)
    p = M.shape[0]
    if p == 0:
        return True, []
    summary = kronecker_staircase(K, M, tol)
    deficient = summary.normal_rank < p
    evs = summary.finite_eigenvalues
    witnesses = [complex(l) for l in evs[np.abs(evs.real) <= tol.axis_tol]]
    witnesses.sort(key=lambda z: (z.imag, z.real))
    if deficient and not witnesses:
        witnesses = [0j]
    return (not deficient) and not witnesses, witnesses


def imaginary_axis_full_rank(E, A, B, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[bool, list[complex]]:
    """Decide rank([s E - A, B]) == n for all s in the closed imaginary axis.

    B may have zero columns, in which case the pencil itself is tested.
    """
    E = as_matrix(E)
    A = as_matrix(A)
    B = as_matrix(B) if B is not None else np.zeros((E.shape[0], 0))
    n = E.shape[0]
    if E.shape != (n, n) or A.shape != (n, n) or B.shape[0] != n:
        raise ShapeMismatch("imaginary_axis_full_rank expects n x n pencils and n x k B")
    M = np.hstack([E, np.zeros((n, B.shape[1]))])
    K = np.hstack([A, B])
    return _axis_full_row_rank(M, K, tol)


def undamped_block_stability_condition(E, J, R, n1: int,
                                       tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Asymptotic-stability test for pencils whose dissipation is confined to
    a leading PD block ``R = diag(R11, 0)`` with ``R11`` of size n1.

    The pencil ``s E - (J - R)`` has all finite eigenvalues in the open left
    half plane exactly when the trailing block row
    ``[s E12^T + J12^T, s E22 - J22]`` keeps full row rank on the axis.
    """
    E = as_matrix(E)
    J = as_matrix(J)
    R = as_matrix(R)
    n = E.shape[0]
    if not (E.shape == J.shape == R.shape == (n, n)):
        raise ShapeMismatch("E, J, R must be square of equal size")
    if not 0 <= n1 <= n:
        raise ShapeMismatch(f"n1 must be in [0, {n}]")
    scale = max(1.0, spectral_norm(R))
    off = spectral_norm(R[:n1, n1:])
    trailing = spectral_norm(R[n1:, n1:])
    if off > tol.psd_tol * scale or trailing > tol.psd_tol * scale:
        raise HypothesisViolated("R is not of the block form diag(R11, 0)")
    if n1 > 0 and not classify_definiteness(R[:n1, :n1], tol).is_definite:
        raise HypothesisViolated("leading dissipation block R11 is not positive definite")
    n2 = n - n1
    if n2 == 0:
        return True
    M = np.hstack([E[:n1, n1:].T, E[n1:, n1:]])
    K = np.hstack([-J[:n1, n1:].T, J[n1:, n1:]])
    ok, _ = _axis_full_row_rank(M, K, tol)
    return ok


def undamped_block_nonsingularity_condition(J, n1: int,
                                            tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Companion rank test: with ``R = diag(R11 > 0, 0)``, the matrix
    ``J - R`` is nonsingular exactly when ``[-J12^T, J22]`` has full row rank."""
    J = as_matrix(J)
    n = J.shape[0]
    if J.shape != (n, n) or not 0 <= n1 <= n:
        raise ShapeMismatch("J must be square and n1 within range")
    n2 = n - n1
    if n2 == 0:
        return True
    M = np.hstack([-J[:n1, n1:].T, J[n1:, n1:]])
    return numerical_rank(M, structural_tol(tol)) == n2


def input_range_blocks(sys: PHSystem, tol: ToleranceConfig = DEFAULT_TOL
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Feedback-reachable input directions split by the feedthrough.

    Returns ``(B1, B3)`` with ``B1 = (G-P) (S+N)^+ Q_S`` (Q_S an orthonormal
    range basis of S) and ``B3 = (G-P) Z_D`` (Z_D an orthonormal nullspace
    basis of S+N).  These are the input directions through which a feedback
    can inject dissipation.
    """
    D = sys.D
    B1 = sys.B @ pseudo_inverse(D, tol) @ range_basis(sys.S, tol)
    B3 = sys.B @ nullspace_basis(D, tol)
    return B1, B3


def stabilizability_rank_condition(sys: PHSystem, tol: ToleranceConfig = DEFAULT_TOL
                                   ) -> tuple[bool, list[complex]]:
    """Existence condition for a structure-preserving stabilizing feedback:
    ``[s E - (J - R), B1, B3]`` must keep full row rank on the imaginary axis.

    Returns the verdict and the offending axis points when it fails.
    """
    B1, B3 = input_range_blocks(sys, tol)
    return imaginary_axis_full_rank(sys.E, sys.A, np.hstack([B1, B3]), tol)


def index_reduction_rank_condition(sys: PHSystem, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Existence condition for regularity and index at most one under
    structure-preserving feedback: ``[E, (J-R) Z_E, B1, B3]`` has rank n,
    with Z_E an orthonormal nullspace basis of E."""
    B1, B3 = input_range_blocks(sys, tol)
    Z_E = nullspace_basis(sys.E, tol)
    stacked = np.hstack([sys.E, sys.A @ Z_E, B1, B3])
    return numerical_rank(stacked, structural_tol(tol)) == sys.n


def strict_passifiability_condition(sys: PHSystem, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Existence condition for a strictly passifying feedback: S must be
    positive definite and so must
    ``R + (G-P)(S+N)^{-1}(G+P)^T / 2 + (G+P)(S+N)^{-T}(G-P)^T / 2``."""
    if sys.m == 0:
        return False
    if not classify_definiteness(sys.S, tol).is_definite:
        return False
    T = 0.5 * sys.B @ np.linalg.solve(sys.D, (sys.G + sys.P).T)
    return classify_definiteness(sys.R + T + T.T, tol).is_definite


def index_one_rank_condition(E, A, B, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Rank test guaranteeing that dissipation-preserving feedback through B
    yields a regular pencil of index at most one: rank([E, A Z_E, B]) == n."""
    E = as_matrix(E)
    A = as_matrix(A)
    B = as_matrix(B) if B is not None else np.zeros((E.shape[0], 0))
    n = E.shape[0]
    if E.shape != (n, n) or A.shape != (n, n) or B.shape[0] != n:
        raise ShapeMismatch("index_one_rank_condition expects n x n pencils and n x k B")
    Z_E = nullspace_basis(E, tol)
    return numerical_rank(np.hstack([E, A @ Z_E, B]), structural_tol(tol)) == n
