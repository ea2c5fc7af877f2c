"""Dense matrix kernels shared by the rest of the package.

Everything here is a pure function of its arguments and carries no model
semantics: matrix exponentials, Van Loan style augmented-block integrals,
a Kronecker Lyapunov solver, SVD rank decisions, orthogonal complements,
block-companion polynomial roots and the positive-lower-triangular
orthonormalization used by the canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionError,
    NumericError,
    RankError,
    StabilityError,
    ValidationError,
)

#: Default relative tolerance (w.r.t. the largest singular value) for every
#: rank decision made in the package; overridable at each call site.
RANK_REL_TOL = 1e-9

#: Real-part threshold below which an eigenvalue counts as strictly stable.
HURWITZ_TOL = 1e-9


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce ``M`` to a 2-D float64 array, rejecting NaN/Inf entries."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if A.size and not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains non-finite entries")
    return A


def as_square(M, name: str = "matrix") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    return A


def as_vector(v, name: str = "vector") -> np.ndarray:
    x = np.asarray(v, dtype=float).reshape(-1)
    if x.size and not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} contains non-finite entries")
    return x


def check_symmetric(M: np.ndarray, name: str = "matrix", tol: float = 1e-10) -> np.ndarray:
    """Validate symmetry up to ``tol`` (relative) and return the symmetrized matrix."""
    A = as_square(M, name)
    scale = 1.0 + np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > tol * scale:
        raise ValidationError(f"{name} is not symmetric to tolerance {tol}")
    return 0.5 * (A + A.T)


def expm(M) -> np.ndarray:
    """Matrix exponential of a square matrix (scaling-and-squaring Pade)."""
    A = as_square(M, "expm input")
    return sla.expm(A)


def gramian_integral(A2, Q, h: float) -> np.ndarray:
    """Finite-horizon Gramian ``int_0^h e^{A2 u} Q e^{A2' u} du``.

    Computed by exponentiating the augmented block ``[[-A2, Q], [0, A2']] h``
    and recombining blocks; ``Q`` must be symmetric PSD, the result is
    symmetric by construction.
    """
    A = as_square(A2, "A2")
    Qs = check_symmetric(Q, "Q")
    if Qs.shape[0] != A.shape[0]:
        raise DimensionError(
            f"Q has shape {Qs.shape}, expected {A.shape}"
        )
    if h < 0:
        raise ValidationError(f"integration length h must be >= 0, got {h}")
    n = A.shape[0]
    if h == 0 or n == 0:
        return np.zeros((n, n))
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = -A
    blk[:n, n:] = Qs
    blk[n:, n:] = A.T
    phi = sla.expm(blk * h)
    W = phi[n:, n:].T @ phi[:n, n:]
    return 0.5 * (W + W.T)


def cross_integral(A2, G, h: float) -> np.ndarray:
    """Single-sided integral ``int_0^h e^{A2 u} G du``.

    Uses ``A2^{-1}(e^{A2 h} - I)G`` when ``A2`` is comfortably invertible,
    otherwise the augmented exponential ``[[A2, G], [0, 0]] h``.
    """
    A = as_square(A2, "A2")
    Gm = as_matrix(G, "G")
    if Gm.shape[0] != A.shape[0]:
        raise DimensionError(
            f"G has {Gm.shape[0]} rows, expected {A.shape[0]}"
        )
    if h < 0:
        raise ValidationError(f"integration length h must be >= 0, got {h}")
    n, k = A.shape[0], Gm.shape[1]
    if h == 0 or n == 0 or k == 0:
        return np.zeros((n, k))
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] > 1e-12 * max(1.0, sv[0]):
        return np.linalg.solve(A, (sla.expm(A * h) - np.eye(n)) @ Gm)
    blk = np.zeros((n + k, n + k))
    blk[:n, :n] = A
    blk[:n, n:] = Gm
    phi = sla.expm(blk * h)
    return phi[:n, n:]


def spectral_abscissa(A: np.ndarray) -> float:
    """Largest real part over the spectrum; < 0 iff the matrix is Hurwitz."""
    if A.size == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(A).real))


def lyapunov_solve(A2, Q, tol: float = HURWITZ_TOL) -> np.ndarray:
    """Unique solution of ``A2 G + G A2' + Q = 0`` for Hurwitz ``A2``.

    Solved by Kronecker vectorization; intended for the small state
    dimensions of this package.
    """
    A = as_square(A2, "A2")
    Qs = check_symmetric(Q, "Q")
    if Qs.shape[0] != A.shape[0]:
        raise DimensionError(f"Q has shape {Qs.shape}, expected {A.shape}")
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    if spectral_abscissa(A) >= -tol:
        raise StabilityError(
            "A2 is not Hurwitz: an eigenvalue has real part >= "
            f"{-tol} (max Re = {spectral_abscissa(A):.3e})"
        )
    K = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    try:
        x = np.linalg.solve(K, -Qs.reshape(n * n, order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Kronecker Lyapunov system is singular: {exc}") from exc
    G = x.reshape((n, n), order="F")
    return 0.5 * (G + G.T)


@dataclass(frozen=True)
class RankResult:
    """Outcome of an SVD rank decision."""

    rank: int
    singular_values: np.ndarray
    tolerance_used: float


def numerical_rank(M, rel_tol: float = RANK_REL_TOL) -> RankResult:
    """Numerical rank: count of singular values above ``rel_tol * sigma_max``."""
    A = as_matrix(M, "rank input")
    if rel_tol <= 0:
        raise ValidationError(f"rel_tol must be positive, got {rel_tol}")
    if A.size == 0:
        return RankResult(0, np.zeros(0), 0.0)
    s = np.linalg.svd(A, compute_uv=False)
    tol = rel_tol * s[0]
    return RankResult(int(np.sum(s > tol)), s, float(tol))


def orth_complement(M, rel_tol: float = RANK_REL_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``colspace(M)``.

    Requires full column rank ``s < d``; returns a ``d x (d - s)`` matrix
    with orthonormal columns satisfying ``M' M_perp = 0``.
    """
    A = as_matrix(M, "orth_complement input")
    d, s = A.shape
    if s >= d:
        raise RankError(
            f"need fewer columns than rows for a complement, got shape {A.shape}"
        )
    rr = numerical_rank(A, rel_tol)
    if rr.rank != s:
        raise RankError(f"matrix is rank deficient: rank {rr.rank} < {s} columns")
    U = np.linalg.svd(A, full_matrices=True)[0]
    return U[:, s:].copy()


def sort_complex(roots: np.ndarray) -> np.ndarray:
    """Deterministic root ordering: ascending real part, then imaginary part."""
    z = np.asarray(roots, dtype=complex)
    return z[np.lexsort((z.imag, z.real))]


def companion_matrix(coeffs: list[np.ndarray]) -> np.ndarray:
    """Block companion linearization of a monic matrix polynomial.

    ``coeffs`` lists the coefficients of ``z^p .. z^0``; the leading one must
    be the identity. The returned ``pd x pd`` matrix has identity blocks on
    the superdiagonal and ``(-P_p ... -P_1)`` in the last block row, so its
    eigenvalues are the roots of ``det P(z)``.
    """
    mats = [as_square(Ci, f"coefficient {i}") for i, Ci in enumerate(coeffs)]
    if not mats:
        raise ValidationError("coefficient sequence is empty")
    d = mats[0].shape[0]
    for i, Ci in enumerate(mats):
        if Ci.shape != (d, d):
            raise DimensionError(f"coefficient {i} has shape {Ci.shape}, expected ({d}, {d})")
    if np.linalg.norm(mats[0] - np.eye(d)) > 1e-12 * (1.0 + d):
        raise ValidationError("matrix polynomial is not monic (leading coefficient != I)")
    p = len(mats) - 1
    if p == 0:
        return np.zeros((0, 0))
    A = np.zeros((p * d, p * d))
    for k in range(p - 1):
        A[k * d:(k + 1) * d, (k + 1) * d:(k + 2) * d] = np.eye(d)
    for k in range(p):
        # block order: -P_p, -P_{p-1}, ..., -P_1
        A[(p - 1) * d:, k * d:(k + 1) * d] = -mats[p - k]
    return A


def poly_det_roots(coeffs: list[np.ndarray]) -> np.ndarray:
    """All ``p*d`` roots of ``det P(z)`` for a monic matrix polynomial."""
    A = companion_matrix(coeffs)
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    return sort_complex(np.linalg.eigvals(A))


def first_independent_rows(M: np.ndarray, count: int, rel_tol: float = RANK_REL_TOL) -> list[int]:
    """Indices of the first ``count`` linearly independent rows of ``M``.

    Greedy scan from the top with modified Gram-Schmidt against the rows
    already selected; the acceptance threshold is relative to the largest
    singular value of ``M`` so the selection is invariant under
    right-multiplication by well-conditioned matrices.
    """
    A = as_matrix(M, "row selection input")
    if count == 0:
        return []
    sigma = np.linalg.norm(A, 2)
    thresh = max(rel_tol * sigma, np.finfo(float).tiny)
    basis = np.zeros((0, A.shape[1]))
    picked: list[int] = []
    for i in range(A.shape[0]):
        r = A[i] - basis.T @ (basis @ A[i])
        r -= basis.T @ (basis @ r)
        nr = np.linalg.norm(r)
        if nr > thresh:
            picked.append(i)
            basis = np.vstack([basis, r / nr])
            if len(picked) == count:
                return picked
    raise RankError(
        f"only {len(picked)} linearly independent rows found, needed {count}"
    )


def positive_lower_triangularize(C, rel_tol: float = RANK_REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Unique positive-lower-triangular orthonormal basis of ``colspace(C)``.

    Returns ``(C1, T1)`` with ``C1 = C @ inv(T1)``, ``C1' C1 = I`` and the
    first nonzero entry of every column of ``C1`` positive, the pivot rows
    strictly descending the columns (column echelon structure). The output
    depends only on the column space of ``C``, which is what makes the
    canonical form of the unit-root block unique.
    """
    A = as_matrix(C, "C")
    d, c = A.shape
    if c == 0:
        return np.zeros((d, 0)), np.zeros((0, 0))
    if c > d:
        raise RankError(f"need at most as many columns as rows, got shape {A.shape}")
    if numerical_rank(A, rel_tol).rank != c:
        raise RankError(f"C is rank deficient: fewer than {c} independent columns")
    U = np.linalg.svd(A, full_matrices=False)[0]
    rows = first_independent_rows(U, c, rel_tol)
    Upiv = U[rows]
    # LQ with positive diagonal: Upiv = L Qf, L lower triangular
    Qq, Rr = np.linalg.qr(Upiv.T)
    signs = np.sign(np.diag(Rr))
    signs[signs == 0] = 1.0
    C1 = U @ (Qq * signs)
    T1 = C1.T @ A
    return C1, T1


def psd_factor(S: np.ndarray, tol: float = 1e-8, name: str = "matrix") -> np.ndarray:
    """Symmetric factor ``F`` with ``F F' = S`` for a PSD matrix.

    Eigen-based so that exactly singular covariances are handled; raises if
    the smallest eigenvalue is below ``-tol * scale``.
    """
    Ss = check_symmetric(S, name)
    if Ss.shape[0] == 0:
        return Ss.copy()
    w, V = np.linalg.eigh(Ss)
    scale = max(1.0, float(w[-1]))
    if w[0] < -tol * scale:
        raise NumericError(
            f"{name} is not positive semidefinite to tolerance "
            f"(min eigenvalue {w[0]:.3e})"
        )
    return V * np.sqrt(np.clip(w, 0.0, None))
