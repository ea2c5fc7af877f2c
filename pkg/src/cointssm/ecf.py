"""Discrete-time error correction decomposition of the filtered model.

The innovation transfer function k(z) maps observations to innovations; its
value at one has reduced rank equal to the cointegration rank and factors as
-alpha beta' with beta spanning the cointegration space. Splitting k into
the long-run matrix and the infinite-order short-run filter gives the error
correction form dY_n = alpha beta' Y_{n-1} + ktilde(B) dY_n + eps_n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matops
from .cointegration import _signed_rank_factors
from .errors import (
    CointegrationRankError,
    ConditioningError,
    DimensionError,
    NumericError,
    ValidationError,
)
from .kalman import KalmanSolution
from .model import CointCanonicalForm
from .moments import SampledModel

DEFAULT_TRUNCATION = 200


@dataclass(frozen=True)
class EcfDecomposition:
    """Long-run matrix, its factorization and the truncated filter weights.

    ``L_coeffs[j]`` is the j-th moving-average coefficient of k (L_0 = I),
    ``Ktilde_coeffs[j]`` the j-th short-run filter coefficient (Ktilde_0 = 0);
    both stored for j <= truncation with the geometric tail size recorded.
    """

    k1: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    r: int
    L_coeffs: np.ndarray
    Ktilde_coeffs: np.ndarray
    truncation: int
    tail_bound: float

    @property
    def d(self) -> int:
        return self.k1.shape[0]


def transfer_eval(ks: KalmanSolution, sm: SampledModel, z: complex) -> np.ndarray:
    """Innovation transfer function ``k(z) = I - C [I - closed_loop z]^{-1} K z``."""
    cl, K, C = ks.closed_loop, ks.gain, ks.c_matrix
    N, d = cl.shape[0], C.shape[0]
    M = np.eye(N) - cl * z
    try:
        resolvent = np.linalg.solve(M, K.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"I - closed_loop z is singular at z={z}: {exc}") from exc
    return np.eye(d) - (C @ resolvent) * z


def k_at_one(ks: KalmanSolution, sm: SampledModel) -> np.ndarray:
    """Long-run matrix ``k(1) = I - C [I - closed_loop]^{-1} K`` (real)."""
    cl, K, C = ks.closed_loop, ks.gain, ks.c_matrix
    N, d = cl.shape[0], C.shape[0]
    return np.eye(d) - C @ np.linalg.solve(np.eye(N) - cl, K)


def factor_alpha_beta(k1: np.ndarray, c: int,
                      rel_tol: float = matops.RANK_REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Factor ``k(1) = -alpha beta'`` through its rank-r SVD, r = d - c.

    Sign convention as in the cointegration module: each beta column's first
    nonzero entry is positive. Raises when the numerical rank of k(1)
    disagrees with the cointegration structure.
    """
    K1 = matops.as_square(k1, "k1")
    d = K1.shape[0]
    r = d - c
    if r <= 0 or r >= d:
        raise CointegrationRankError(
            f"factorization needs a cointegrated model (0 < d - c < d), got c={c}, d={d}"
        )
    found = matops.numerical_rank(K1, rel_tol).rank
    if found != r:
        raise CointegrationRankError(
            f"numerical rank of k(1) is {found}, expected d - c = {r}"
        )
    alpha, beta = _signed_rank_factors(-K1, r)
    return alpha, beta


def ma_and_ktilde_coeffs(ks: KalmanSolution, sm: SampledModel, J: int = DEFAULT_TRUNCATION,
                         rel_tol: float = matops.RANK_REL_TOL) -> EcfDecomposition:
    """Complete error correction decomposition truncated at lag J.

    ``L_j = -C closed_loop^{j-1} K`` for j >= 1 and the short-run weights in
    geometric closed form ``Ktilde_j = -C closed_loop^j (I - closed_loop)^{-1} K``,
    the expansion of ``ktilde(z) = I - (k(z) - k(1) z) / (1 - z)``; the
    infinite tails collapse because the closed loop is Schur stable. The sign
    is pinned by that definition: it makes ``k(z) = k(1) z + (1-z)(I -
    ktilde(z))`` and the residual reconstruction hold, and implies the
    coefficient recursion ``Ktilde_j - Ktilde_{j-1} = -L_j``. ``tail_bound``
    records the size of the discarded tail.
    """
    if J < 1:
        raise ValidationError(f"truncation J must be >= 1, got {J}")
    cl, K, C = ks.closed_loop, ks.gain, ks.c_matrix
    N, d = cl.shape[0], C.shape[0]
    c = sm.c
    k1 = k_at_one(ks, sm)
    alpha, beta = factor_alpha_beta(k1, c, rel_tol)

    settle = np.linalg.solve(np.eye(N) - cl, K)  # (I - cl)^{-1} K
    L = np.empty((J + 1, d, d))
    Kt = np.empty((J + 1, d, d))
    L[0] = np.eye(d)
    Kt[0] = np.zeros((d, d))
    power = np.eye(N)  # cl^{j-1} entering lag j
    for j in range(1, J + 1):
        L[j] = -C @ power @ K
        Kt[j] = -C @ (cl @ power) @ settle
        power = cl @ power
    rho = ks.spectral_radius
    tail = float(np.linalg.norm(C) * rho**J * np.linalg.norm(settle))
    return EcfDecomposition(
        k1=k1, alpha=alpha, beta=beta, r=d - c,
        L_coeffs=L, Ktilde_coeffs=Kt, truncation=J, tail_bound=tail,
    )


def ecf_residuals(dec: EcfDecomposition, y: np.ndarray, J: int | None = None) -> np.ndarray:
    """Innovation estimates reconstructed from the error correction form.

    ``eps_n = dY_n - alpha beta' Y_{n-1} - sum_{j=1}^J Ktilde_j dY_{n-j}``,
    returned for n = J+2 .. n_obs (1-based); earlier rows are warm-up and
    excluded rather than zero-padded.
    """
    Y = matops.as_matrix(y, "observations")
    if J is None:
        J = dec.truncation
    if J > dec.truncation:
        raise ValidationError(
            f"requested J={J} exceeds the stored truncation {dec.truncation}"
        )
    T, d = Y.shape
    if d != dec.d:
        raise DimensionError(f"path has d={d}, decomposition has d={dec.d}")
    if T < J + 2:
        raise ValidationError(f"path of length {T} is shorter than J + 2 = {J + 2}")
    dY = np.diff(Y, axis=0)  # row i = dY_{i+2} (1-based step index)
    pi = dec.alpha @ dec.beta.T
    out = dY[J:].copy()  # dY_n for n = J+2 .. T
    out -= Y[J:-1] @ pi.T  # Y_{n-1}
    for j in range(1, J + 1):
        out -= dY[J - j:T - 1 - j] @ dec.Ktilde_coeffs[j].T
    return out


@dataclass(frozen=True)
class StructuralCheckReport:
    projector: np.ndarray
    idempotency_defect: float
    projector_rank: int
    k1_reconstruction_error: float
    ok: bool


def structural_check(ks: KalmanSolution, sm: SampledModel, cf: CointCanonicalForm,
                     tol_idem: float = 1e-10, tol_k1: float = 1e-8) -> StructuralCheckReport:
    """Verify the structural identities behind the rank law of k(1).

    With the gain partitioned along the unit-root split,
    ``P = I - C1 (K1 C1)^{-1} K1`` must be idempotent of rank d - c and
    ``k(1) = P (I + P R P)^{-1}`` for ``R = C2 (I - e^{A2 h})^{-1} K2``.
    """
    c = cf.c
    d = cf.d
    K1 = ks.gain[:c, :]
    K2 = ks.gain[c:, :]
    C1, C2 = np.asarray(cf.C1), np.asarray(cf.C2)
    core = K1 @ C1
    if c > 0 and matops.numerical_rank(core).rank < c:
        raise ConditioningError("K1 C1 is singular; structural identities unavailable")
    P = np.eye(d) - (C1 @ np.linalg.solve(core, K1) if c else np.zeros((d, d)))
    idem = float(np.linalg.norm(P @ P - P))
    rank_p = matops.numerical_rank(P).rank

    n2 = cf.n2
    R = C2 @ np.linalg.solve(np.eye(n2) - sm.eA2h, K2) if n2 else np.zeros((d, d))
    PRP = P @ R @ P
    k1_rebuilt = P @ np.linalg.inv(np.eye(d) + PRP)
    err = float(np.linalg.norm(k1_rebuilt - k_at_one(ks, sm)))
    ok = idem <= tol_idem and rank_p == d - c and err <= tol_k1
    return StructuralCheckReport(
        projector=P,
        idempotency_defect=idem,
        projector_rank=rank_p,
        k1_reconstruction_error=err,
        ok=ok,
    )


def innovations_alt_rep(dec: EcfDecomposition, ks: KalmanSolution, sm: SampledModel,
                        ps, J: int | None = None) -> np.ndarray:
    """Innovations via the split representation
    ``eps_n = k(B) y2_n + (I - ktilde)(B) C1 r1_n``.

    Both filters are truncated at J; rows n = J+1 .. n_steps are returned.
    Requires a PathSet that retained the stationary part and the unit-root
    noise.
    """
    if J is None:
        J = dec.truncation
    if J > dec.truncation:
        raise ValidationError(
            f"requested J={J} exceeds the stored truncation {dec.truncation}"
        )
    y2 = getattr(ps, "y2", None)
    r1 = getattr(ps, "r1", None)
    if y2 is None or r1 is None:
        raise ValidationError("PathSet lacks the y2/r1 components the representation needs")
    y2 = matops.as_matrix(y2, "y2")
    T = y2.shape[0]
    if T <= J:
        raise ValidationError(f"path of length {T} is too short for J={J}")
    c1r1 = np.asarray(r1) @ ps.c1.T
    out = np.zeros((T - J, y2.shape[1]))
    for j in range(J + 1):
        seg = slice(J - j, T - j)
        out += y2[seg] @ dec.L_coeffs[j].T
        if j == 0:
            out += c1r1[seg]
        else:
            out -= c1r1[seg] @ dec.Ktilde_coeffs[j].T
    return out


@dataclass(frozen=True)
class WhitenessReport:
    n_obs: int
    max_lag: int
    band: float
    autocorrelations: np.ndarray
    max_abs: float
    degenerate: bool
    passed: bool


def whiteness_diagnostic(eps: np.ndarray, max_lag: int = 10) -> WhitenessReport:
    """Entrywise sample autocorrelations of an innovation sequence with the
    plus/minus 3/sqrt(n) whiteness band.
    """
    E = matops.as_matrix(eps, "innovations")
    n, d = E.shape
    if max_lag < 1:
        raise ValidationError(f"max_lag must be >= 1, got {max_lag}")
    if n < 100 * max_lag:
        raise ValidationError(
            f"need at least 100 * max_lag = {100 * max_lag} observations, got {n}"
        )
    band = 3.0 / np.sqrt(n)
    centered = E - E.mean(axis=0)
    c0 = centered.T @ centered / n
    sd = np.sqrt(np.diag(c0))
    degenerate = bool(np.any(sd <= 1e-14 * (1.0 + np.max(sd, initial=0.0))))
    acf = np.zeros((max_lag, d, d))
    if not degenerate:
        denom = np.outer(sd, sd)
        for k in range(1, max_lag + 1):
            ck = centered[k:].T @ centered[:-k] / n
            acf[k - 1] = ck / denom
    max_abs = float(np.max(np.abs(acf))) if not degenerate else float("nan")
    passed = bool(not degenerate and max_abs <= band)
    return WhitenessReport(
        n_obs=n, max_lag=max_lag, band=float(band),
        autocorrelations=acf, max_abs=max_abs,
        degenerate=degenerate, passed=passed,
    )
