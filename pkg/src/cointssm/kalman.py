"""Steady-state Kalman filtering of the sampled model.

The prediction covariance is the fixed point of the discrete algebraic
Riccati map with the exact one-step noise covariance as constant term; the
filter has no separate measurement noise because the observation equation
is noiseless. The unit root in the transition matrix slows the fixed-point
iteration down but does not break it as long as the model is minimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import matops
from .errors import (
    ConditioningError,
    ConvergenceError,
    DimensionError,
    StabilityError,
)
from .model import CointCanonicalForm
from .moments import SampledModel
from .realization import MinimalityReport, _report_from_pair

RICCATI_TOL = 1e-12
RICCATI_MAX_ITER = 10**6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class KalmanSolution:
    """Stabilizing Riccati solution and the derived steady-state quantities.

    ``omega`` is the one-step prediction covariance, ``gain`` the steady
    state Kalman gain, ``v = C omega C'`` the innovation covariance and
    ``closed_loop = e^{Ah} - gain C`` the filter transition, with spectral
    radius < 1. ``c_matrix`` retains the observation matrix the solution
    was computed for.
    """

    omega: np.ndarray
    gain: np.ndarray
    v: np.ndarray
    closed_loop: np.ndarray
    iterations: int
    residual: float
    c_matrix: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.closed_loop))))


def _riccati_step(omega: np.ndarray, eAh: np.ndarray, C: np.ndarray,
                  sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One application of the Riccati map, returning (new omega, G, S) with
    G = e^{Ah} omega C' and S = C omega C'.
    """
    G = eAh @ omega @ C.T
    S = C @ omega @ C.T
    S = 0.5 * (S + S.T)
    try:
        cf = sla.cho_factor(S)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"C omega C' is numerically singular: {exc}") from exc
    new = eAh @ omega @ eAh.T - G @ sla.cho_solve(cf, G.T) + sigma
    return 0.5 * (new + new.T), G, S


def solve_steady_state(
    sm: SampledModel,
    cf: CointCanonicalForm,
    tol: float = RICCATI_TOL,
    max_iter: int = RICCATI_MAX_ITER,
) -> KalmanSolution:
    """Fixed point of the Riccati map, iterated from ``omega_0 = sigma_tilde``.

    Stops when successive iterates differ by less than ``tol`` in Frobenius
    norm relative to ``1 + ||omega||``; the returned solution is verified
    against the Riccati residual, closed-loop stability and positive
    definiteness of the innovation covariance.
    """
    C = cf.full_C()
    eAh = np.asarray(sm.eAh)
    sigma = np.asarray(sm.sigma_tilde)
    if C.shape[1] != eAh.shape[0]:
        raise DimensionError(
            f"C has {C.shape[1]} columns but the sampled model has N={eAh.shape[0]}"
        )
    if matops.numerical_rank(C).rank < cf.d:
        raise ConditioningError("observation matrix C does not have full row rank")

    omega = sigma.copy()
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new, _, _ = _riccati_step(omega, eAh, C, sigma)
        delta = np.linalg.norm(new - omega)
        omega = new
        if delta < tol * (1.0 + np.linalg.norm(omega)):
            break
    else:
        raise ConvergenceError(
            f"Riccati iteration did not converge in {max_iter} steps "
            f"(last update {delta:.3e})"
        )

    new, G, S = _riccati_step(omega, eAh, C, sigma)
    residual = float(np.linalg.norm(omega - new))
    scale = 1.0 + np.linalg.norm(omega)
    if residual > RESIDUAL_TOL * scale:
        raise ConvergenceError(
            f"converged iterate violates the Riccati residual bound: {residual:.3e}"
        )
    gain = np.linalg.solve(S, G.T).T
    v = 0.5 * (S + S.T)
    closed_loop = eAh - gain @ C
    rho = float(np.max(np.abs(np.linalg.eigvals(closed_loop))))
    if rho >= 1.0:
        raise StabilityError(
            f"closed loop is not Schur stable (spectral radius {rho:.6f})"
        )
    if np.min(np.linalg.eigvalsh(v)) <= 0:
        raise ConditioningError("innovation covariance V is not positive definite")
    return KalmanSolution(
        omega=omega,
        gain=gain,
        v=v,
        closed_loop=closed_loop,
        iterations=iterations,
        residual=residual,
        c_matrix=C,
    )


def filter_innovations(
    ks: KalmanSolution,
    sm: SampledModel,
    y: np.ndarray,
    x_hat_0=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the steady-state innovation recursion over an observation array.

    ``x_hat_n = closed_loop x_hat_{n-1} + gain y_{n-1}`` and
    ``eps_n = y_n - C x_hat_n``; the unobserved pre-sample value is taken as
    zero, consistent with the default zero state estimate (the transient
    decays geometrically at the closed-loop rate).
    """
    Y = matops.as_matrix(y, "observations")
    d = ks.c_matrix.shape[0]
    N = ks.closed_loop.shape[0]
    if Y.shape[1] != d:
        raise DimensionError(f"observations have {Y.shape[1]} columns, expected d={d}")
    if x_hat_0 is None:
        xh = np.zeros(N)
    else:
        xh = matops.as_vector(x_hat_0, "x_hat_0")
        if xh.size != N:
            raise DimensionError(f"x_hat_0 has length {xh.size}, expected N={N}")
    T = Y.shape[0]
    innovations = np.empty((T, d))
    x_hat = np.empty((T, N))
    cl, K, C = ks.closed_loop, ks.gain, ks.c_matrix
    y_prev = np.zeros(d)
    for n in range(T):
        xh = cl @ xh + K @ y_prev
        innovations[n] = Y[n] - C @ xh
        x_hat[n] = xh
        y_prev = Y[n]
    return innovations, x_hat


def check_filtered_controllability(ks: KalmanSolution, sm: SampledModel,
                                   rel_tol: float = matops.RANK_REL_TOL) -> MinimalityReport:
    """Check that the innovation-form model ``(e^{Ah}, gain, C)`` is still
    minimal: controllability of (e^{Ah}, gain) plus observability of
    (e^{Ah}, C), which coincides with continuous-time observability.
    """
    return _report_from_pair(np.asarray(sm.eAh), ks.gain, ks.c_matrix, rel_tol)
