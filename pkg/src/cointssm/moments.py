"""Closed-form moments and the exact discretization of the canonical model.

The sampled process Y(nh) satisfies a discrete state recursion with i.i.d.
noise whose covariance splits into four blocks; all blocks are computed by
augmented matrix-exponential integrals, never quadrature (quadrature exists
only as a test oracle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matops
from .errors import ValidationError
from .model import CointCanonicalForm


@dataclass(frozen=True)
class SampledModel:
    """Exact discretization artifacts for step ``h``.

    ``eAh = diag(I_c, e^{A2 h})`` is the one-step transition,
    ``sigma_tilde`` the i.i.d. noise covariance with blocks indexed by the
    unit-root/stationary split, and ``gamma0`` the stationary covariance of
    the stable state block.
    """

    h: float
    c: int
    eAh: np.ndarray
    sigma_tilde: np.ndarray
    gamma0: np.ndarray

    @property
    def N(self) -> int:
        return self.eAh.shape[0]

    @property
    def sigma11(self) -> np.ndarray:
        return self.sigma_tilde[: self.c, : self.c]

    @property
    def sigma12(self) -> np.ndarray:
        return self.sigma_tilde[: self.c, self.c:]

    @property
    def sigma21(self) -> np.ndarray:
        return self.sigma_tilde[self.c:, : self.c]

    @property
    def sigma22(self) -> np.ndarray:
        return self.sigma_tilde[self.c:, self.c:]

    @property
    def eA2h(self) -> np.ndarray:
        return self.eAh[self.c:, self.c:]


def discretize(cf: CointCanonicalForm, h: float) -> SampledModel:
    """Exact sampled model on the grid {nh}.

    sigma11 = h B1 S B1', sigma21 = int_0^h e^{A2 u} B2 S B1' du,
    sigma22 = int_0^h e^{A2 u} B2 S B2' e^{A2' u} du with S the driver
    covariance, and gamma0 solves A2 G + G A2' + B2 S B2' = 0.
    """
    if h <= 0:
        raise ValidationError(f"sampling step h must be positive, got {h}")
    c, n2 = cf.c, cf.n2
    S = np.asarray(cf.levy.sigma_L)
    B1, B2, A2 = np.asarray(cf.B1), np.asarray(cf.B2), np.asarray(cf.A2)

    eAh = np.eye(cf.N)
    if n2:
        eAh[c:, c:] = matops.expm(A2 * h)

    sigma = np.zeros((cf.N, cf.N))
    sigma[:c, :c] = h * B1 @ S @ B1.T
    if n2:
        s21 = matops.cross_integral(A2, B2 @ S @ B1.T, h)
        sigma[c:, :c] = s21
        sigma[:c, c:] = s21.T
        sigma[c:, c:] = matops.gramian_integral(A2, B2 @ S @ B2.T, h)
        gamma0 = matops.lyapunov_solve(A2, B2 @ S @ B2.T)
    else:
        gamma0 = np.zeros((0, 0))
    sigma = 0.5 * (sigma + sigma.T)
    return SampledModel(h=float(h), c=c, eAh=eAh, sigma_tilde=sigma, gamma0=gamma0)


def mean(cf: CointCanonicalForm, x1_0) -> np.ndarray:
    """``E[Y(t)] = C1 x1_0``, constant in t."""
    x0 = matops.as_vector(x1_0, "x1_0")
    if x0.size != cf.c:
        raise ValidationError(f"x1_0 has length {x0.size}, expected c={cf.c}")
    return np.asarray(cf.C1) @ x0


def cov_continuous(cf: CointCanonicalForm, t: float, s: float) -> np.ndarray:
    """``Cov(Y(t), Y(t+s)) = E[Y(t) Y(t+s)']`` under the convention ``X1(0) = 0``.

    Four closed-form terms: the stationary autocovariance
    ``C2 Gamma0 e^{A2' s} C2'`` (the later time sits on the transposed side;
    Monte-Carlo arbitration picks this orientation), two Levy/stationary
    cross integrals, and the random-walk term ``t C1 B1 S (C1 B1)'``.
    """
    if t < 0 or s < 0:
        raise ValidationError(f"need t, s >= 0, got t={t}, s={s}")
    C1, C2 = np.asarray(cf.C1), np.asarray(cf.C2)
    B1, B2, A2 = np.asarray(cf.B1), np.asarray(cf.B2), np.asarray(cf.A2)
    S = np.asarray(cf.levy.sigma_L)
    d = cf.d

    out = np.zeros((d, d))
    if cf.n2:
        gamma0 = matops.lyapunov_solve(A2, B2 @ S @ B2.T)
        out += C2 @ gamma0 @ matops.expm(A2.T * s) @ C2.T
        G = B2 @ S @ (C1 @ B1).T
        if t > 0:
            out += C2 @ matops.cross_integral(A2, G, t)
            tail = matops.cross_integral(A2, G, t + s) - matops.cross_integral(A2, G, s)
            out += (C2 @ tail).T
    out += t * (C1 @ B1) @ S @ (C1 @ B1).T
    return out


def cov_sampled(sm: SampledModel, cf: CointCanonicalForm, n: int, s: int) -> np.ndarray:
    """``Cov(Y_n, Y_{n+s})`` of the sampled process: the continuous formula
    evaluated at ``t = n h``, lag ``s h``.
    """
    if n < 1 or s < 0:
        raise ValidationError(f"need n >= 1 and s >= 0, got n={n}, s={s}")
    return cov_continuous(cf, n * sm.h, s * sm.h)
