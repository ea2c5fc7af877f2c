"""Domain types: Levy driver specifications, raw state-space triples,
MCARMA coefficient sets and the decoupled canonical form.

All types are immutable after validated construction (arrays are copied and
marked read-only), so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matops
from .errors import DimensionError, ValidationError

LEVY_KINDS = (
    "brownian",
    "compound_poisson_gaussian_jumps",
    "brownian_plus_compound_poisson",
)

#: Orthonormality tolerance for the canonical C1 block.
C1_ORTHO_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class LevySpec:
    """Square-integrable, mean-zero Levy driver with nonsingular covariance.

    ``sigma_L`` is the covariance of the unit-time increment. For the
    compound-Poisson kinds the jumps are mean-zero Gaussian with covariance
    ``jump_cov`` arriving at rate ``jump_rate``; any leftover
    ``sigma_L - jump_rate * jump_cov`` is the covariance of an independent
    Brownian component and must be PSD (zero for the pure-jump kind).
    """

    kind: str
    sigma_L: np.ndarray
    jump_rate: float = 0.0
    jump_cov: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in LEVY_KINDS:
            raise ValidationError(f"unknown Levy kind {self.kind!r}, expected one of {LEVY_KINDS}")
        sig = matops.as_square(self.sigma_L, "sigma_L")
        object.__setattr__(self, "sigma_L", _frozen(sig))
        if self.jump_rate < 0:
            raise ValidationError(f"jump_rate must be >= 0, got {self.jump_rate}")
        if self.jump_cov is not None:
            jc = matops.as_square(self.jump_cov, "jump_cov")
            if jc.shape != sig.shape:
                raise DimensionError(
                    f"jump_cov has shape {jc.shape}, expected {sig.shape}"
                )
            object.__setattr__(self, "jump_cov", _frozen(jc))
        if self.kind == "brownian" and (self.jump_rate != 0 or self.jump_cov is not None):
            raise ValidationError("brownian driver takes no jump parameters")
        if self.kind != "brownian" and self.jump_cov is None:
            raise ValidationError(f"{self.kind} driver requires jump_cov")

    @property
    def m(self) -> int:
        return self.sigma_L.shape[0]

    @property
    def diffusion_cov(self) -> np.ndarray:
        """Covariance of the Brownian component implied by the decomposition."""
        if self.kind == "brownian":
            return np.array(self.sigma_L)
        return self.sigma_L - self.jump_rate * self.jump_cov


@dataclass(frozen=True)
class LevyValidationReport:
    ok: bool
    failures: tuple[str, ...]


def validate_levy(spec: LevySpec, tol: float = 1e-10) -> LevyValidationReport:
    """Check the standing assumptions on the driver, clause by clause.

    Passes iff ``sigma_L`` is symmetric with strictly positive smallest
    eigenvalue and the kind-specific covariance decomposition is coherent.
    Failures are collected rather than raised so callers can report them all.
    """
    failures: list[str] = []
    sig = np.asarray(spec.sigma_L, dtype=float)
    scale = 1.0 + np.linalg.norm(sig)
    if np.linalg.norm(sig - sig.T) > tol * scale:
        failures.append("sigma_L is not symmetric")
    else:
        min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (sig + sig.T))))
        if min_eig <= tol * scale:
            failures.append(
                f"sigma_L is singular or not positive definite (min eigenvalue {min_eig:.3e})"
            )
    if spec.kind != "brownian":
        jc = np.asarray(spec.jump_cov, dtype=float)
        if np.linalg.norm(jc - jc.T) > tol * (1.0 + np.linalg.norm(jc)):
            failures.append("jump_cov is not symmetric")
        elif np.min(np.linalg.eigvalsh(0.5 * (jc + jc.T))) < -tol * (1.0 + np.linalg.norm(jc)):
            failures.append("jump_cov is not positive semidefinite")
        diff = spec.diffusion_cov
        if spec.kind == "compound_poisson_gaussian_jumps":
            if np.linalg.norm(diff) > 1e-8 * scale:
                failures.append(
                    "sigma_L != jump_rate * jump_cov for the pure-jump driver"
                )
        else:
            dmin = float(np.min(np.linalg.eigvalsh(0.5 * (diff + diff.T))))
            if dmin < -1e-8 * scale:
                failures.append(
                    "sigma_L - jump_rate * jump_cov is not PSD, no Brownian component fits"
                )
    return LevyValidationReport(ok=not failures, failures=tuple(failures))


def _require_valid_levy(levy: LevySpec):
    report = validate_levy(levy)
    if not report.ok:
        raise ValidationError("invalid Levy driver: " + "; ".join(report.failures))


@dataclass(frozen=True)
class StateSpaceModel:
    """Raw continuous-time linear state-space triple driven by a Levy process.

    State equation ``dX = A X dt + B dL`` with observation ``Y = C X``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    levy: LevySpec

    def __post_init__(self):
        A = matops.as_square(self.A, "A")
        B = matops.as_matrix(self.B, "B")
        C = matops.as_matrix(self.C, "C")
        N = A.shape[0]
        if B.shape != (N, self.levy.m):
            raise DimensionError(
                f"B has shape {B.shape}, expected ({N}, {self.levy.m})"
            )
        if C.shape[1] != N:
            raise DimensionError(f"C has {C.shape[1]} columns, expected {N}")
        if C.shape[0] > N:
            raise DimensionError(
                f"observation dimension d={C.shape[0]} exceeds state dimension N={N}"
            )
        _require_valid_levy(self.levy)
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "B", _frozen(B))
        object.__setattr__(self, "C", _frozen(C))

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.levy.m


@dataclass(frozen=True)
class McarmaModel:
    """MCARMA(p, q) coefficient set: monic AR polynomial
    ``P(z) = I z^p + P_1 z^{p-1} + ... + P_p`` and MA polynomial
    ``Q(z) = Q_0 z^q + ... + Q_q``, with ``p > q >= 0``.
    """

    p_coeffs: tuple[np.ndarray, ...]  # P_1 .. P_p
    q_coeffs: tuple[np.ndarray, ...]  # Q_0 .. Q_q
    levy: LevySpec

    def __post_init__(self):
        P = tuple(matops.as_square(Pi, f"P_{i+1}") for i, Pi in enumerate(self.p_coeffs))
        if not P:
            raise ValidationError("autoregressive order p must be at least 1")
        d = P[0].shape[0]
        for i, Pi in enumerate(P):
            if Pi.shape != (d, d):
                raise DimensionError(f"P_{i+1} has shape {Pi.shape}, expected ({d}, {d})")
        Q = tuple(matops.as_matrix(Qi, f"Q_{i}") for i, Qi in enumerate(self.q_coeffs))
        if not Q:
            raise ValidationError("need at least the moving-average coefficient Q_0")
        for i, Qi in enumerate(Q):
            if Qi.shape != (d, self.levy.m):
                raise DimensionError(
                    f"Q_{i} has shape {Qi.shape}, expected ({d}, {self.levy.m})"
                )
        if len(Q) - 1 >= len(P):
            raise ValidationError(
                f"orders must satisfy p > q, got p={len(P)}, q={len(Q) - 1}"
            )
        _require_valid_levy(self.levy)
        object.__setattr__(self, "p_coeffs", tuple(_frozen(Pi) for Pi in P))
        object.__setattr__(self, "q_coeffs", tuple(_frozen(Qi) for Qi in Q))

    @property
    def p(self) -> int:
        return len(self.p_coeffs)

    @property
    def q(self) -> int:
        return len(self.q_coeffs) - 1

    @property
    def d(self) -> int:
        return self.p_coeffs[0].shape[0]

    @property
    def m(self) -> int:
        return self.levy.m

    def ar_poly(self) -> list[np.ndarray]:
        """Coefficients of P(z) for z^p .. z^0, including the leading identity."""
        return [np.eye(self.d)] + [np.array(Pi) for Pi in self.p_coeffs]


def _check_plt(C1: np.ndarray, tol: float) -> None:
    """Positive lower triangular in the column sense: in every column the
    first nonzero entry is positive, pivots strictly increase across columns.
    """
    d, c = C1.shape
    prev = -1
    for j in range(c):
        col = C1[:, j]
        nz = np.nonzero(np.abs(col) > tol)[0]
        if nz.size == 0:
            raise ValidationError(f"column {j} of C1 is numerically zero")
        piv = int(nz[0])
        if piv <= prev:
            raise ValidationError(
                "C1 is not positive lower triangular: pivot rows do not increase"
            )
        if col[piv] <= 0:
            raise ValidationError(
                f"C1 is not positive lower triangular: leading entry of column {j} is negative"
            )
        prev = piv


@dataclass(frozen=True)
class CointCanonicalForm:
    """Decoupled canonical form: a c-dimensional pure unit-root block and a
    stable stationary block.

    ``dX1 = B1 dL`` and ``dX2 = A2 X2 dt + B2 dL`` with observation
    ``Y = C1 X1 + C2 X2``; ``C1`` has orthonormal columns in positive lower
    triangular form and ``A2`` is Hurwitz. ``c = 0`` is permitted as the
    stationary degenerate case.
    """

    c: int
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    levy: LevySpec
    plt_tol: float = field(default=1e-8, repr=False)

    def __post_init__(self):
        A2 = matops.as_square(self.A2, "A2")
        B1 = matops.as_matrix(self.B1, "B1")
        B2 = matops.as_matrix(self.B2, "B2")
        C1 = matops.as_matrix(self.C1, "C1")
        C2 = matops.as_matrix(self.C2, "C2")
        c, m = self.c, self.levy.m
        n2 = A2.shape[0]
        if c < 0:
            raise ValidationError(f"unit-root block size c must be >= 0, got {c}")
        if B1.shape != (c, m):
            raise DimensionError(f"B1 has shape {B1.shape}, expected ({c}, {m})")
        if B2.shape != (n2, m):
            raise DimensionError(f"B2 has shape {B2.shape}, expected ({n2}, {m})")
        d = C1.shape[0]
        if C1.shape != (d, c):
            raise DimensionError(f"C1 has shape {C1.shape}, expected ({d}, {c})")
        if C2.shape != (d, n2):
            raise DimensionError(f"C2 has shape {C2.shape}, expected ({d}, {n2})")
        if c >= d and c > 0:
            raise ValidationError(
                f"a cointegrated model needs c < d, got c={c}, d={d}"
            )
        if d > c + n2:
            raise DimensionError(
                f"observation dimension d={d} exceeds state dimension N={c + n2}"
            )
        _require_valid_levy(self.levy)
        if c > 0:
            gram = C1.T @ C1
            if np.linalg.norm(gram - np.eye(c)) > C1_ORTHO_TOL * (1.0 + c):
                raise ValidationError("C1 does not have orthonormal columns")
            _check_plt(C1, self.plt_tol)
            if matops.numerical_rank(B1).rank != c:
                raise ValidationError(f"B1 must have full row rank {c}")
        if n2 > 0 and matops.spectral_abscissa(A2) >= -matops.HURWITZ_TOL:
            raise ValidationError(
                "A2 is not Hurwitz: eigenvalues must have strictly negative real part"
            )
        object.__setattr__(self, "A2", _frozen(A2))
        object.__setattr__(self, "B1", _frozen(B1))
        object.__setattr__(self, "B2", _frozen(B2))
        object.__setattr__(self, "C1", _frozen(C1))
        object.__setattr__(self, "C2", _frozen(C2))

    @property
    def N(self) -> int:
        return self.c + self.A2.shape[0]

    @property
    def d(self) -> int:
        return self.C1.shape[0]

    @property
    def m(self) -> int:
        return self.levy.m

    @property
    def n2(self) -> int:
        return self.A2.shape[0]

    def full_B(self) -> np.ndarray:
        return np.vstack([self.B1, self.B2])

    def full_C(self) -> np.ndarray:
        return np.hstack([self.C1, self.C2])


def assemble_from_canonical(cf: CointCanonicalForm) -> StateSpaceModel:
    """Stack the canonical blocks back into a raw (A, B, C) triple:
    ``A = diag(0_c, A2)``, ``B = (B1; B2)``, ``C = (C1 C2)``.
    """
    N = cf.N
    A = np.zeros((N, N))
    A[cf.c:, cf.c:] = cf.A2
    return StateSpaceModel(A=A, B=cf.full_B(), C=cf.full_C(), levy=cf.levy)
