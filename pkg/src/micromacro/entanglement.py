"""Two-qubit entanglement metrics on the projected {0,1}x{0,1} block.

The projected matrix lives on the basis (|00>, |01>, |10>, |11>) with index
2*i_A + j_B, where i_A is the photon number in the spectator arm A and j_B
the photon number in arm B.  For the states produced by the amplify/
de-amplify pipeline the matrix is X-structured: populations on the diagonal,
one coherence pair d = <10|rho|01>, and one pair d' = <00|rho|11>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotAnXStateError

# Matrix positions allowed to be nonzero for an X-structured state.
X_POSITIONS = frozenset(
    {(0, 0), (1, 1), (2, 2), (3, 3), (1, 2), (2, 1), (0, 3), (3, 0)}
)

_SIGMA_YY = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class ProjectedDensityMatrix:
    """Unnormalized density matrix on the two-qubit photon-number block.

    ``matrix`` holds all sixteen positions so that the off-X residual can be
    audited; the named accessors read the X-structure fields.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"projected matrix must be 4x4, got {m.shape}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_xstate(cls, p00, p01, p10, p11, d=0.0, d_prime=0.0):
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = p00, p01, p10, p11
        m[2, 1], m[1, 2] = d, np.conj(d)
        m[0, 3], m[3, 0] = d_prime, np.conj(d_prime)
        return cls(m)

    @property
    def p00(self) -> float:
        return self.matrix[0, 0].real

    @property
    def p01(self) -> float:
        return self.matrix[1, 1].real

    @property
    def p10(self) -> float:
        return self.matrix[2, 2].real

    @property
    def p11(self) -> float:
        return self.matrix[3, 3].real

    @property
    def d(self) -> complex:
        """Coherence between |1>_A|0>_B and |0>_A|1>_B."""
        return complex(self.matrix[2, 1])

    @property
    def d_prime(self) -> complex:
        """Coherence between |0>_A|0>_B and |1>_A|1>_B."""
        return complex(self.matrix[0, 3])

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def off_x_max(self) -> float:
        """Largest magnitude outside the X positions (zero-structure audit)."""
        worst = 0.0
        for i in range(4):
            for j in range(4):
                if (i, j) not in X_POSITIONS:
                    worst = max(worst, abs(self.matrix[i, j]))
        return worst

    def normalized(self) -> "ProjectedDensityMatrix":
        t = self.trace
        if t <= 0.0:
            raise ValueError("cannot normalize a matrix with non-positive trace")
        return ProjectedDensityMatrix(self.matrix / t)

    def validate(self, eps: float = 1e-10) -> None:
        """Check trace range, Hermiticity, positivity and 2x2 block bounds."""
        t = self.trace
        if not (-eps <= t <= 1.0 + eps):
            raise ValueError(f"trace {t} outside [0, 1]")
        herm = np.abs(self.matrix - self.matrix.conj().T).max()
        if herm > eps:
            raise ValueError(f"matrix not Hermitian, residual {herm:.3e}")
        if t > eps:
            evals = np.linalg.eigvalsh(self.matrix / t)
            if evals.min() < -eps:
                raise ValueError(f"negative eigenvalue {evals.min():.3e}")
        if abs(self.d) ** 2 > self.p01 * self.p10 + eps:
            raise ValueError("|d|^2 exceeds p01*p10 block bound")
        if abs(self.d_prime) ** 2 > self.p00 * self.p11 + eps:
            raise ValueError("|d'|^2 exceeds p00*p11 block bound")


@dataclass(frozen=True)
class ConcurrenceResult:
    """Concurrence value with the attaining branch and the four lambda_i."""

    value: float
    branch: str  # "d", "d_prime", "zero", or "general"
    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        ev.flags.writeable = False
        object.__setattr__(self, "eigenvalues", ev)


def xstate_formula(p00, p01, p10, p11, d, d_prime):
    """Raw X-state concurrence arithmetic on the entries as given.

    Returns ``(value, branch)`` with
    value = max{0, 2(|d| - sqrt(p00 p11)), 2(|d'| - sqrt(p01 p10))}.
    No normalization and no positivity check is applied.
    """
    arg_d = 2.0 * (abs(d) - np.sqrt(max(p00, 0.0) * max(p11, 0.0)))
    arg_dp = 2.0 * (abs(d_prime) - np.sqrt(max(p01, 0.0) * max(p10, 0.0)))
    value = max(0.0, arg_d, arg_dp)
    if value == 0.0:
        branch = "zero"
    elif arg_d >= arg_dp:
        branch = "d"
    else:
        branch = "d_prime"
    return value, branch


def _xstate_lambdas(p00, p01, p10, p11, d, d_prime):
    lam = np.array(
        [
            abs(d) + np.sqrt(max(p01, 0.0) * max(p10, 0.0)),
            abs(abs(d) - np.sqrt(max(p01, 0.0) * max(p10, 0.0))),
            abs(d_prime) + np.sqrt(max(p00, 0.0) * max(p11, 0.0)),
            abs(abs(d_prime) - np.sqrt(max(p00, 0.0) * max(p11, 0.0))),
        ]
    )
    return np.sort(lam)[::-1]


def concurrence_xstate(
    rho: ProjectedDensityMatrix,
    normalize: bool = True,
    residual_tol: float = 1e-8,
) -> ConcurrenceResult:
    """X-state concurrence via the closed-form expression.

    The input must be X-structured (off-X residual below ``residual_tol``).
    With ``normalize=True`` (default) entries are divided by the trace first,
    which is the convention used for all pipeline outputs.
    """
    off = rho.off_x_max()
    if off >= residual_tol:
        raise NotAnXStateError(
            f"off-X residual {off:.3e} exceeds tolerance {residual_tol:.1e}"
        )
    p00, p01, p10, p11 = rho.p00, rho.p01, rho.p10, rho.p11
    d, dp = rho.d, rho.d_prime
    if normalize:
        t = rho.trace
        if t <= 0.0:
            raise ValueError("zero-trace matrix has no normalized concurrence")
        p00, p01, p10, p11 = p00 / t, p01 / t, p10 / t, p11 / t
        d, dp = d / t, dp / t
    value, branch = xstate_formula(p00, p01, p10, p11, d, dp)
    lam = _xstate_lambdas(p00, p01, p10, p11, d, dp)
    return ConcurrenceResult(value=value, branch=branch, eigenvalues=lam)


def concurrence_general(
    rho: ProjectedDensityMatrix,
    normalize: bool = True,
    positivity_tol: float = 1e-10,
) -> ConcurrenceResult:
    """Concurrence from the spin-flip eigenvalue construction.

    lambda_i are the decreasing square roots of the eigenvalues of
    rho * (sy (x) sy) rho^* (sy (x) sy); this equals the eigenvalues of
    sqrt(sqrt(rho) rho~ sqrt(rho)) but avoids matrix square roots.  Tiny
    negative eigenvalues (within ``positivity_tol``) are clamped to zero;
    larger violations raise.
    """
    m = np.array(rho.matrix, dtype=complex)
    t = np.trace(m).real
    if t <= 0.0:
        raise ValueError("zero-trace matrix has no concurrence")
    if normalize:
        m = m / t
    m = 0.5 * (m + m.conj().T)
    evals = np.linalg.eigvalsh(m)
    if evals.min() < -positivity_tol:
        raise ValueError(
            f"input not positive semidefinite: eigenvalue {evals.min():.3e}"
        )
    m_tilde = _SIGMA_YY @ m.conj() @ _SIGMA_YY
    mu = np.linalg.eigvals(m @ m_tilde)
    if np.abs(mu.imag).max() > 1e-8:
        raise ValueError("spin-flip product has non-real eigenvalues")
    mu = mu.real
    if mu.min() < -positivity_tol:
        raise ValueError(
            f"spin-flip product eigenvalue {mu.min():.3e} below tolerance"
        )
    lam = np.sort(np.sqrt(np.clip(mu, 0.0, None)))[::-1]
    value = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
    if rho.off_x_max() < 1e-8:
        p = rho.matrix
        scale = t if normalize else 1.0
        _, branch = xstate_formula(
            p[0, 0].real / scale,
            p[1, 1].real / scale,
            p[2, 2].real / scale,
            p[3, 3].real / scale,
            p[2, 1] / scale,
            p[0, 3] / scale,
        )
        if value == 0.0:
            branch = "zero"
    else:
        branch = "general"
    return ConcurrenceResult(value=value, branch=branch, eigenvalues=lam)


def success_probability(rho: ProjectedDensityMatrix) -> float:
    """Trace of the unnormalized projected matrix."""
    return rho.trace
