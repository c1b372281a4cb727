"""Truncated Fock-space engine for the amplified/attenuated mode.

One dynamical bosonic mode (arm B) is tracked on photon numbers 0..n_max,
entangled with a two-level spectator (arm A).  The module provides the
squeezed vacuum and squeezed single photon in closed form, a general squeeze
unitary exp(r (a^2 - a+^2)/2), binomial photon-loss Kraus channels, and the
branch bookkeeping needed to carry the mixed two-mode state through the
pipeline.

The squeeze generator couples only n <-> n+-2, so the even and odd photon
sectors decouple into antisymmetric tridiagonal chains.  exp(r A) is applied
exactly by diagonalizing each chain once (A = D^-1 (-i M) D with M real
symmetric tridiagonal and D = diag(i^j)), which is exactly norm-preserving
and reusable across all branch vectors of a run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .entanglement import ProjectedDensityMatrix
from .errors import TailToleranceError, TruncationError

DEFAULT_TAIL_TOL = 1e-10
N_MAX_CAP = 8192
PRUNE_THRESHOLD = 1e-14
NORM_EPS = 1e-12


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockAmplitudes:
    """Complex amplitudes over photon numbers 0..n_max of one mode."""

    amps: np.ndarray
    n_max: int

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex).copy()
        if a.ndim != 1:
            raise ValueError("amplitude vector must be one-dimensional")
        if len(a) != self.n_max + 1:
            raise ValueError(
                f"amplitude vector length {len(a)} does not match n_max={self.n_max}"
            )
        a.flags.writeable = False
        object.__setattr__(self, "amps", a)
        if self.norm_sq > 1.0 + NORM_EPS:
            raise ValueError(f"amplitudes over-normalized: |psi|^2 = {self.norm_sq}")

    @classmethod
    def from_array(cls, amps) -> "FockAmplitudes":
        amps = np.asarray(amps, dtype=complex)
        return cls(amps=amps, n_max=len(amps) - 1)

    @classmethod
    def fock(cls, n: int, n_max: int) -> "FockAmplitudes":
        """Number state |n> on a 0..n_max truncation."""
        if not 0 <= n <= n_max:
            raise ValueError(f"fock index {n} outside 0..{n_max}")
        a = np.zeros(n_max + 1, dtype=complex)
        a[n] = 1.0
        return cls(amps=a, n_max=n_max)

    @classmethod
    def vacuum(cls, n_max: int) -> "FockAmplitudes":
        return cls.fock(0, n_max)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def tail_mass(self, above: int) -> float:
        """Probability weight strictly above photon number ``above``."""
        return float(np.sum(np.abs(self.amps[above + 1 :]) ** 2))


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze strength r = chi*t and direction (+1 squeeze, -1 unsqueeze)."""

    r: float
    sign: int = +1

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeeze parameter r must be >= 0")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class LossChannelParams:
    """Transmission eta with Kraus-order and neglected-weight controls.

    ``k_max=None`` selects the smallest order whose neglected weight falls
    below ``tail_tol``.
    """

    eta: float
    k_max: int | None = None
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.k_max is not None and self.k_max < 0:
            raise ValueError("k_max must be >= 0")


@dataclass(frozen=True)
class EntangledBranch:
    """One pure branch |1>_A (x) u + |0>_A (x) v of the two-mode mixture.

    The ensemble represents rho = sum_k weight_k |b_k><b_k|; Kraus factors are
    folded into the (sub-normalized) vectors rather than the weights.
    """

    weight: float
    u: FockAmplitudes
    v: FockAmplitudes

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("branch weight must be nonnegative")
        if self.u.n_max != self.v.n_max:
            raise ValueError("u and v must share a truncation")

    @property
    def trace_contribution(self) -> float:
        return self.weight * (self.u.norm_sq + self.v.norm_sq)


# ---------------------------------------------------------------------------
# squeezed states in closed form
# ---------------------------------------------------------------------------


def _log_probs_squeezed_vacuum(r: float, k: np.ndarray) -> np.ndarray:
    # p_{2k} = (2k)! / (4^k (k!)^2) * tanh^{2k} r / cosh r
    lt = math.log(math.tanh(r))
    return (
        -math.log(math.cosh(r))
        + gammaln(2 * k + 1)
        - 2 * k * math.log(2.0)
        - 2 * gammaln(k + 1)
        + 2 * k * lt
    )


def _log_probs_squeezed_one(r: float, k: np.ndarray) -> np.ndarray:
    # p_{2k+1} = (2k+1)! / (4^k (k!)^2) * tanh^{2k} r / cosh^3 r
    lt = math.log(math.tanh(r))
    return (
        -3.0 * math.log(math.cosh(r))
        + gammaln(2 * k + 2)
        - 2 * k * math.log(2.0)
        - 2 * gammaln(k + 1)
        + 2 * k * lt
    )


def _log_suffix_tails(logp: np.ndarray, log_ratio_bound: float) -> np.ndarray:
    """log of sum_{j>k} p_j for each k, including a geometric remainder bound
    for the terms beyond the computed range (ratio bounded by exp(log_ratio_bound))."""
    if log_ratio_bound < 0.0:
        rest = logp[-1] + log_ratio_bound - math.log1p(-math.exp(log_ratio_bound))
    else:
        rest = math.inf  # cannot certify the remainder
    padded = np.concatenate([logp[1:], [rest]])
    return np.logaddexp.accumulate(padded[::-1])[::-1]


def choose_n_max(r: float, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest even truncation whose analytic tail mass is below ``tail_tol``.

    The bound covers both the squeezed vacuum and the squeezed single photon
    (the latter has the heavier tail); suffix sums run in log space so very
    small tolerances remain certifiable.  Raises TruncationError beyond the
    hard cap of 8192 photons.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    if r == 0.0:
        return 2
    k = np.arange(0, N_MAX_CAP // 2 + 1)
    log_q = 2.0 * math.log(math.tanh(r))
    log_tol = math.log(tail_tol)
    # term ratio: q for the vacuum family, q*(1 + 1/(2k+2)) for the one family
    top = k[-1]
    tails0 = _log_suffix_tails(_log_probs_squeezed_vacuum(r, k), log_q)
    tails1 = _log_suffix_tails(
        _log_probs_squeezed_one(r, k),
        log_q + math.log1p(1.0 / (2.0 * top + 2.0)),
    )
    ok = np.nonzero((tails0 < log_tol) & (tails1 < log_tol))[0]
    if len(ok) == 0:
        raise TruncationError(
            f"r={r}: tail below {tail_tol:.1e} needs more than {N_MAX_CAP} photons"
        )
    # index k keeps terms up to photon number 2k+1; round up to even
    return int(2 * ok[0] + 2)


def squeezed_vacuum(
    r: float, n_max: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL
) -> FockAmplitudes:
    """Squeezed vacuum S(r)|0>, even photon numbers only.

    amps[2k] = cosh(r)^(-1/2) * sqrt((2k)!)/(2^k k!) * (-tanh r)^k, computed
    in log space with sign tracking.  An explicit ``n_max`` that cannot hold
    the tail below ``tail_tol`` raises TruncationError.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if n_max is None:
        n_max = choose_n_max(r, tail_tol)
    amps = np.zeros(n_max + 1, dtype=complex)
    if r == 0.0:
        amps[0] = 1.0
        return FockAmplitudes(amps=amps, n_max=n_max)
    k = np.arange(0, n_max // 2 + 1)
    logp = _log_probs_squeezed_vacuum(r, k)
    tail = 1.0 - float(np.sum(np.exp(logp)))
    if tail > tail_tol:
        raise TruncationError(
            f"squeezed vacuum at r={r}: tail {tail:.3e} above n_max={n_max} "
            f"exceeds {tail_tol:.1e}"
        )
    amps[2 * k] = np.exp(0.5 * logp) * (-1.0) ** k
    return FockAmplitudes(amps=amps, n_max=n_max)


def squeezed_one(
    r: float, n_max: int | None = None, tail_tol: float = DEFAULT_TAIL_TOL
) -> FockAmplitudes:
    """Squeezed single photon S(r)|1>, odd photon numbers only.

    amps[2k+1] = cosh(r)^(-3/2) * sqrt((2k+1)!)/(2^k k!) * (-tanh r)^k.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if n_max is None:
        n_max = choose_n_max(r, tail_tol)
    amps = np.zeros(n_max + 1, dtype=complex)
    if r == 0.0:
        if n_max < 1:
            raise TruncationError("n_max must be >= 1 for the single photon")
        amps[1] = 1.0
        return FockAmplitudes(amps=amps, n_max=n_max)
    k = np.arange(0, (n_max - 1) // 2 + 1)
    logp = _log_probs_squeezed_one(r, k)
    tail = 1.0 - float(np.sum(np.exp(logp)))
    if tail > tail_tol:
        raise TruncationError(
            f"squeezed one at r={r}: tail {tail:.3e} above n_max={n_max} "
            f"exceeds {tail_tol:.1e}"
        )
    amps[2 * k + 1] = np.exp(0.5 * logp) * (-1.0) ** k
    return FockAmplitudes(amps=amps, n_max=n_max)


def mean_photon(state: FockAmplitudes) -> float:
    """<n> = sum_n n |amps[n]|^2."""
    n = np.arange(state.n_max + 1)
    return float(np.sum(n * state.probabilities()))


# ---------------------------------------------------------------------------
# squeeze unitary on the truncated space
# ---------------------------------------------------------------------------


class SqueezePropagator:
    """Applies exp(sign * r * (a^2 - a+^2)/2) to stacks of Fock vectors.

    The generator splits into even/odd parity chains; each chain is a real
    antisymmetric tridiagonal matrix T with T[j, j+1] = sqrt((n+1)(n+2))/2.
    With D = diag(i^j), D T D^-1 = -i M for a real symmetric tridiagonal M,
    so exp(r T) = D^-1 Q exp(-i r L) Q^T D from one eigh_tridiagonal call per
    parity.  The map is orthogonal on the truncated space, hence exactly
    norm-preserving; truncation shows up only as reflection near n_max.
    """

    def __init__(self, r: float, n_max: int):
        if r < 0:
            raise ValueError("r must be >= 0")
        if n_max > N_MAX_CAP:
            raise TruncationError(f"n_max={n_max} exceeds the cap {N_MAX_CAP}")
        self.r = float(r)
        self.n_max = int(n_max)
        self._sectors = []
        for parity in (0, 1):
            idx = np.arange(parity, n_max + 1, 2)
            if len(idx) < 2:
                self._sectors.append((idx, None, None, None))
                continue
            n = idx[:-1].astype(float)
            b = np.sqrt((n + 1.0) * (n + 2.0)) / 2.0
            evals, evecs = eigh_tridiagonal(np.zeros(len(idx)), b)
            phases = (1j) ** np.arange(len(idx))
            self._sectors.append((idx, evals, evecs, phases))

    def apply_columns(self, cols: np.ndarray, sign: int = +1) -> np.ndarray:
        """Propagate an (n_max+1, m) stack of column vectors."""
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        cols = np.asarray(cols, dtype=complex)
        squeeze_out = False
        if cols.ndim == 1:
            cols = cols[:, None]
            squeeze_out = True
        if cols.shape[0] != self.n_max + 1:
            raise ValueError("column length does not match the truncation")
        out = np.empty_like(cols)
        for idx, evals, evecs, phases in self._sectors:
            if evals is None:
                out[idx, :] = cols[idx, :]
                continue
            w = phases[:, None] * cols[idx, :]
            y = evecs.T @ w
            y *= np.exp(-1j * sign * self.r * evals)[:, None]
            out[idx, :] = np.conj(phases)[:, None] * (evecs @ y)
        return out[:, 0] if squeeze_out else out


@lru_cache(maxsize=8)
def get_propagator(r: float, n_max: int) -> SqueezePropagator:
    """Cached propagator; reused across branches and runs with equal (r, n_max)."""
    return SqueezePropagator(r, n_max)


#: working-space boundary mass kept below this, so per-amplitude truncation
#: error stays under ~1e-9
_BOUNDARY_MASS_TOL = 1e-18


def apply_squeeze(
    state: FockAmplitudes,
    params: SqueezeParams,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> FockAmplitudes:
    """Unitary image of ``state`` under the squeeze (sign=+1) or its inverse.

    The propagation runs on an internally padded space, grown until the
    boundary weight is negligible, then the result is cropped back to the
    input truncation.  Probability that genuinely leaked past n_max beyond
    ``tail_tol`` raises TruncationError.
    """
    if params.r == 0.0:
        return state
    nz = np.nonzero(np.abs(state.amps) > 0)[0]
    n_top = int(nz[-1]) if len(nz) else 0
    working = max(
        state.n_max,
        choose_n_max(params.r, _BOUNDARY_MASS_TOL),
        int(1.5 * n_top * math.cosh(2.0 * params.r)) + 64,
    )
    working = min(working + working % 2, N_MAX_CAP)
    while True:
        padded = np.zeros(working + 1, dtype=complex)
        padded[: state.n_max + 1] = state.amps
        out = get_propagator(params.r, working).apply_columns(
            padded, sign=params.sign
        )
        boundary = float(np.sum(np.abs(out[-4:]) ** 2))
        if boundary <= _BOUNDARY_MASS_TOL:
            break
        if working >= N_MAX_CAP:
            raise TruncationError(
                f"squeeze at r={params.r}: boundary weight {boundary:.3e} "
                f"persists at the {N_MAX_CAP}-photon cap"
            )
        working = min(2 * working, N_MAX_CAP)
    leak = float(np.sum(np.abs(out[state.n_max + 1 :]) ** 2))
    if leak > tail_tol:
        raise TruncationError(
            f"squeeze at r={params.r}: {leak:.3e} probability leaks past "
            f"n_max={state.n_max}, above {tail_tol:.1e}"
        )
    return FockAmplitudes(amps=out[: state.n_max + 1], n_max=state.n_max)


# ---------------------------------------------------------------------------
# photon loss channel
# ---------------------------------------------------------------------------


def kraus_factors(n_max: int, k: int, eta: float) -> np.ndarray:
    """Diagonal factors of E_k: (E_k psi)[n-k] = factors[n] * psi[n].

    factors[n] = sqrt(C(n, k) eta^(n-k) (1-eta)^k) for n >= k, else 0.
    """
    f = np.zeros(n_max + 1)
    if k > n_max:
        return f
    n = np.arange(k, n_max + 1, dtype=float)
    if eta == 0.0:
        f[k] = 1.0  # E_k = |0><k|
        return f
    if eta == 1.0:
        if k == 0:
            f[:] = 1.0
        return f
    log_c = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    log_w = 0.5 * (log_c + (n - k) * math.log(eta) + k * math.log1p(-eta))
    f[k:] = np.exp(log_w)
    return f


def _apply_kraus(amps: np.ndarray, factors: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(amps)
    if k <= len(amps) - 1:
        out[: len(amps) - k] = factors[k:] * amps[k:]
    return out


def loss_on_branch(
    branch: EntangledBranch, params: LossChannelParams
) -> list[EntangledBranch]:
    """Expand one branch through the binomial loss channel on mode B.

    Returns branches k = 0..k_max with u_k = E_k u, v_k = E_k v.  With
    ``k_max=None`` the order grows until the neglected trace falls below
    ``tail_tol``; an explicit ``k_max`` that cannot reach the tolerance
    raises TailToleranceError.
    """
    eta = params.eta
    n_max = branch.u.n_max
    in_trace = branch.trace_contribution
    if eta == 1.0:
        return [branch]

    support = 0
    nz = np.nonzero((np.abs(branch.u.amps) > 0) | (np.abs(branch.v.amps) > 0))[0]
    if len(nz):
        support = int(nz[-1])
    hard_cap = support  # E_k annihilates everything for k > top photon number

    cap = hard_cap if params.k_max is None else min(params.k_max, hard_cap)
    out = []
    cum = 0.0
    for k in range(cap + 1):
        f = kraus_factors(n_max, k, eta)
        u_k = _apply_kraus(branch.u.amps, f, k)
        v_k = _apply_kraus(branch.v.amps, f, k)
        w = branch.weight * (np.vdot(u_k, u_k).real + np.vdot(v_k, v_k).real)
        cum += w
        out.append(
            EntangledBranch(
                weight=branch.weight,
                u=FockAmplitudes(amps=u_k, n_max=n_max),
                v=FockAmplitudes(amps=v_k, n_max=n_max),
            )
        )
        if params.k_max is None and in_trace - cum < params.tail_tol:
            break
    deficit = in_trace - cum
    # k up to the full support captures the channel exactly; any residual
    # deficit there is roundoff
    if cap < hard_cap and deficit > params.tail_tol:
        raise TailToleranceError(
            f"loss eta={eta}: neglected weight {deficit:.3e} above "
            f"{params.tail_tol:.1e} with k_max={cap}"
        )
    return out


def loss_on_spectator(branch: EntangledBranch, eta: float) -> list[EntangledBranch]:
    """Loss on the two-level arm A: |1>_A decays to |0>_A with weight 1-eta."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if eta == 1.0:
        return [branch]
    kept = EntangledBranch(
        weight=branch.weight,
        u=FockAmplitudes.from_array(math.sqrt(eta) * branch.u.amps),
        v=branch.v,
    )
    zeros = np.zeros(branch.u.n_max + 1, dtype=complex)
    dropped = EntangledBranch(
        weight=branch.weight,
        u=FockAmplitudes(amps=zeros, n_max=branch.u.n_max),
        v=FockAmplitudes.from_array(math.sqrt(1.0 - eta) * branch.u.amps),
    )
    return [kept, dropped]


def prune_branches(
    branches: list[EntangledBranch], threshold: float = PRUNE_THRESHOLD
) -> tuple[list[EntangledBranch], float]:
    """Drop branches below ``threshold`` trace contribution; report the mass."""
    kept, dropped = [], 0.0
    for b in branches:
        if b.trace_contribution < threshold:
            dropped += b.trace_contribution
        else:
            kept.append(b)
    return kept, dropped


# ---------------------------------------------------------------------------
# projection onto the {0,1} x {0,1} block
# ---------------------------------------------------------------------------


def branches_to_projected(branches: list[EntangledBranch]) -> ProjectedDensityMatrix:
    """Accumulate the unnormalized 4x4 block from the branch ensemble.

    For |b> = |1>_A u + |0>_A v the block coefficients in basis order
    (|00>, |01>, |10>, |11>) are (v[0], v[1], u[0], u[1]); the matrix is the
    weight-summed outer product, so d = sum_k w_k u_k[0] v_k[1]^* lands at
    position [2, 1].  Summation follows the input order, so results are
    bit-stable for a given ensemble.
    """
    m = np.zeros((4, 4), dtype=complex)
    for b in branches:
        c = np.array([b.v.amps[0], b.v.amps[1], b.u.amps[0], b.u.amps[1]])
        m += b.weight * np.outer(c, c.conj())
    return ProjectedDensityMatrix(m)


def project_through_loss(
    branches: list[EntangledBranch], eta: float
) -> ProjectedDensityMatrix:
    """Projected block after a trailing loss channel, without branch expansion.

    Only photon numbers 0 and 1 of each Kraus image survive the projection,
    so the k-sum collapses to closed form:
    (E_k w)[0] = (1-eta)^(k/2) w[k] and
    (E_k w)[1] = sqrt(eta (k+1)) (1-eta)^(k/2) w[k+1].
    Algebraically identical to loss_on_branch followed by
    branches_to_projected, summed over all Kraus orders.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    m = np.zeros((4, 4), dtype=complex)
    for b in branches:
        n_max = b.u.n_max
        k = np.arange(n_max + 1, dtype=float)
        half = np.power(1.0 - eta, k / 2.0)
        t1 = np.sqrt(eta * (k[:-1] + 1.0)) * half[:-1] if n_max >= 1 else half[:0]
        # rows in basis order (0,0), (0,1), (1,0), (1,1) = (i_A, j_B)
        rows = np.zeros((4, n_max + 1), dtype=complex)
        rows[0, :] = half * b.v.amps
        rows[1, : n_max] = t1 * b.v.amps[1:]
        rows[2, :] = half * b.u.amps
        rows[3, : n_max] = t1 * b.u.amps[1:]
        m += b.weight * (rows @ rows.conj().T)
    return ProjectedDensityMatrix(m)
