"""Composition of the full amplify/de-amplify experiment.

A run takes the beam-splitter input state through transmission eta1, the
squeezer, transmission eta, the inverse squeezer, transmission eta2 and the
projection onto the {0,1}x{0,1} photon block, in either the truncated Fock
engine, the closed-form phase-space engine, or both (cross-validated).
Losses act on arm B; optionally the detection loss eta2 is mirrored onto the
spectator arm A.

All runs are pure functions of the configuration, so sweeps parallelize
trivially and results are bit-stable for a given config on a given machine.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import fock as fk
from . import wigner as wg
from .entanglement import (
    ConcurrenceResult,
    ProjectedDensityMatrix,
    concurrence_xstate,
    success_probability,
)

ENGINES = ("auto", "fock", "phase_space", "both")

#: mean photon number (n0+n1)/2 above which the auto engine picks phase_space
AUTO_ENGINE_N_SWITCH = 30.0

MIN_TARGET_N = 0.5


def solve_r_for_n(target_n: float) -> float:
    """Invert n = (n0+n1)/2 = 2 sinh^2(r) + 1/2 for the squeeze parameter.

    The map has minimum value 1/2 at r=0; smaller targets raise ValueError.
    """
    if target_n < MIN_TARGET_N:
        raise ValueError(
            f"target mean photon number {target_n} below the minimum {MIN_TARGET_N}"
        )
    return math.asinh(math.sqrt((target_n - 0.5) / 2.0))


def amplified_mean_photons(r: float) -> tuple[float, float, float]:
    """(n0, n1, n) = (sinh^2 r, 1 + 3 sinh^2 r, their mean) at squeeze r."""
    s2 = math.sinh(r) ** 2
    return s2, 1.0 + 3.0 * s2, 2.0 * s2 + 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment point: squeeze strength, the three losses, and knobs.

    Exactly one of ``r`` / ``target_n`` must be set.  ``engine='auto'``
    resolves to phase_space above n = 30 and fock below; 'both' runs the two
    engines and records their elementwise disagreement.  ``seed`` only feeds
    the tomography sampler.
    """

    r: float | None = None
    target_n: float | None = None
    eta1: float = 1.0
    eta: float = 1.0
    eta2: float = 1.0
    engine: str = "auto"
    loss_on_a: bool = False
    tail_tol: float = fk.DEFAULT_TAIL_TOL
    seed: int = 0

    def validate(self) -> None:
        if (self.r is None) == (self.target_n is None):
            raise ValueError("exactly one of r / target_n must be set")
        if self.r is not None and self.r < 0:
            raise ValueError("r must be >= 0")
        if self.target_n is not None and self.target_n < MIN_TARGET_N:
            raise ValueError(f"target_n must be >= {MIN_TARGET_N}")
        for name in ("eta1", "eta", "eta2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.tail_tol <= 0:
            raise ValueError("tail_tol must be positive")

    def resolved_r(self) -> float:
        self.validate()
        return self.r if self.r is not None else solve_r_for_n(self.target_n)

    def resolved_engine(self) -> str:
        if self.engine != "auto":
            return self.engine
        _, _, n = amplified_mean_photons(self.resolved_r())
        return "phase_space" if n > AUTO_ENGINE_N_SWITCH else "fock"


@dataclass
class EngineDiagnostics:
    """Numerical bookkeeping of one run."""

    n_max: int | None = None
    kraus_orders: tuple[int, ...] = ()
    neglected_mass: float = 0.0
    dropped_mass: float = 0.0
    support_bound: int | None = None
    branch_count: int | None = None
    disagreement: float | None = None
    fock_matrix: np.ndarray | None = None
    phase_space_matrix: np.ndarray | None = None


@dataclass
class ExperimentResult:
    """Projected matrix, metrics, closed-form photon numbers, diagnostics."""

    config: ExperimentConfig
    rho_p: ProjectedDensityMatrix
    concurrence: ConcurrenceResult
    success_prob: float
    n0: float
    n1: float
    n: float
    engine: str
    diagnostics: EngineDiagnostics
    wall_time: float = 0.0
    final_branches: list[fk.EntangledBranch] | None = None
    final_wigner: wg.GaussianPolyWigner | None = None


def _initial_branches(eta1: float, n_max: int) -> list[fk.EntangledBranch]:
    """Beam-splitter input after eta1 on arm B, worked out on the qubit.

    The only B content is |0> and |1>, so the loss has two exact branches:
    the photon survives (amplitude sqrt(eta1)) or decays to vacuum.
    """
    half = 1.0 / math.sqrt(2.0)
    u = np.zeros(n_max + 1, dtype=complex)
    v = np.zeros(n_max + 1, dtype=complex)
    u[0] = half
    v[1] = half * math.sqrt(eta1)
    branches = [
        fk.EntangledBranch(
            weight=1.0,
            u=fk.FockAmplitudes(amps=u, n_max=n_max),
            v=fk.FockAmplitudes(amps=v, n_max=n_max),
        )
    ]
    if eta1 < 1.0:
        v2 = np.zeros(n_max + 1, dtype=complex)
        v2[0] = half * math.sqrt(1.0 - eta1)
        zeros = np.zeros(n_max + 1, dtype=complex)
        branches.append(
            fk.EntangledBranch(
                weight=1.0,
                u=fk.FockAmplitudes(amps=zeros, n_max=n_max),
                v=fk.FockAmplitudes(amps=v2, n_max=n_max),
            )
        )
    return branches


def _squeeze_branches(
    branches: list[fk.EntangledBranch], prop: fk.SqueezePropagator, sign: int
) -> list[fk.EntangledBranch]:
    """Batch all branch vectors through one propagator call."""
    cols = []
    index = []  # (branch index, 'u'|'v')
    for i, b in enumerate(branches):
        for name, vec in (("u", b.u), ("v", b.v)):
            if vec.norm_sq > 0.0:
                cols.append(vec.amps)
                index.append((i, name))
    if not cols:
        return branches
    stacked = np.stack(cols, axis=1)
    moved = prop.apply_columns(stacked, sign=sign)
    parts = {}
    for j, key in enumerate(index):
        parts[key] = moved[:, j]
    out = []
    n_max = branches[0].u.n_max
    zeros = np.zeros(n_max + 1, dtype=complex)
    for i, b in enumerate(branches):
        u = parts.get((i, "u"), zeros)
        v = parts.get((i, "v"), zeros)
        out.append(
            fk.EntangledBranch(
                weight=b.weight,
                u=fk.FockAmplitudes(amps=u, n_max=n_max),
                v=fk.FockAmplitudes(amps=v, n_max=n_max),
            )
        )
    return out


def _crop_branches(
    branches: list[fk.EntangledBranch], mass_tol: float
) -> tuple[list[fk.EntangledBranch], int]:
    """Shrink the shared truncation to the occupied support."""
    n_max = branches[0].u.n_max
    mass = np.zeros(n_max + 1)
    for b in branches:
        mass += b.weight * (np.abs(b.u.amps) ** 2 + np.abs(b.v.amps) ** 2)
    suffix = np.cumsum(mass[::-1])[::-1]
    keep = n_max
    idx = np.nonzero(suffix > mass_tol)[0]
    keep = int(idx[-1]) if len(idx) else 1
    keep = max(keep, 3)
    if keep >= n_max:
        return branches, n_max
    out = [
        fk.EntangledBranch(
            weight=b.weight,
            u=fk.FockAmplitudes(amps=b.u.amps[: keep + 1], n_max=keep),
            v=fk.FockAmplitudes(amps=b.v.amps[: keep + 1], n_max=keep),
        )
        for b in branches
    ]
    return out, keep


def _attenuate_spectator_block(matrix: np.ndarray, eta: float) -> np.ndarray:
    """Loss channel on the two-level arm A applied to the projected block.

    Arm A never leaves {0,1}, so the block transforms within itself:
    amplitudes with one A photon scale by sqrt(eta) per side and the decayed
    population lands in the zero-A sector.
    """
    scale = np.array([1.0, 1.0, math.sqrt(eta), math.sqrt(eta)])
    out = matrix * np.outer(scale, scale)
    out[0:2, 0:2] += (1.0 - eta) * matrix[2:4, 2:4]
    return out


def _run_fock(
    cfg: ExperimentConfig, keep_state: bool
) -> tuple[ProjectedDensityMatrix, EngineDiagnostics, list[fk.EntangledBranch] | None]:
    r = cfg.resolved_r()
    diag = EngineDiagnostics()
    # a kept state feeds amplitude-linear quantities (homodyne densities), so
    # its truncation bound must hold amplitudes to ~1e-8, not just mass
    trunc_tol = min(cfg.tail_tol, 1e-17) if keep_state else cfg.tail_tol
    n_max = max(fk.choose_n_max(r, trunc_tol), 2)
    diag.n_max = n_max
    branches = _initial_branches(cfg.eta1, n_max)
    if r > 0.0:
        prop = fk.get_propagator(r, n_max)
        branches = _squeeze_branches(branches, prop, sign=+1)
    if cfg.eta < 1.0:
        total = sum(b.trace_contribution for b in branches)
        expanded = []
        orders = []
        for b in branches:
            share = b.trace_contribution / total if total > 0 else 1.0
            params = fk.LossChannelParams(
                eta=cfg.eta, tail_tol=max(cfg.tail_tol * share, 1e-300)
            )
            ks = fk.loss_on_branch(b, params)
            orders.append(len(ks) - 1)
            expanded.extend(ks)
        diag.kraus_orders = tuple(orders)
        out_trace = sum(b.trace_contribution for b in expanded)
        diag.neglected_mass = max(total - out_trace, 0.0)
        branches, dropped = fk.prune_branches(expanded)
        diag.dropped_mass = dropped
    if r > 0.0:
        branches = _squeeze_branches(branches, prop, sign=-1)
    # crop at amplitude ~1e-9 so quantities linear in the amplitudes
    # (e.g. homodyne densities from the kept state) stay good to ~1e-8
    branches, bound = _crop_branches(branches, min(cfg.tail_tol * 1e-2, 1e-18))
    diag.support_bound = bound
    diag.branch_count = len(branches)

    final_branches = None
    if keep_state:
        if cfg.eta2 < 1.0:
            total = sum(b.trace_contribution for b in branches)
            expanded = []
            for b in branches:
                share = b.trace_contribution / total if total > 0 else 1.0
                params = fk.LossChannelParams(
                    eta=cfg.eta2, tail_tol=max(cfg.tail_tol * share, 1e-300)
                )
                expanded.extend(fk.loss_on_branch(b, params))
            branches_out, dropped = fk.prune_branches(expanded)
            diag.dropped_mass += dropped
        else:
            branches_out = branches
        if cfg.loss_on_a:
            with_a = []
            for b in branches_out:
                with_a.extend(fk.loss_on_spectator(b, cfg.eta2))
            branches_out, dropped = fk.prune_branches(with_a)
            diag.dropped_mass += dropped
        final_branches = branches_out
        rho = fk.branches_to_projected(final_branches)
    else:
        rho = fk.project_through_loss(branches, cfg.eta2)
        if cfg.loss_on_a:
            rho = ProjectedDensityMatrix(
                _attenuate_spectator_block(np.array(rho.matrix), cfg.eta2)
            )
    return rho, diag, final_branches


def _run_phase_space(
    cfg: ExperimentConfig,
) -> tuple[ProjectedDensityMatrix, wg.GaussianPolyWigner]:
    r = cfg.resolved_r()
    W = wg.initial_wigner()
    if cfg.eta1 < 1.0:
        W = wg.loss_convolve(W, cfg.eta1, mode="B")
    if r > 0.0:
        W = wg.squeeze_rescale(W, r, sign=+1)
    if cfg.eta < 1.0:
        W = wg.loss_convolve(W, cfg.eta, mode="B")
    if r > 0.0:
        W = wg.squeeze_rescale(W, r, sign=-1)
    if cfg.eta2 < 1.0:
        W = wg.loss_convolve(W, cfg.eta2, mode="B")
    if cfg.loss_on_a and cfg.eta2 < 1.0:
        W = wg.loss_convolve(W, cfg.eta2, mode="A")
    return wg.extract_projected(W), W


def run(config: ExperimentConfig, keep_state: bool = False) -> ExperimentResult:
    """Execute one experiment point in the configured engine(s).

    With ``keep_state=True`` the Fock route also returns the final branch
    ensemble (used by the tomography sampler) and the phase-space route the
    final Wigner function.
    """
    config.validate()
    t0 = time.perf_counter()
    r = config.resolved_r()
    engine = config.resolved_engine()
    diag = EngineDiagnostics()
    final_branches = None
    final_wigner = None

    if engine in ("fock", "both"):
        rho_fock, diag, final_branches = _run_fock(config, keep_state)
        diag.fock_matrix = np.array(rho_fock.matrix)
    if engine in ("phase_space", "both"):
        rho_ps, W = _run_phase_space(config)
        if keep_state:
            final_wigner = W
        diag.phase_space_matrix = np.array(rho_ps.matrix)

    if engine == "fock":
        rho_p = rho_fock
    elif engine == "phase_space":
        rho_p = rho_ps
    else:
        diag.disagreement = float(
            np.abs(rho_fock.matrix - rho_ps.matrix).max()
        )
        rho_p = rho_ps  # closed form carries no truncation error

    conc = concurrence_xstate(rho_p)
    n0, n1, n = amplified_mean_photons(r)
    return ExperimentResult(
        config=config,
        rho_p=rho_p,
        concurrence=conc,
        success_prob=success_probability(rho_p),
        n0=n0,
        n1=n1,
        n=n,
        engine=engine,
        diagnostics=diag,
        wall_time=time.perf_counter() - t0,
        final_branches=final_branches,
        final_wigner=final_wigner,
    )


SWEEP_AXES = ("n", "eta", "eta12")


@dataclass
class SweepEntry:
    """One sweep row: the axis value plus either a result or an error string."""

    value: float
    result: ExperimentResult | None = None
    error: str | None = None


def _config_at(base: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    if axis == "n":
        return replace(base, target_n=float(value), r=None)
    if axis == "eta":
        return replace(base, eta=float(value))
    if axis == "eta12":
        return replace(base, eta1=float(value), eta2=float(value))
    raise ValueError(f"axis must be one of {SWEEP_AXES}")


def sweep(
    base: ExperimentConfig, axis: str, values, n_workers: int = 1
) -> list[SweepEntry]:
    """Run one experiment per value, rows in input order, errors collected.

    Individual failures are recorded on their row and do not abort the
    sweep.  Runs are independent and pure, so ``n_workers > 1`` fans out
    over threads without changing the output.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    values = [float(v) for v in values]
    if not values:
        raise ValueError("sweep needs a non-empty value list")

    def one(value: float) -> SweepEntry:
        try:
            return SweepEntry(value=value, result=run(_config_at(base, axis, value)))
        except Exception as exc:  # noqa: BLE001 - per-row error reporting
            return SweepEntry(value=value, error=f"{type(exc).__name__}: {exc}")

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]


# ---------------------------------------------------------------------------
# plain-text configuration files (key = value)
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "r": float,
    "n": float,
    "eta1": float,
    "eta": float,
    "eta2": float,
    "engine": str,
    "loss_on_a": bool,
    "tail_tol": float,
    "seed": int,
}


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"cannot parse boolean from {text!r}")


def config_values_from_mapping(mapping: dict[str, str]) -> dict:
    """Typed ExperimentConfig field values from string key/value pairs."""
    kwargs = {}
    for key, text in mapping.items():
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown configuration key {key!r}")
        typ = _CONFIG_KEYS[key]
        if typ is bool:
            value = _parse_bool(text)
        else:
            value = typ(text)
        kwargs["target_n" if key == "n" else key] = value
    return kwargs


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    """Build an ExperimentConfig from string key/value pairs."""
    cfg = ExperimentConfig(**config_values_from_mapping(mapping))
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read an ExperimentConfig from a plain-text key = value file."""
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_mapping(parse_kv_text(fh.read()))
