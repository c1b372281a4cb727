"""Fock-engine tests: closed forms, squeeze unitary, loss channel, projection.

Expected amplitude values were frozen from 40-digit mpmath evaluation of the
squeezed-state series; channel algebra is checked against brute-force dense
Kraus matrices built independently with math.comb.
"""

import math

import numpy as np
import pytest

from micromacro import (
    EntangledBranch,
    FockAmplitudes,
    LossChannelParams,
    SqueezeParams,
    TailToleranceError,
    TruncationError,
    apply_squeeze,
    branches_to_projected,
    choose_n_max,
    loss_on_branch,
    loss_on_spectator,
    mean_photon,
    project_through_loss,
    squeezed_one,
    squeezed_vacuum,
)

from conftest import random_branches

# mpmath oracle, 40 digits: (1/sqrt(cosh r)) * sqrt((2k)!)/(2^k k!) * (-tanh r)^k
SV_05 = {
    0: 0.94171061583167570696,
    2: -0.30771917645837044864,
    4: 0.12315081385423961315,
    6: -0.051951579529423580739,
}
# (1/cosh r^{3/2}) * sqrt((2k+1)!)/(2^k k!) * (-tanh r)^k
SO_05 = {
    1: 0.83512675735461766439,
    3: -0.47266138288293331593,
    5: 0.2442065008782438981,
}
SINH2_1 = 1.3810978455418157  # sinh(1)^2, mpmath
RATIO_26 = 3.022311747061185  # (1+3 sinh^2 2.6)/sinh^2 2.6, mpmath


class TestSqueezedStates:
    def test_r_zero_is_vacuum(self):
        st = squeezed_vacuum(0.0)
        assert st.amps[0] == 1.0
        assert np.all(st.amps[1:] == 0.0)

    def test_r_zero_single_photon(self):
        st = squeezed_one(0.0)
        assert st.amps[1] == 1.0
        assert st.amps[0] == 0.0

    def test_closed_form_amplitudes_r_05(self):
        sv = squeezed_vacuum(0.5)
        for n, ref in SV_05.items():
            assert sv.amps[n].real == pytest.approx(ref, abs=1e-14)
        so = squeezed_one(0.5)
        for n, ref in SO_05.items():
            assert so.amps[n].real == pytest.approx(ref, abs=1e-14)

    @pytest.mark.parametrize("r", [0.3, 1.0, 2.0, 2.6])
    def test_parity_support(self, r):
        sv = squeezed_vacuum(r)
        so = squeezed_one(r)
        assert np.all(sv.amps[1::2] == 0.0)
        assert np.all(so.amps[0::2] == 0.0)

    @pytest.mark.parametrize("r", [0.5, 1.5, 2.6])
    def test_norm_within_tail_tolerance(self, r):
        for state in (squeezed_vacuum(r), squeezed_one(r)):
            assert state.norm_sq == pytest.approx(1.0, abs=2e-10)

    def test_fig2a_distributions_r26(self):
        # even-only / odd-only photon statistics with the 3:1 mean ratio
        sv = squeezed_vacuum(2.6)
        so = squeezed_one(2.6)
        assert np.all(sv.probabilities()[1::2] == 0.0)
        assert np.all(so.probabilities()[0::2] == 0.0)
        ratio = mean_photon(so) / mean_photon(sv)
        assert ratio == pytest.approx(RATIO_26, abs=1e-6)

    def test_explicit_n_max_too_small_raises(self):
        with pytest.raises(TruncationError):
            squeezed_vacuum(2.0, n_max=20)
        with pytest.raises(TruncationError):
            squeezed_one(2.0, n_max=20)

    def test_choose_n_max_monotone_and_certified(self):
        previous = 0
        for r in (0.5, 1.0, 1.5, 2.0, 2.65):
            bound = choose_n_max(r)
            assert bound >= previous
            previous = bound
            assert squeezed_vacuum(r, bound).tail_mass(bound - 2) < 1e-9

    def test_choose_n_max_cap(self):
        with pytest.raises(TruncationError):
            choose_n_max(4.0)


class TestMeanPhoton:
    def test_squeezed_vacuum_r1(self):
        assert mean_photon(squeezed_vacuum(1.0)) == pytest.approx(SINH2_1, rel=1e-8)

    def test_single_photon_r0(self):
        assert mean_photon(squeezed_one(0.0)) == 1.0

    @pytest.mark.parametrize("r", np.linspace(0.0, 2.7, 10))
    def test_closed_forms(self, r):
        s2 = math.sinh(r) ** 2
        n0 = mean_photon(squeezed_vacuum(r))
        n1 = mean_photon(squeezed_one(r))
        assert n0 == pytest.approx(s2, rel=1e-6, abs=1e-12)
        assert n1 == pytest.approx(1.0 + 3.0 * s2, rel=1e-6)


class TestApplySqueeze:
    def test_matches_closed_form_on_vacuum(self):
        sv = squeezed_vacuum(0.5)
        out = apply_squeeze(FockAmplitudes.fock(0, sv.n_max), SqueezeParams(0.5, +1))
        assert np.abs(out.amps - sv.amps).max() < 1e-8

    def test_matches_closed_form_on_one(self):
        so = squeezed_one(1.2)
        out = apply_squeeze(FockAmplitudes.fock(1, so.n_max), SqueezeParams(1.2, +1))
        assert np.abs(out.amps - so.amps).max() < 1e-8

    def test_odd_support_preserved(self):
        out = apply_squeeze(FockAmplitudes.fock(1, 200), SqueezeParams(1.0, +1))
        assert np.abs(out.amps[::2]).max() == 0.0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_round_trip_random_state(self, seed):
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=21) + 1j * rng.normal(size=21)
        psi /= np.linalg.norm(psi)
        amps = np.zeros(1200, dtype=complex)
        amps[:21] = psi
        state = FockAmplitudes.from_array(amps)
        r = float(rng.uniform(0.2, 1.5))
        fwd = apply_squeeze(state, SqueezeParams(r, +1))
        assert fwd.norm_sq == pytest.approx(1.0, abs=1e-8)
        back = apply_squeeze(fwd, SqueezeParams(r, -1))
        assert np.abs(back.amps - state.amps).max() < 1e-8

    def test_identity_at_r_zero(self):
        state = FockAmplitudes.fock(1, 10)
        assert apply_squeeze(state, SqueezeParams(0.0, +1)) is state

    def test_leak_past_n_max_raises(self):
        with pytest.raises(TruncationError):
            apply_squeeze(FockAmplitudes.fock(0, 10), SqueezeParams(2.0, +1))


def _dense_kraus(n_dim: int, k: int, eta: float) -> np.ndarray:
    """Independent oracle: E_k as a dense matrix from binomial coefficients."""
    out = np.zeros((n_dim, n_dim))
    for n in range(k, n_dim):
        out[n - k, n] = math.sqrt(
            math.comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k
        )
    return out


def _channel(rho: np.ndarray, eta: float) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in range(rho.shape[0]):
        e = _dense_kraus(rho.shape[0], k, eta)
        out += e @ rho @ e.T
    return out


def _reduced_dm(branches) -> np.ndarray:
    dim = branches[0].u.n_max + 1
    rho = np.zeros((dim, dim), dtype=complex)
    for b in branches:
        rho += b.weight * (
            np.outer(b.u.amps, b.u.amps.conj())
            + np.outer(b.v.amps, b.v.amps.conj())
        )
    return rho


class TestLossChannel:
    def test_lossless_identity(self, bell_branch):
        out = loss_on_branch(bell_branch, LossChannelParams(eta=1.0))
        assert len(out) == 1
        assert out[0] is bell_branch

    def test_single_photon_branches(self):
        u = FockAmplitudes.fock(1, 4)
        v = FockAmplitudes.from_array(np.zeros(5))
        out = loss_on_branch(
            EntangledBranch(weight=1.0, u=u, v=v), LossChannelParams(eta=0.9)
        )
        assert len(out) == 2
        assert out[0].u.amps[1] == pytest.approx(math.sqrt(0.9))
        assert out[1].u.amps[0] == pytest.approx(math.sqrt(0.1))
        rho = _reduced_dm(out)
        assert rho[1, 1] == pytest.approx(0.9)
        assert rho[0, 0] == pytest.approx(0.1)

    def test_composition_matches_dense_oracle(self):
        rng = np.random.default_rng(42)
        branches = random_branches(rng, count=2, dim=11)
        rho_in = _reduced_dm(branches)

        exact = LossChannelParams(eta=0.9, tail_tol=1e-30)
        after_a = []
        for b in branches:
            after_a.extend(loss_on_branch(b, exact))
        after_ab = []
        for b in after_a:
            after_ab.extend(loss_on_branch(b, LossChannelParams(eta=0.8, tail_tol=1e-30)))
        combined = []
        for b in branches:
            combined.extend(loss_on_branch(b, LossChannelParams(eta=0.72, tail_tol=1e-30)))

        assert np.abs(_reduced_dm(after_ab) - _reduced_dm(combined)).max() < 1e-10
        # and both agree with the dense superoperator oracle
        oracle = _channel(_channel(rho_in, 0.9), 0.8)
        assert np.abs(_reduced_dm(after_ab) - oracle).max() < 1e-10

    def test_trace_deficit_below_tolerance(self):
        sv = squeezed_vacuum(1.5)
        branch = EntangledBranch(
            weight=1.0,
            u=sv,
            v=FockAmplitudes.from_array(np.zeros(sv.n_max + 1)),
        )
        params = LossChannelParams(eta=0.8, tail_tol=1e-10)
        out = loss_on_branch(branch, params)
        total = sum(b.trace_contribution for b in out)
        assert branch.trace_contribution - total < 1e-10
        assert total <= branch.trace_contribution + 1e-12

    def test_explicit_k_max_unreachable(self):
        sv = squeezed_vacuum(1.5)
        branch = EntangledBranch(
            weight=1.0,
            u=sv,
            v=FockAmplitudes.from_array(np.zeros(sv.n_max + 1)),
        )
        with pytest.raises(TailToleranceError):
            loss_on_branch(branch, LossChannelParams(eta=0.5, k_max=1, tail_tol=1e-10))

    def test_invalid_eta(self):
        with pytest.raises(ValueError):
            LossChannelParams(eta=1.2)

    def test_eta_zero_dumps_to_vacuum(self):
        u = FockAmplitudes.fock(3, 5)
        v = FockAmplitudes.from_array(np.zeros(6))
        out = loss_on_branch(
            EntangledBranch(weight=1.0, u=u, v=v), LossChannelParams(eta=0.0)
        )
        rho = _reduced_dm(out)
        assert rho[0, 0] == pytest.approx(1.0)
        assert np.abs(rho - np.diag(np.diag(rho))).max() == 0.0

    def test_spectator_loss(self, bell_branch):
        out = loss_on_spectator(bell_branch, 0.8)
        total = sum(b.trace_contribution for b in out)
        assert total == pytest.approx(bell_branch.trace_contribution)
        assert out[0].u.amps[0] == pytest.approx(math.sqrt(0.8) / math.sqrt(2))
        assert out[1].v.amps[0] == pytest.approx(math.sqrt(0.2) / math.sqrt(2))


class TestProjection:
    def test_input_state_block(self, bell_branch):
        rho = branches_to_projected([bell_branch])
        assert rho.p01 == pytest.approx(0.5)
        assert rho.p10 == pytest.approx(0.5)
        assert rho.d == pytest.approx(0.5)
        assert rho.p00 == rho.p11 == 0.0
        assert rho.off_x_max() == 0.0

    def test_single_photon_loss_closed_form(self, bell_branch):
        # r=0 with eta=0.81 on arm B: worked out by hand from two branches
        out = loss_on_branch(bell_branch, LossChannelParams(eta=0.81))
        rho = branches_to_projected(out)
        assert rho.p10 == pytest.approx(0.5, abs=1e-12)
        assert rho.p01 == pytest.approx(0.405, abs=1e-12)
        assert rho.p00 == pytest.approx(0.095, abs=1e-12)
        assert rho.d == pytest.approx(0.45, abs=1e-12)
        assert rho.p11 == 0.0
        assert rho.d_prime == 0.0

    def test_fused_projection_equals_expansion(self):
        rng = np.random.default_rng(11)
        for eta in (1.0, 0.93, 0.6):
            branches = random_branches(rng, count=3, dim=9)
            expanded = []
            for b in branches:
                expanded.extend(
                    loss_on_branch(b, LossChannelParams(eta=eta, tail_tol=1e-30))
                )
            direct = branches_to_projected(expanded)
            fused = project_through_loss(branches, eta)
            assert np.abs(direct.matrix - fused.matrix).max() < 1e-13

    def test_ensemble_trace_bound(self):
        rng = np.random.default_rng(5)
        branches = random_branches(rng, count=4, dim=7)
        total = sum(b.trace_contribution for b in branches)
        assert total <= 1.0 + 1e-12
        rho = branches_to_projected(branches)
        assert rho.trace <= total + 1e-12
