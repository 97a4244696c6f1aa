import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import kdvbbm as kb
from kdvbbm.dynamics import CUBIC_COEFF, DERIV_SQ_COEFF
from oracles import convolve_project, richardson_order

G01 = kb.GevreyIndex(0.1, 2.0)


class TestLinearPropagate:
    def test_t_zero_identity(self, grid, coeffs):
        u = kb.random_field(grid, "band_limited", 0)
        v = kb.linear_propagate(u, 0.0, coeffs)
        assert np.max(np.abs(v.coeffs - u.coeffs)) == 0.0

    def test_norm_preservation(self, grid, coeffs):
        rng = np.random.default_rng(1)
        for seed in range(10):
            u = kb.random_field(grid, "band_limited", seed)
            t = float(rng.uniform(0.1, 10.0))
            for g in (G01, kb.GevreyIndex(0.0, 0.0)):
                before = kb.gevrey_norm(u, g)
                after = kb.gevrey_norm(kb.linear_propagate(u, t, coeffs), g)
                assert abs(after - before) <= 1e-12 * before

    def test_group_law(self, grid, coeffs):
        u = kb.random_field(grid, "band_limited", 2)
        a = kb.linear_propagate(kb.linear_propagate(u, 1.3, coeffs), 2.4, coeffs)
        b = kb.linear_propagate(u, 3.7, coeffs)
        scale = np.max(np.abs(u.coeffs))
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-12 * scale

    def test_single_mode_phase(self, small_grid, coeffs):
        u = kb.cos_mode(small_grid, 3, 1.0)
        t = 0.7
        v = kb.linear_propagate(u, t, coeffs)
        phase = np.exp(-1j * kb.evaluate_symbol("phi", 3.0, coeffs) * t)
        assert v.coeffs[3] == pytest.approx(0.5 * phase, abs=1e-15)


class TestNonlinearRhs:
    def test_zero(self, grid, coeffs):
        z = kb.Spectrum(grid, np.zeros(grid.n_modes, complex))
        assert np.all(kb.nonlinear_rhs(z, coeffs).coeffs == 0)

    def test_constant_field(self, grid, coeffs):
        # psi(0) = tau(0) = 0 and the derivative of a constant vanishes
        const = kb.cos_mode(grid, 0, 2.5)
        out = kb.nonlinear_rhs(const, coeffs)
        assert np.max(np.abs(out.coeffs)) < 1e-16

    @pytest.mark.parametrize("seed", [0, 1])
    def test_matches_convolution_oracle(self, small_grid, coeffs, seed):
        u = kb.random_field(small_grid, "band_limited", seed, cutoff=9, amplitude=0.05)
        out = kb.nonlinear_rhs(u, coeffs)
        c = u.coeffs
        dc = c * (1j * small_grid.wavenumbers)
        dc[small_grid.nyquist] = 0.0
        sq = convolve_project(small_grid, c, c)
        cube = convolve_project(small_grid, c, c, c)
        dsq = convolve_project(small_grid, dc, dc)
        xi = small_grid.wavenumbers
        tau = kb.evaluate_symbol("tau", xi, coeffs)
        psi = kb.evaluate_symbol("psi", xi, coeffs)
        oracle = -1j * (tau * sq - CUBIC_COEFF * psi * cube - DERIV_SQ_COEFF * psi * dsq)
        oracle[small_grid.nyquist] = 0.0
        scale = np.max(np.abs(oracle))
        assert np.max(np.abs(out.coeffs - oracle)) < 1e-12 * scale

    def test_preserves_realness(self, grid, coeffs):
        u = kb.random_field(grid, "band_limited", 7, amplitude=0.1)
        out = kb.nonlinear_rhs(u, coeffs)
        assert out.hermitian_defect() < 1e-12


class TestIFRK4:
    def test_zero_datum(self, grid, coeffs):
        z = kb.Spectrum(grid, np.zeros(grid.n_modes, complex))
        traj = kb.evolve_ifrk4(z, 0.1, 0.01, coeffs)
        assert all(np.all(r.state.coeffs == 0) for r in traj.records)

    def test_step_count_mismatch(self, grid, coeffs):
        z = kb.Spectrum(grid, np.zeros(grid.n_modes, complex))
        with pytest.raises(ValueError, match="integral multiple"):
            kb.evolve_ifrk4(z, 1.0, 0.3, coeffs)

    def test_energy_conservation_short(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.05)
        traj = kb.evolve_ifrk4(eta0, 1.0, 1e-3, coeffs, record_every=50)
        energies = [r.energy for r in traj.records]
        drift = max(abs(e - energies[0]) for e in energies) / energies[0]
        assert drift < 1e-10

    def test_realness_preserved(self, grid, coeffs):
        eta0 = kb.gaussian(grid, 1.0, 0.5)
        traj = kb.evolve_ifrk4(eta0, 1.0, 2e-3, coeffs, record_every=100)
        assert traj.final.state.hermitian_defect() < 1e-11

    def test_self_convergence_order(self, grid, coeffs):
        eta0 = kb.gaussian(grid, 1.0, 1.0)
        finals = [
            kb.evolve_ifrk4(eta0, 1.0, dt, coeffs, record_every=10**6).final.state.coeffs
            for dt in (0.04, 0.02, 0.01)
        ]
        e1 = np.sqrt(np.sum(np.abs(finals[0] - finals[1]) ** 2))
        e2 = np.sqrt(np.sum(np.abs(finals[1] - finals[2]) ** 2))
        assert 3.5 < richardson_order(e1, e2) < 4.5

    def test_blowup_guard(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.1)
        with pytest.raises(kb.BlowUpError):
            kb.evolve_ifrk4(eta0, 1.0, 0.01, coeffs, blowup_factor=0.5)

    def test_restart_matches_single_run(self, grid, coeffs):
        # the numerical flow is a fixed map per step, so a restart is exact
        eta0 = kb.gaussian(grid, 1.0, 0.5)
        full = kb.evolve_ifrk4(eta0, 1.0, 1e-2, coeffs, record_every=10**6)
        half = kb.evolve_ifrk4(eta0, 0.5, 1e-2, coeffs, record_every=10**6)
        rest = kb.evolve_ifrk4(half.final.state, 0.5, 1e-2, coeffs, record_every=10**6)
        scale = np.max(np.abs(full.final.state.coeffs))
        diff = np.max(np.abs(full.final.state.coeffs - rest.final.state.coeffs))
        assert diff < 1e-12 * scale

    def test_observers_called(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.01)
        seen = []
        kb.evolve_ifrk4(
            eta0, 0.1, 0.01, coeffs,
            observers=(lambda t, s: seen.append(t),), record_every=5,
        )
        assert seen[0] == 0.0 and seen[-1] == pytest.approx(0.1)

    def test_gevrey_column(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.01)
        traj = kb.evolve_ifrk4(eta0, 0.1, 0.01, coeffs, gevrey_index=G01, record_every=5)
        assert traj.records[0].gevrey == pytest.approx(kb.gevrey_norm(eta0, G01), rel=1e-12)


class TestPicard:
    def test_zero_datum_one_iteration(self, grid, coeffs):
        z = kb.Spectrum(grid, np.zeros(grid.n_modes, complex))
        traj, diag = kb.picard_solve(z, 1.0, 1e-10, 10, coeffs, G01, n_nodes=16)
        assert diag.iterations == 1
        assert all(np.all(r.state.coeffs == 0) for r in traj.records)

    def test_small_data_contracts_and_matches_marcher(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.01)
        T = 0.5
        traj, diag = kb.picard_solve(eta0, T, 1e-11, 30, coeffs, G01, n_nodes=64)
        assert diag.converged
        assert diag.contraction_ratio <= 0.55
        assert diag.growth_bound_ok
        assert diag.mesh_delta is not None and diag.mesh_delta <= 1e-11
        rk = kb.evolve_ifrk4(eta0, T, 1e-3, coeffs, record_every=10**6)
        delta = kb.gevrey_norm(
            kb.Spectrum(grid, traj.final.state.coeffs - rk.final.state.coeffs), G01
        )
        assert delta < 1e-8

    def test_distances_decrease_geometrically(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.01)
        _, diag = kb.picard_solve(eta0, 0.5, 1e-12, 30, coeffs, G01, n_nodes=32,
                                  mesh_check=False)
        assert all(r < 1.0 for r in diag.ratios)

    def test_no_convergence_raises(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 5.0)
        with pytest.raises(kb.NoConvergenceError):
            kb.picard_solve(eta0, 5.0, 1e-10, 8, coeffs, G01, n_nodes=16, mesh_check=False)

    def test_bad_horizon(self, grid, coeffs):
        eta0 = kb.cos_mode(grid, 1, 0.01)
        with pytest.raises(ValueError):
            kb.picard_solve(eta0, -1.0, 1e-10, 10, coeffs, G01)


class TestLocalExistenceTime:
    def test_frozen_values(self):
        assert kb.local_existence_time(1.0, 1.0) == pytest.approx(1 / 16, rel=1e-15)
        assert kb.local_existence_time(3.0, 2.0) == pytest.approx(1 / 192, rel=1e-15)

    def test_zero_datum_infinite(self):
        assert kb.local_existence_time(0.0, 1.0) == math.inf

    @settings(max_examples=100, deadline=None)
    @given(
        a=st.floats(1e-6, 1e3),
        b=st.floats(1e-6, 1e3),
        c_s=st.floats(1e-3, 1e3),
    )
    def test_monotone_decreasing(self, a, b, c_s):
        lo, hi = min(a, b), max(a, b)
        assert kb.local_existence_time(hi, c_s) <= kb.local_existence_time(lo, c_s)

    def test_validation(self):
        with pytest.raises(ValueError):
            kb.local_existence_time(-1.0, 1.0)
        with pytest.raises(ValueError):
            kb.local_existence_time(1.0, 0.0)


def test_trajectory_must_start_at_zero(grid, coeffs):
    state = kb.cos_mode(grid, 1, 0.1)
    rec = kb.SampleRecord(t=1.0, state=state, energy=0.0, h2=0.0)
    with pytest.raises(ValueError):
        kb.Trajectory(coeffs, grid, [rec])


def test_antisymmetry_discrete_cancellation(grid, coeffs):
    # i * integral of v * phi-rotation(v) vanishes exactly on the grid
    for seed in range(5):
        v = kb.random_field(grid, "band_limited", seed)
        assert kb.antisymmetry_check(v, coeffs) < 1e-12
