import numpy as np
import pytest
import scipy.linalg

import phasekramers as pk
from phasekramers.core import ParameterError, PhaseField, potential_tables
from phasekramers.hermite import from_spectral, synthesize_shells, to_spectral
from phasekramers.kramers import EvolverConfig, KramersEvolver, StabilityError

from .conftest import band_wave
from .oracles import diffusion_spectral_dense, transport_dense


def oracle_grid():
    # the 16 x 32 grid of the integrator-order studies; the window is wide
    # enough that every retained shell is fully covered at the band modes
    return pk.Grid(length=2 * np.pi, num_x=16, p_max=8.0, num_p=32, k_max=4)


def oracle_generator(grid, params, potential, gamma):
    """Generator the splitting discretizes: the transport part acts within
    the retained shell representation (the per-step transforms project onto
    it), the diffusion part is its transform-sandwiched diagonal."""
    from phasekramers.hermite import from_spectral as _fs, to_spectral as _ts

    tables = potential_tables(params, potential, grid)
    A = transport_dense(grid, params, tables.v, tables.dv[0])
    B = diffusion_spectral_dense(grid)
    n = grid.num_x * grid.num_p
    P = np.zeros((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        P[:, j] = _fs(_ts(PhaseField(grid, e.reshape(grid.num_x, grid.num_p)))).values.ravel()
    return P @ A @ P + gamma * B


def evolve_steps(ev, field, n, dt):
    c = to_spectral(field).coeffs
    for _ in range(n):
        c = ev.step_coeffs(c, dt)
    return from_spectral(pk.SpectralField(field.grid, c))


class TestStep:
    def test_pure_diffusion_decay_exact(self, small_grid):
        # transport suppressed by a vanishing thermal rate: degree-k
        # coefficients decay exactly as exp(-gamma k t)
        g = small_grid
        frozen = pk.ModelParams(mass=1.0, hbar=1.0, thermal_energy=1e-12, gamma=40.0)
        gamma, dt = 40.0, 1e-3
        cfg = EvolverConfig(gamma=gamma, t_end=1.0, dt=dt)
        ev = KramersEvolver(frozen, pk.Potential.zero(), g, cfg)
        c = np.zeros(g.spectral_shape(), complex)
        c[3, 0] = 1.0
        for _ in range(5):
            c = ev.step_coeffs(c, dt)
        assert abs(c[3, 0]) == pytest.approx(np.exp(-gamma * 3 * 5 * dt), rel=1e-9)

    def test_transport_flow_norm_conserved(self, unit_params, small_grid):
        # the explicit substep integrates a skew-Hermitian generator: the
        # grid RK4 flow conserves the norm to 1e-8 per unit time
        g = small_grid
        cfg = EvolverConfig(gamma=1.0, t_end=1.0, dt=2e-4)
        ev = KramersEvolver(unit_params, pk.Potential.zero(), g, cfg)
        f = synthesize_shells(g, {0: 1.0, 1: 0.5}, 1.0, 3)
        v = f.values
        t_total = 0.02
        for _ in range(100):
            v = ev._transport_rk4(v, 2e-4)
        drift = abs(PhaseField(g, v).norm() / f.norm() - 1.0)
        assert drift / t_total < 1e-8

    def test_against_dense_exponential(self, unit_params):
        g = oracle_grid()
        pot = pk.Potential.zero()
        gamma, dt, n = 20.0, 4e-3, 3
        M = oracle_generator(g, unit_params, pot, gamma)
        f = synthesize_shells(g, {0: 1.0, 1: 0.7, 2: 0.4}, 1.1, 5)
        cfg = EvolverConfig(gamma=gamma, t_end=1.0, dt=dt)
        ev = KramersEvolver(unit_params, pot, g, cfg)
        got = evolve_steps(ev, f, n, dt).values.ravel()
        want = scipy.linalg.expm(M * (n * dt)) @ f.values.ravel()
        assert np.linalg.norm(got - want) / np.linalg.norm(want) < 1e-4

    def test_splitting_second_order(self, unit_params):
        # halving dt divides the error against the exponential by ~4
        g = oracle_grid()
        pot = pk.Potential.zero()
        gamma, t_total = 20.0, 0.012
        M = oracle_generator(g, unit_params, pot, gamma)
        f = synthesize_shells(g, {0: 1.0, 1: 0.7, 2: 0.4}, 1.1, 5)
        want = scipy.linalg.expm(M * t_total) @ f.values.ravel()
        errs = []
        for n in (3, 6):
            dt = t_total / n
            ev = KramersEvolver(unit_params, pot, g, EvolverConfig(gamma=gamma, t_end=1.0, dt=dt))
            got = evolve_steps(ev, f, n, dt).values.ravel()
            errs.append(np.linalg.norm(got - want) / np.linalg.norm(want))
        ratio = errs[0] / errs[1]
        assert 3.2 <= ratio <= 4.8

    def test_imex_converges_to_splitting(self, unit_params, small_grid):
        g = small_grid
        pot = pk.Potential.zero()
        gamma, t_total = 20.0, 0.02
        f = synthesize_shells(g, {0: 1.0, 1: 1.0}, 1.0, 9)
        ref_ev = KramersEvolver(unit_params, pot, g, EvolverConfig(gamma=gamma, t_end=1.0, dt=1e-5))
        ref = evolve_steps(ref_ev, f, 40, t_total / 40).values
        errs = []
        for n in (40, 80):
            ev = KramersEvolver(unit_params, pot, g,
                                EvolverConfig(gamma=gamma, t_end=1.0, dt=t_total / n, scheme="imex"))
            got = evolve_steps(ev, f, n, t_total / n).values
            errs.append(np.abs(got - ref).max())
        assert errs[1] < 0.7 * errs[0]  # first-order scheme improves with dt


class TestEvolverConfig:
    def test_rejects_bad_scheme(self):
        with pytest.raises(ParameterError):
            EvolverConfig(gamma=10.0, t_end=1.0, scheme="leapfrog")

    def test_default_two_phase_steps(self):
        cfg = EvolverConfig(gamma=200.0, t_end=1.0)
        assert cfg.slow_dt == pytest.approx(0.0005)
        assert cfg.fast_dt == pytest.approx(0.0005)
        assert cfg.fast_until == pytest.approx(0.05)
        cfg2 = EvolverConfig(gamma=5.0, t_end=1.0)
        assert cfg2.slow_dt == pytest.approx(0.01)
        assert cfg2.fast_dt == pytest.approx(0.01)

    def test_stability_guard(self, unit_params, small_grid):
        pot = pk.Potential.quartic(5.0, center=0.5 * small_grid.length * unit_params.length_scale)
        with pytest.raises(StabilityError):
            KramersEvolver(unit_params, pot, small_grid, EvolverConfig(gamma=10.0, t_end=1.0, dt=0.05))


class TestEvolve:
    def test_zero_field_stays_zero(self, unit_params, small_grid):
        cfg = EvolverConfig(gamma=50.0, t_end=0.05, dt=1e-3)
        ev = KramersEvolver(unit_params, pk.Potential.zero(), small_grid, cfg)
        traj = ev.evolve(PhaseField(small_grid, np.zeros(small_grid.phase_shape(), complex)))
        assert not traj.aborted
        assert np.all(traj.total_norm == 0)

    def test_slow_lift_leaks_little(self, unit_params, small_grid):
        # starting on the slow shell, fast shells stay below 10/gamma of the norm
        gamma = 100.0
        cfg = EvolverConfig(gamma=gamma, t_end=0.2, dt=1e-3, output_stride=10)
        ev = KramersEvolver(unit_params, pk.Potential.zero(), small_grid, cfg)
        psi = band_wave(small_grid, 12, band=1.0)
        traj = ev.evolve(pk.lift_wave((0,), psi))
        fast = np.sqrt(np.sum(traj.mode_norms[:, 1:] ** 2, axis=1))
        assert fast.max() < 10.0 / gamma * traj.total_norm[0]

    def test_pure_shell_decays_at_shell_rate(self, unit_params, small_grid):
        gamma = 50.0
        cfg = EvolverConfig(gamma=gamma, t_end=0.04, dt=2e-4, output_stride=5)
        ev = KramersEvolver(unit_params, pk.Potential.zero(), small_grid, cfg)
        psi = band_wave(small_grid, 13, band=1.0)
        traj = ev.evolve(pk.lift_wave((2,), psi))
        mask = traj.mode_norms[:, 2] > 0
        rate = np.polyfit(traj.times[mask], np.log(traj.mode_norms[mask, 2]), 1)[0]
        assert abs(rate + 2 * gamma) / (2 * gamma) < 0.05

    def test_diffusion_half_steps_leave_slow_coeffs(self, unit_params, small_grid):
        # the diagonal stiff exponential multiplies degree zero by exp(0) = 1
        g = small_grid
        ev = KramersEvolver(unit_params, pk.Potential.zero(), g,
                            EvolverConfig(gamma=80.0, t_end=1.0, dt=1e-3))
        c = np.zeros(g.spectral_shape(), complex)
        c[0, :3] = [1.0, 0.5j, 0.25]
        half = np.exp(-ev.config.gamma * ev._degrees * 5e-4)
        assert np.all(half[0] == 1.0)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_abort_on_blowup(self, unit_params, small_grid):
        pot = pk.Potential.harmonic(unit_params.mass, 6.0, center=0.5 * small_grid.length * unit_params.length_scale)
        ev = KramersEvolver(unit_params, pot, small_grid,
                            EvolverConfig(gamma=1.0, t_end=50.0, dt=2e-4, output_stride=1000))
        # swap in an unstable step after the startup guard to exercise the
        # runtime blow-up path
        ev.config = EvolverConfig(gamma=1.0, t_end=50.0, dt=0.08, output_stride=1000)
        f = synthesize_shells(small_grid, {0: 1.0, 1: 1.0, 2: 1.0}, 2.0, 3)
        with pytest.warns(UserWarning):
            traj = ev.evolve(f)
        assert traj.aborted
        # the returned samples hold the last finite state, not the blow-up
        assert np.isfinite(traj.slow_waves[-1].values).all()
        assert np.isfinite(traj.total_norm[0])

    def test_sampling_on_time_boundaries(self, unit_params, small_grid):
        cfg = EvolverConfig(gamma=30.0, t_end=0.3, dt=7e-4, sample_interval=0.1,
                            transient_dt=3e-4, transient_time=0.05)
        ev = KramersEvolver(unit_params, pk.Potential.zero(), small_grid, cfg)
        psi = band_wave(small_grid, 14, band=1.0)
        traj = ev.evolve(pk.lift_wave((0,), psi))
        assert np.allclose(traj.times, [0.0, 0.1, 0.2, 0.3], atol=1e-12)


def test_mode_norms_places_mass_on_lifted_shell(unit_params, small_grid):
    psi = band_wave(small_grid, 15, band=1.0)
    f0 = pk.lift_wave((0,), psi)
    norms = dict(pk.mode_norms(f0))
    assert norms[0] == pytest.approx(f0.norm(), rel=1e-10)
    assert max(norms[k] for k in range(1, small_grid.k_max + 1)) < 1e-10 * f0.norm()
    f2 = pk.lift_wave((2,), psi)
    norms2 = dict(pk.mode_norms(f2))
    assert norms2[2] == pytest.approx(f2.norm(), rel=1e-10)


def test_kramers_step_function_wrapper(unit_params, small_grid):
    cfg = EvolverConfig(gamma=25.0, t_end=1.0, dt=1e-3)
    f = synthesize_shells(small_grid, {0: 1.0, 2: 1.0}, 1.0, 2)
    spec = to_spectral(f)
    stepped = pk.kramers_step(spec, cfg, unit_params, pk.Potential.zero())
    ev = KramersEvolver(unit_params, pk.Potential.zero(), small_grid, cfg)
    want = ev.step_coeffs(spec.coeffs, cfg.slow_dt)
    assert np.allclose(stepped.coeffs, want, rtol=0, atol=1e-15)
