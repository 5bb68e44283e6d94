import numpy as np
import pytest

import phasekramers as pk
from phasekramers.core import ParameterError, potential_tables

from .conftest import gauss_wave


class TestModelParams:
    def test_scales(self):
        p = pk.ModelParams(mass=2.0, hbar=0.5, thermal_energy=3.0, gamma=10.0)
        assert p.momentum_scale == pytest.approx(np.sqrt(6.0))
        assert p.length_scale == pytest.approx(0.5 / np.sqrt(6.0))
        assert p.rate == pytest.approx(6.0)

    @pytest.mark.parametrize("bad", [
        dict(mass=-1.0), dict(hbar=0.0), dict(thermal_energy=-2.0),
        dict(gamma=0.0), dict(dims=0),
    ])
    def test_rejects_invalid(self, bad):
        kw = dict(mass=1.0, hbar=1.0, thermal_energy=1.0, gamma=1.0)
        kw.update(bad)
        with pytest.raises(ParameterError):
            pk.ModelParams(**kw)


class TestDimensionless:
    def test_unity_scales_identity(self):
        p = pk.ModelParams(mass=1.0, hbar=1.0, thermal_energy=1.0, gamma=1.0)
        d = pk.to_dimensionless(p, x=1.0, p=1.0)
        assert d.x == pytest.approx(1.0) and d.p == pytest.approx(1.0)

    def test_scaled_position(self):
        # kT*m = 4, hbar = 2: x' = x*sqrt(kT*m)/hbar = 3*2/2 = 3
        p = pk.ModelParams(mass=2.0, hbar=2.0, thermal_energy=2.0, gamma=1.0)
        assert pk.to_dimensionless(p, x=3.0).x == pytest.approx(3.0)

    def test_round_trip(self):
        p = pk.ModelParams(mass=0.7, hbar=1.3, thermal_energy=2.2, gamma=5.0)
        pot = pk.Potential.harmonic(p.mass, 1.7, center=0.3)
        x = np.linspace(-2, 2, 11)
        mom = np.linspace(-1, 1, 7)
        d = pk.to_dimensionless(p, x=x, p=mom, potential=pot)
        back = pk.from_dimensionless(p, x=d.x, p=d.p, v=d.v)
        assert np.allclose(back.x, x, rtol=1e-14, atol=0)
        assert np.allclose(back.p, mom, rtol=1e-14, atol=0)
        assert np.allclose(back.v, pot.value(x), rtol=1e-14, atol=1e-16)


POTENTIALS = {
    "zero": lambda: pk.Potential.zero(),
    "harmonic": lambda: pk.Potential.harmonic(1.3, 2.1, center=0.4),
    "quartic": lambda: pk.Potential.quartic(0.8, center=-0.2),
}


@pytest.mark.parametrize("family", sorted(POTENTIALS))
def test_potential_derivative_consistency(family):
    pot = POTENTIALS[family]()
    x = np.linspace(-3.0, 3.0, 241)
    h = 1e-5
    fd_grad = (pot.value(x + h) - pot.value(x - h)) / (2 * h)
    fd_lap = (pot.value(x + h) - 2 * pot.value(x) + pot.value(x - h)) / h**2
    scale = np.abs(pot.grad(x)).max() + 1.0
    assert np.abs(pot.grad(x) - fd_grad).max() / scale < 1e-6
    scale2 = np.abs(pot.laplacian(x)).max() + 1.0
    assert np.abs(pot.laplacian(x) - fd_lap).max() / scale2 < 1e-4


def test_tabulated_matches_sampled_family():
    base = pk.Potential.harmonic(1.0, 1.5, center=0.1)
    xs = np.linspace(-4, 4, 401)
    tab = pk.Potential.tabulated(xs, base.value(xs))
    x = np.linspace(-3, 3, 57)
    assert np.abs(tab.value(x) - base.value(x)).max() < 1e-8
    assert np.abs(tab.grad(x) - base.grad(x)).max() < 1e-5
    assert np.abs(tab.laplacian(x) - base.laplacian(x)).max() < 1e-3


class TestGrid:
    def test_rejects_non_power_of_two(self):
        with pytest.raises(ParameterError):
            pk.Grid(length=10.0, num_x=48, p_max=8.0, num_p=64, k_max=6)

    def test_rejects_narrow_window(self):
        with pytest.raises(ParameterError):
            pk.Grid(length=10.0, num_x=32, p_max=4.0, num_p=64, k_max=6)

    def test_geometry(self):
        g = pk.Grid(length=8.0, num_x=16, p_max=8.0, num_p=33, k_max=5)
        assert g.dx == pytest.approx(0.5)
        assert g.p[0] == -8.0 and g.p[-1] == 8.0
        assert g.p_weights.sum() == pytest.approx(16.0)
        assert g.freqs[1] == pytest.approx(2 * np.pi / 8.0)


def test_fields_locked_and_shape_checked(ver_grid):
    psi = gauss_wave(ver_grid)
    with pytest.raises(ValueError):
        psi.values[0] = 1.0
    with pytest.raises(ParameterError):
        pk.ConfigWave(ver_grid, np.zeros(3))
    with pytest.raises(ParameterError):
        pk.PhaseField(ver_grid, np.zeros((2, 2)))


def test_config_wave_norm_and_inner(ver_grid):
    psi = gauss_wave(ver_grid)
    assert psi.norm() == pytest.approx(1.0, rel=1e-12)
    assert psi.inner(psi).real == pytest.approx(1.0, rel=1e-12)
    assert abs(psi.inner(psi).imag) < 1e-14


def test_potential_tables_chain_rule():
    params = pk.ModelParams(mass=2.0, hbar=0.7, thermal_energy=1.3, gamma=10.0)
    g = pk.Grid(length=6.0, num_x=16, p_max=6.0, num_p=16, k_max=4)
    pot = pk.Potential.harmonic(params.mass, 1.1, center=0.5)
    t = potential_tables(params, pot, g)
    lam, kt = params.length_scale, params.thermal_energy
    x_phys = g.x * lam
    assert np.allclose(t.v, pot.value(x_phys) / kt, rtol=1e-14)
    assert np.allclose(t.dv[0], pot.grad(x_phys) * lam / kt, rtol=1e-14)
    assert np.allclose(t.lap, pot.laplacian(x_phys) * lam**2 / kt, rtol=1e-14)


def test_dimensional_consistency_three_steps():
    """Evolving in physical variables equals scaling, evolving, unscaling.

    The physical-variable reference is an RK4 step of the unscaled
    generators assembled directly on the physical grid in this test.
    """
    params = pk.ModelParams(mass=1.7, hbar=0.6, thermal_energy=2.3, gamma=3.0)
    g = pk.Grid(length=12.0, num_x=32, p_max=8.0, num_p=128, k_max=6)
    pot = pk.Potential.harmonic(params.mass, 0.9, center=0.5 * g.length * params.length_scale)

    rng = np.random.default_rng(5)
    mask = np.abs(g.freqs) <= 1.5
    ph = np.zeros(g.num_x, complex)
    ph[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    psi = pk.ConfigWave(g, np.fft.ifft(ph) * g.num_x).normalized()
    field = pk.lift_wave((0,), psi)

    from phasekramers.operators import apply_diffusion, apply_transport

    def rhs_scaled(f):
        return pk.PhaseField(g, apply_transport(f, params, pot).values
                             + params.gamma * apply_diffusion(f).values)

    # physical-variable generators on the physical grids x = lam_x x', p = lam_p p'
    lam_x, lam_p = params.length_scale, params.momentum_scale
    xg, pg = g.x * lam_x, g.p * lam_p
    sx = 2 * np.pi * np.fft.fftfreq(g.num_x, d=g.dx * lam_x)
    dp_phys = (pg[1] - pg[0])

    def ddx(f):
        return np.fft.ifft(1j * sx[:, None] * np.fft.fft(f, axis=0), axis=0)

    def ddp(f):
        out = np.empty_like(f)
        out[:, 2:-2] = (f[:, :-4] - 8 * f[:, 1:-3] + 8 * f[:, 3:-1] - f[:, 4:]) / 12.0
        c0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
        c1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
        out[:, 0] = sum(c0[j] * f[:, j] for j in range(5))
        out[:, 1] = sum(c1[j] * f[:, j] for j in range(5))
        out[:, -1] = -sum(c0[j] * f[:, -1 - j] for j in range(5))
        out[:, -2] = -sum(c1[j] * f[:, -1 - j] for j in range(5))
        return out / dp_phys

    vg, dvg = pot.value(xg), pot.grad(xg)

    def rhs_phys(f):
        a = dvg[:, None] * ddp(f) - (pg[None, :] / params.mass) * ddx(f)
        a -= (1j / params.hbar) * (vg[:, None] - 0.5 * pg[None, :] ** 2 / params.mass) * f
        u = pg[None, :] * f + 1j * params.hbar * ddx(f) + params.thermal_energy * params.mass * ddp(f)
        return a + params.gamma * ddp(u)

    dt = 2e-4
    def rk4(f, rhs):
        k1 = rhs(f); k2 = rhs(f + 0.5 * dt * k1); k3 = rhs(f + 0.5 * dt * k2); k4 = rhs(f + dt * k3)
        return f + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    fs = field.values.copy()
    fp = field.values.copy()   # same samples; physical grids are the scaled images
    for _ in range(3):
        fs = rk4(fs, lambda v: rhs_scaled(pk.PhaseField(g, v)).values)
        fp = rk4(fp, rhs_phys)
    assert np.abs(fs - fp).max() / np.abs(fs).max() < 1e-10
