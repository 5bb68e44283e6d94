import numpy as np
import pytest

from phasekramers import ConfigWave, Grid, ModelParams, Potential


@pytest.fixture(scope="session")
def unit_params():
    return ModelParams(mass=1.0, hbar=1.0, thermal_energy=1.0, gamma=100.0)


@pytest.fixture(scope="session")
def ver_grid():
    # identity-check grid: wide momentum window, shells to 8
    return Grid(length=16.0, num_x=128, p_max=12.0, num_p=256, k_max=8)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(length=12.0, num_x=32, p_max=8.0, num_p=96, k_max=6)


def band_wave(grid, seed, band=2.0):
    rng = np.random.default_rng(seed)
    mask = np.abs(grid.freqs) <= band
    ph = np.zeros(grid.num_x, dtype=complex)
    ph[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
    return ConfigWave(grid, np.fft.ifft(ph) * grid.num_x).normalized()


def gauss_wave(grid, width=0.8, center=None):
    x = grid.x
    c = 0.5 * grid.length if center is None else center
    return ConfigWave(grid, np.exp(-0.5 * ((x - c) / width) ** 2).astype(complex)).normalized()


@pytest.fixture()
def mid_potential(unit_params, ver_grid):
    center = 0.5 * ver_grid.length * unit_params.length_scale
    return Potential.quartic(1.0, center=center)
