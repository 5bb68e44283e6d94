"""Eigen-analysis of the reduced Hamiltonian and its dissipative corrections.

The zeroth-order problem is the dense Hermitian eigensolve of the limit
operator on the periodic grid.  First-order corrections from the
anti-Hermitian gamma^-1 term are

    E1_n   = (i hbar / 4m) <LapV psi_n, psi_n>,
    c_nk   = (i hbar / 4m) <LapV psi_n, psi_k> / (E0_n - E0_k),   n != k,

with the physical Laplacian of the potential; -i E1_n is real and sets the
per-state amplitude growth rate r_n = -i E1_n / (gamma hbar).  Corrected
eigenstates overlap as <psi_n, psi_k> = 2 c_nk / gamma.

Degenerate pairs with non-vanishing coupling are rejected (the formulas
divide by the gap); pairs whose coupling vanishes, as for every potential
with constant LapV, get c_nk = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .core import ConfigWave, Grid, ModelParams, ParameterError, Potential, potential_tables
from .reduced import embed_wave

DEGENERACY_TOL = 1e-8
COUPLING_FLOOR = 1e-10
DOMINANCE_RATIO = 100.0


class DegenerateSpectrumError(ParameterError):
    """Correction formulas are singular for a coupled degenerate pair."""


@dataclass(frozen=True)
class EigenPackage:
    """Eigenpairs of the limit operator plus first-order dissipative data.

    ``energies``/``states`` are the zeroth-order eigensolve (ascending,
    orthonormal under the grid product).  ``corrections`` are the purely
    imaginary first-order energy shifts, ``mixing`` the first-order state
    mixing matrix (zero diagonal) and ``overlaps`` the predicted corrected
    state overlaps 2 c_nk / gamma; the last three are None until filled.
    """

    grid: Grid
    params: ModelParams
    potential: Potential
    energies: np.ndarray
    states: np.ndarray                     # (n_states, num_x)
    corrections: np.ndarray | None = None
    mixing: np.ndarray | None = None
    overlaps: np.ndarray | None = None

    @property
    def n_states(self) -> int:
        return len(self.energies)

    def state(self, n: int) -> ConfigWave:
        return ConfigWave(self.grid, self.states[n])

    def growth_rates(self) -> np.ndarray:
        """Amplitude exponents r_n = -i E1_n / (gamma hbar), real."""
        if self.corrections is None:
            raise ParameterError("corrections not filled; call corrections() first")
        return np.real(-1j * self.corrections) / (self.params.gamma * self.params.hbar)


def hamiltonian_matrix(params: ModelParams, potential: Potential, grid: Grid) -> np.ndarray:
    """Dense real-symmetric matrix of the limit operator on the x' grid."""
    if grid.dims != 1:
        raise ParameterError("dense eigensolve supports dims = 1")
    kt = params.thermal_energy
    kin_col = np.real(np.fft.ifft(0.5 * grid.freqs**2))
    mat = kt * scipy.linalg.circulant(kin_col)
    tables = potential_tables(params, potential, grid)
    mat += np.diag(kt * (tables.v - 0.5 * grid.dims))
    return 0.5 * (mat + mat.T)


def solve_eigen(params: ModelParams, potential: Potential, grid: Grid, n_states: int) -> EigenPackage:
    """Lowest eigenpairs of the limit operator, grid-orthonormalized.

    ``n_states`` is capped at num_x/4 so the retained states stay resolved.
    """
    if n_states < 1 or n_states > grid.num_x // 4:
        raise ParameterError(f"n_states must be in [1, {grid.num_x // 4}]")
    mat = hamiltonian_matrix(params, potential, grid)
    energies, vecs = np.linalg.eigh(mat)
    energies = energies[:n_states]
    states = vecs[:, :n_states].T / math.sqrt(grid.dx)
    for i in range(n_states):
        j = int(np.argmax(np.abs(states[i])))
        if states[i][j].real < 0:
            states[i] = -states[i]
    resid = float(
        max(
            np.linalg.norm(mat @ states[i] - energies[i] * states[i]) / np.linalg.norm(states[i])
            for i in range(n_states)
        )
    )
    if resid > 1e-8 * max(1.0, float(np.abs(energies).max())):
        raise ParameterError(f"eigensolve residual {resid:.3e} exceeds tolerance")
    return EigenPackage(grid, params, potential, energies, states.astype(complex))


def corrections(pkg: EigenPackage) -> EigenPackage:
    """Fill first-order corrections, mixing and predicted overlaps.

    The coupling matrix uses the physical Laplacian of the potential; a
    degenerate pair is an error only when its coupling does not vanish.
    """
    params, grid = pkg.params, pkg.grid
    tables = potential_tables(params, pkg.potential, grid)
    lap_phys = params.mass * params.rate**2 * tables.lap     # (1/m) LapV * m
    pref = 0.25j * params.hbar / params.mass
    n = pkg.n_states
    dx = grid.dx
    coup = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            coup[i, j] = pref * np.sum(lap_phys * pkg.states[i] * np.conj(pkg.states[j])) * dx
    e1 = np.diag(coup).copy()
    scale = max(float(np.abs(coup).max()), 1.0)
    mix = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = pkg.energies[i] - pkg.energies[j]
            if abs(coup[i, j]) <= COUPLING_FLOOR * scale:
                continue
            if abs(gap) < DEGENERACY_TOL * max(1.0, float(np.abs(pkg.energies).max())):
                raise DegenerateSpectrumError(
                    f"states ({i}, {j}) are degenerate (gap {gap:.3e}) with coupling {coup[i, j]:.3e}"
                )
            mix[i, j] = coup[i, j] / gap
    overlaps = 2.0 * mix / params.gamma
    return replace(pkg, corrections=e1, mixing=mix, overlaps=overlaps)


def corrected_state(pkg: EigenPackage, n: int) -> ConfigWave:
    """psi_n + (1/gamma) sum_k c_nk psi_k, the first-order eigenstate."""
    if pkg.mixing is None:
        raise ParameterError("corrections not filled")
    vals = pkg.states[n].copy()
    for k in range(pkg.n_states):
        if k != n:
            vals = vals + pkg.mixing[n, k] / pkg.params.gamma * pkg.states[k]
    return ConfigWave(pkg.grid, vals)


@dataclass(frozen=True)
class DecoherenceReport:
    """Outcome of the amplitude-selection estimate for a superposition."""

    rates: np.ndarray                  # per-state amplitude exponents (1/time)
    amplitudes: np.ndarray
    winner: int | None
    runner_up: int | None
    time_estimate: float | None
    dominance_ratio: float
    no_decoherence: bool

    def table(self) -> list[tuple[int, float, float]]:
        return [(n, float(abs(self.amplitudes[n])), float(self.rates[n])) for n in range(len(self.rates))]


def decoherence_report(pkg: EigenPackage, amplitudes, dominance_ratio: float = DOMINANCE_RATIO) -> DecoherenceReport:
    """Select the surviving eigenstate of a superposition and estimate when.

    The winner maximizes the growth rate over states with non-zero
    amplitude; the time estimate solves
    |a_w| e^{r_w t} = R |a_1| e^{r_1 t} against the runner-up.  When all
    competing rates coincide (free or harmonic case) the report flags
    "no decoherence at this order" instead.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    if len(amps) != pkg.n_states:
        raise ParameterError("need one amplitude per retained state")
    nz = np.where(np.abs(amps) > 0)[0]
    if len(nz) == 0:
        raise ParameterError("all amplitudes vanish")
    rates = pkg.growth_rates()
    if len(nz) == 1:
        w = int(nz[0])
        return DecoherenceReport(rates, amps, w, None, 0.0, dominance_ratio, False)
    order = sorted(nz, key=lambda n: rates[n], reverse=True)
    w, ru = int(order[0]), int(order[1])
    gap = rates[w] - rates[ru]
    span = float(rates[nz].max() - rates[nz].min())
    scale = max(float(np.abs(rates[nz]).max()), 1e-300)
    if span <= 1e-10 * scale:
        return DecoherenceReport(rates, amps, None, None, None, dominance_ratio, True)
    t_star = math.log(dominance_ratio * abs(amps[ru]) / abs(amps[w])) / gap
    return DecoherenceReport(rates, amps, w, ru, max(t_star, 0.0), dominance_ratio, False)


def line_width(pkg: EigenPackage, j: int, order: int = 1) -> tuple[float, float]:
    """Mean and spread of the classical energy in the embedded eigenstate.

    Embeds state j on the phase grid, normalizes |phi|^2 to a unit density,
    and takes mean and standard deviation of h(x', p') = p'^2/2 + V'(x') by
    phase-space quadrature.  Returned in scaled energy units (multiply by kT
    for physical energy).
    """
    params, grid = pkg.params, pkg.grid
    if grid.dims != 1:
        raise ParameterError("line widths support dims = 1")
    phi = embed_wave(pkg.state(j), params, pkg.potential, order=order)
    dens = np.abs(phi.values) ** 2
    w = grid.p_weights[None, :] * grid.dx
    mass = float(np.sum(dens * w))
    if mass <= 0:
        raise ParameterError("embedded state has zero mass")
    tables = potential_tables(params, pkg.potential, grid)
    h = tables.v[:, None] + 0.5 * grid.p[None, :] ** 2
    mean = float(np.sum(h * dens * w) / mass)
    var = float(np.sum((h - mean) ** 2 * dens * w) / mass)
    return mean, math.sqrt(max(var, 0.0))


def transition_probability(pkg: EigenPackage, n: int, k: int, order: int = 1) -> float:
    """Squared normalized overlap of the embedded eigenstates n and k."""
    params = pkg.params
    phi_n = embed_wave(pkg.state(n), params, pkg.potential, order=order)
    phi_k = embed_wave(pkg.state(k), params, pkg.potential, order=order)
    num = abs(phi_n.inner(phi_k)) ** 2
    den = (phi_n.norm() * phi_k.norm()) ** 2
    return float(num / den)
