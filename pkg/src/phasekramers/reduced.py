"""Reduced configuration-space dynamics of the slow manifold.

For large gamma the phase-space dynamics split into a fast relaxation onto
the degree-zero shell and a slow drift along it, parameterized by the
configuration wave psi.  Two reduced generators act on psi:

  * the Hermitian limit operator

        H psi = -(hbar^2/2m) Lap psi + V psi - (kT/2) n psi,

  * its first dissipative refinement

        H1 psi = H psi + (i/(4 gamma)) [ (hbar/m) Lap V - (kT)^2 n / hbar ] psi,

whose anti-Hermitian part drives differential amplitude decay between
eigenstates.  The gamma^-1 term equals -i hbar / gamma times the dissipator

        D psi = -(1/4) [ (1/m) Lap V - (kT/hbar)^2 n ] psi,

which this module provides both in closed form and as the literal
lift -> transport -> pseudo-inverse -> transport -> readoff composition on
the phase grid; their agreement is the central cross-check of the solver.

The constant shifts are kept exactly as they appear in the operators; tests
against textbook spectra subtract them explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigWave,
    Grid,
    ModelParams,
    ParameterError,
    PhaseField,
    Potential,
    PotentialTables,
    potential_tables,
)
from .hermite import diffusion_pseudoinverse, lift_wave, shell_wave
from .operators import apply_transport


def _laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.zeros_like(values)
    s2 = grid.freqs**2
    for j in range(grid.dims):
        shape = [1] * grid.dims
        shape[j] = grid.num_x
        out += np.fft.ifft(-s2.reshape(shape) * np.fft.fft(values, axis=j), axis=j)
    return out


def apply_hamiltonian(psi: ConfigWave, params: ModelParams, potential: Potential,
                      tables: PotentialTables | None = None) -> ConfigWave:
    """Hermitian limit generator, spectral Laplacian, constant shift included."""
    g = psi.grid
    if tables is None:
        tables = potential_tables(params, potential, g)
    kt = params.thermal_energy
    vals = kt * (-0.5 * _laplacian(psi.values, g) + (tables.v - 0.5 * g.dims) * psi.values)
    return ConfigWave(g, vals)


def dissipator_closed(psi: ConfigWave, params: ModelParams, potential: Potential,
                      tables: PotentialTables | None = None) -> ConfigWave:
    """Closed form of the slow dissipator (initial coordinates).

    Returns -(1/4) [ (1/m) Lap V - (kT/hbar)^2 n ] psi, evaluated through the
    scaled tables: (1/m) Lap V = (kT/hbar)^2 Lap' V'.
    """
    g = psi.grid
    if tables is None:
        tables = potential_tables(params, potential, g)
    r2 = params.rate**2
    return ConfigWave(g, -0.25 * r2 * (tables.lap - g.dims) * psi.values)


def dissipator_composed(psi: ConfigWave, params: ModelParams, potential: Potential) -> ConfigWave:
    """The same dissipator by literal operator composition on the phase grid.

    Slow readoff after transport, pseudo-inverse diffusion, transport, lift:
    the independent numerical path against the closed form.
    """
    g = psi.grid
    zero = (0,) * g.dims
    phi = lift_wave(zero, psi)
    step = apply_transport(phi, params, potential)
    step = diffusion_pseudoinverse(step)
    step = apply_transport(step, params, potential)
    return shell_wave(zero, step)


def _one_axis_two(k: tuple[int, ...]) -> int | None:
    """Axis index when the multi-index is all zeros except one entry of 2."""
    axis = None
    for j, v in enumerate(k):
        if v == 0:
            continue
        if v != 2 or axis is not None:
            return None
        axis = j
    return axis


def transport_coupling_to_base(k, psi: ConfigWave, params: ModelParams, potential: Potential) -> ConfigWave:
    """Closed form of: slow readoff after transport of a degree-k lift.

    Degree zero gives the (skew) reduced generator
    (kT/hbar)(-i V' psi + (i/2) Lap' psi + (i n/2) psi); a multi-index with a
    single entry equal to 2 gives (i/2)(kT/hbar) psi; everything else
    vanishes.
    """
    g = psi.grid
    k = tuple(int(v) for v in (k if not np.isscalar(k) else (k,)))
    if len(k) != g.dims:
        raise ParameterError("multi-index length != dims")
    rate = params.rate
    if all(v == 0 for v in k):
        tables = potential_tables(params, potential, g)
        vals = rate * (
            -1j * tables.v * psi.values
            + 0.5j * _laplacian(psi.values, g)
            + 0.5j * g.dims * psi.values
        )
        return ConfigWave(g, vals)
    if _one_axis_two(k) is not None:
        return ConfigWave(g, 0.5j * rate * psi.values)
    return ConfigWave(g, np.zeros_like(psi.values))


def transport_coupling_from_base(k, psi: ConfigWave, params: ModelParams, potential: Potential) -> ConfigWave:
    """Closed form of: degree-k readoff after transport of the slow lift.

    Only defined for multi-indices with one entry equal to 2 (total degree 2),
    where it reads (kT/hbar)(-i d2V'/dx'_j^2 psi + i psi).
    """
    g = psi.grid
    k = tuple(int(v) for v in (k if not np.isscalar(k) else (k,)))
    if len(k) != g.dims:
        raise ParameterError("multi-index length != dims")
    axis = _one_axis_two(k)
    if axis is None:
        raise ParameterError(f"multi-index {k} is not a single-axis degree-2 pattern")
    tables = potential_tables(params, potential, g)
    vals = params.rate * (-1j * tables.d2[axis] * psi.values + 1j * psi.values)
    return ConfigWave(g, vals)


def apply_dissipative_hamiltonian(psi: ConfigWave, params: ModelParams, potential: Potential,
                                  tables: PotentialTables | None = None,
                                  route: str = "dissipator") -> ConfigWave:
    """First-refined generator H1.

    Two equivalent routes are implemented: ``"dissipator"`` assembles
    H psi - i hbar/gamma * dissipator_closed(psi); ``"printed"`` adds the
    multiplication term (i/(4 gamma)) [ (hbar/m) Lap V - (kT)^2 n/hbar ] psi
    directly.  They agree to rounding and the tests pin that.
    """
    g = psi.grid
    if tables is None:
        tables = potential_tables(params, potential, g)
    h0 = apply_hamiltonian(psi, params, potential, tables)
    if route == "dissipator":
        d = dissipator_closed(psi, params, potential, tables)
        vals = h0.values - 1j * params.hbar / params.gamma * d.values
    elif route == "printed":
        kt = params.thermal_energy
        corr = (0.25j / params.gamma) * (kt * kt / params.hbar) * (tables.lap - g.dims)
        vals = h0.values + corr * psi.values
    else:
        raise ParameterError(f"unknown route {route!r}")
    return ConfigWave(g, vals)


@dataclass
class ReducedTrajectory:
    """Sampled configuration-space evolution.

    ``log_amp`` tracks the accumulated log of the raw amplitude when the run
    renormalizes, so decay studies survive renormalization.
    """

    times: np.ndarray
    waves: list
    norms: np.ndarray
    log_amp: np.ndarray


def schrodinger_evolve(psi0: ConfigWave, params: ModelParams, potential: Potential,
                       use_h1: bool, t_end: float, dt: float = 1e-3,
                       renormalize: bool = False, output_stride: int = 10,
                       sample_interval: float | None = None) -> ReducedTrajectory:
    """RK4 integration of i hbar dpsi/dt = H psi (or H1 psi).

    In renormalizing mode the reported states are psi/|psi| and the raw
    amplitude is carried in ``log_amp``; the raw mode preserves amplitude
    decay for dissipation studies.  With ``sample_interval`` the stepping
    lands exactly on the sampling boundaries.  Aborts on non-finite values,
    returning the samples up to the last finite state.
    """
    g = psi0.grid
    tables = potential_tables(params, potential, g)
    if use_h1:
        op = lambda v: apply_dissipative_hamiltonian(ConfigWave(g, v), params, potential, tables).values
    else:
        op = lambda v: apply_hamiltonian(ConfigWave(g, v), params, potential, tables).values
    scale = -1j / params.hbar
    f = lambda v: scale * op(v)

    v = np.array(psi0.values, dtype=complex)
    t = 0.0
    log_amp = 0.0
    times, waves, norms, logs = [], [], [], []

    def sample():
        times.append(t)
        waves.append(ConfigWave(g, v))
        norms.append(ConfigWave(g, v).norm())
        logs.append(log_amp)

    sample()
    step_i = 0
    boundary_i = 1
    while t < t_end - 1e-12:
        h = min(dt, t_end - t)
        take_sample = False
        if sample_interval is not None:
            boundary = boundary_i * sample_interval
            if t + h >= boundary - 1e-12:
                h = boundary - t
                take_sample = True
        k1 = f(v)
        k2 = f(v + 0.5 * h * k1)
        k3 = f(v + 0.5 * h * k2)
        k4 = f(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(v).all():
            import warnings

            warnings.warn(f"non-finite reduced state at t={t + h:.6g}; aborting")
            break
        if renormalize:
            n = ConfigWave(g, v).norm()
            if n > 0:
                log_amp += np.log(n)
                v = v / n
        t += h
        step_i += 1
        if sample_interval is not None:
            if take_sample:
                t = boundary_i * sample_interval
                boundary_i += 1
                sample()
            elif t >= t_end - 1e-12:
                sample()
        elif step_i % output_stride == 0 or t >= t_end - 1e-12:
            sample()
    return ReducedTrajectory(np.array(times), waves, np.array(norms), np.array(logs))


def embed_wave(psi: ConfigWave, params: ModelParams, potential: Potential, order: int = 1) -> PhaseField:
    """Phase-space embedding of a configuration wave.

    Order 0 lifts onto the degree-zero shell (Gaussian momentum kernel of
    unit scaled width); order 1 adds the slow-manifold dressing
    -(1/gamma) * pseudoinverse(transport(lift(psi))).  At either order the
    slow readoff returns psi exactly.
    """
    if order not in (0, 1):
        raise ParameterError("order must be 0 or 1")
    g = psi.grid
    zero = (0,) * g.dims
    phi0 = lift_wave(zero, psi)
    if order == 0:
        return phi0
    dressed = diffusion_pseudoinverse(apply_transport(phi0, params, potential))
    return PhaseField(g, phi0.values - dressed.values / params.gamma)
