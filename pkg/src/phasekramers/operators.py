"""Grid discretizations of the two generators of the phase-space dynamics.

The transport generator (skew-Hermitian) combines classical advection with
the quantum phase:

    (kT/hbar) * [ sum_j ( dV'/dx'_j * dphi/dp'_j - p'_j * dphi/dx'_j )
                  - i (V' - sum_j p'_j^2 / 2) phi ].

The diffusion generator drives momentum relaxation:

    sum_j d/dp'_j [ (p'_j + i d/dx'_j) phi + dphi/dp'_j ],

is neither skew-Hermitian nor self-adjoint, and is exactly diagonal in the
shell representation, where it multiplies degree-k coefficients by -k.

x'-derivatives are spectral (periodic box); p'-derivatives use fourth-order
central stencils with one-sided closures at the window edges, relying on the
fields' Gaussian decay there.
"""

from __future__ import annotations

import warnings

import numpy as np

from .core import Grid, ModelParams, PhaseField, Potential, PotentialTables, SpectralField, potential_tables
from .hermite import _degree_total

BOUNDARY_DECAY_TOL = 1e-10

_D1_INT = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def _dp1(values: np.ndarray, dp: float, axis: int) -> np.ndarray:
    """Fourth-order first derivative along one momentum axis."""
    f = np.moveaxis(values, axis, -1)
    g = np.empty_like(f)
    g[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / 12.0
    for out_i, c in ((0, _D1_EDGE0), (1, _D1_EDGE1)):
        g[..., out_i] = sum(c[j] * f[..., j] for j in range(5))
        g[..., -1 - out_i] = -sum(c[j] * f[..., -1 - j] for j in range(5))
    return np.moveaxis(g, -1, axis) / dp


def _dx1(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Spectral first derivative along one position axis."""
    s = grid.freqs
    shape = [1] * values.ndim
    shape[axis] = grid.num_x
    return np.fft.ifft(1j * s.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis)


def apply_transport(field: PhaseField, params: ModelParams, potential: Potential,
                    tables: PotentialTables | None = None) -> PhaseField:
    """Apply the transport generator on the grid."""
    g = field.grid
    if tables is None:
        tables = potential_tables(params, potential, g)
    return PhaseField(g, _transport_values(field.values, g, params, tables))


def _transport_values(values: np.ndarray, grid: Grid, params: ModelParams,
                      tables: PotentialTables) -> np.ndarray:
    n = grid.dims
    p = grid.p
    cfg = (slice(None),) * n + (None,) * n
    out = np.zeros_like(values)
    psq = np.zeros((1,) * n + (grid.num_p,) * n)
    for j in range(n):
        shape = [1] * 2 * n
        shape[n + j] = grid.num_p
        pj = p.reshape(shape)
        psq = psq + 0.5 * pj * pj
        out += tables.dv[j][cfg] * _dp1(values, grid.dp, n + j)
        out -= pj * _dx1(values, grid, j)
    out -= 1j * (tables.v[cfg] - psq) * values
    return params.rate * out


def apply_diffusion(field: PhaseField) -> PhaseField:
    """Apply the diffusion generator on the grid.

    Warns when the field has not decayed at the momentum boundary
    (relative magnitude above ``BOUNDARY_DECAY_TOL``); the one-sided edge
    stencils assume decay there.
    """
    g = field.grid
    n = g.dims
    values = field.values
    peak = np.abs(values).max()
    if peak > 0:
        edge = 0.0
        for j in range(n):
            sl0 = [slice(None)] * 2 * n
            sl0[n + j] = 0
            sl1 = [slice(None)] * 2 * n
            sl1[n + j] = -1
            edge = max(edge, np.abs(values[tuple(sl0)]).max(), np.abs(values[tuple(sl1)]).max())
        if edge > BOUNDARY_DECAY_TOL * peak:
            warnings.warn(
                f"momentum-boundary magnitude {edge:.3e} exceeds {BOUNDARY_DECAY_TOL:.0e} "
                f"of the field peak {peak:.3e}; edge stencils assume decay",
                stacklevel=2,
            )
    out = np.zeros_like(values)
    for j in range(n):
        shape = [1] * 2 * n
        shape[n + j] = g.num_p
        pj = g.p.reshape(shape)
        u = pj * values + 1j * _dx1(values, g, j) + _dp1(values, g.dp, n + j)
        out += _dp1(u, g.dp, n + j)
    return PhaseField(g, out)


def apply_diffusion_spectral(spec: SpectralField) -> SpectralField:
    """Diagonal action in the shell representation: c_k -> -|k| c_k."""
    g = spec.grid
    total = _degree_total(g)
    return SpectralField(g, spec.coeffs * (-total.reshape(total.shape + (1,) * g.dims)))


def transport_norm_estimate(grid: Grid, params: ModelParams, potential: Potential) -> float:
    """Spectral-radius heuristic of the transport generator on retained shells.

    Combines the largest phase multiplier |V' - p'^2/2|, the advection
    p_max * s_eff over representable Fourier modes, and the momentum
    advection max|dV'/dx'| times the resolved shell bandwidth
    sqrt(2 k_max + 1)/sqrt(2).  Used by the evolver's startup check.
    """
    tables = potential_tables(params, potential, grid)
    n = grid.dims
    psq = np.zeros((1,) * n + (grid.num_p,) * n)
    for j in range(n):
        shape = [1] * 2 * n
        shape[n + j] = grid.num_p
        pj = grid.p.reshape(shape)
        psq = psq + 0.5 * pj * pj
    phase = np.abs(tables.v[(slice(None),) * n + (None,) * n] - psq).max()
    s_eff = min(float(np.abs(grid.freqs).max()), grid.p_max - 2.0)
    adv_x = grid.p_max * s_eff * n
    shell_bw = np.sqrt(2.0 * grid.k_max + 1.0) / np.sqrt(2.0)
    adv_p = sum(float(np.abs(d).max()) for d in tables.dv) * shell_bw
    return float(phase + adv_x + adv_p)
