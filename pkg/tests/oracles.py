"""Independent oracles for the unit tests.

Everything here deliberately avoids the production code paths: Hermite
polynomials come from symbolic differentiation of the Gaussian, generators
are assembled as dense matrices from explicitly-written derivative matrices
and Kronecker products, and quadratures are plain sums.
"""

from __future__ import annotations

import numpy as np


def hermite_by_derivatives(k: int, y: float) -> float:
    """H_k(y) from exp(y^2/2) (-d/dy)^k exp(-y^2/2) with exact coefficients.

    Represents poly(y) * exp(-y^2/2) via integer coefficient arrays and
    applies -d/dy symbolically: poly -> y*poly - poly'.
    """
    coeffs = [1]  # constant polynomial 1
    for _ in range(k):
        shifted = [0] + coeffs                       # y * poly
        deriv = [j * coeffs[j] for j in range(1, len(coeffs))]
        new = [s - (deriv[i] if i < len(deriv) else 0) for i, s in enumerate(shifted)]
        coeffs = new
    return float(sum(c * y**j for j, c in enumerate(coeffs)))


def dft_matrix(n: int, length: float) -> np.ndarray:
    """Collocation matrix of the spectral first derivative on the box."""
    s = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
    F = np.fft.fft(np.eye(n), axis=0) / n            # rows: mode coefficients
    return np.fft.ifft(1j * s[:, None] * F, axis=0) * n


def spectral_dx_dense(n: int, length: float) -> np.ndarray:
    cols = []
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        s = 2.0 * np.pi * np.fft.fftfreq(n, d=length / n)
        cols.append(np.fft.ifft(1j * s * np.fft.fft(e)))
    return np.array(cols).T


def stencil_dp_dense(num_p: int, dp: float) -> np.ndarray:
    """Fourth-order first-derivative matrix with one-sided edge closures."""
    D = np.zeros((num_p, num_p))
    for i in range(2, num_p - 2):
        D[i, i - 2 : i + 3] = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    D[0, 0:5] = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    D[1, 0:5] = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    D[-1, -5:] = -np.array([-25.0, 48.0, -36.0, 16.0, -3.0])[::-1] / 12.0
    D[-2, -5:] = -np.array([-3.0, -10.0, 18.0, -6.0, 1.0])[::-1] / 12.0
    return D / dp


def transport_dense(grid, params, v_scaled: np.ndarray, dv_scaled: np.ndarray) -> np.ndarray:
    """Dense transport generator via Kronecker assembly (dims = 1).

    Field vectors are flattened x-major.  Independent of the production
    FFT/stencil application path.
    """
    nx, npts = grid.num_x, grid.num_p
    Dx = spectral_dx_dense(nx, grid.length)
    Dp = stencil_dp_dense(npts, grid.dp)
    Ix = np.eye(nx)
    Ip = np.eye(npts)
    p = grid.p
    out = np.kron(np.diag(dv_scaled), Dp).astype(complex)
    out -= np.kron(Dx, np.diag(p))
    out -= 1j * (np.kron(np.diag(v_scaled), Ip) - np.kron(Ix, np.diag(0.5 * p * p)))
    return params.rate * out


def diffusion_dense(grid) -> np.ndarray:
    """Dense diffusion generator via Kronecker assembly (dims = 1)."""
    nx, npts = grid.num_x, grid.num_p
    Dx = spectral_dx_dense(nx, grid.length)
    Dp = stencil_dp_dense(npts, grid.dp)
    Ix = np.eye(nx)
    p = grid.p
    inner = np.kron(Ix, Dp @ np.diag(p)).astype(complex)
    inner += 1j * np.kron(Dx, Dp)
    inner += np.kron(Ix, Dp @ Dp)
    return inner


def diffusion_spectral_dense(grid) -> np.ndarray:
    """Matrix of the evolver's spectral diffusion map (transform-sandwiched)."""
    from phasekramers.core import PhaseField
    from phasekramers.hermite import from_spectral, to_spectral
    from phasekramers.operators import apply_diffusion_spectral

    n = grid.num_x * grid.num_p
    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        f = PhaseField(grid, e.reshape(grid.num_x, grid.num_p))
        out[:, j] = from_spectral(apply_diffusion_spectral(to_spectral(f))).values.ravel()
    return out


def phase_weight_vector(grid) -> np.ndarray:
    return np.kron(np.full(grid.num_x, grid.dx), grid.p_weights)
