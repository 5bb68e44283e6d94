"""Hermite shell machinery: the spectral representation in which the
momentum-diffusion generator is diagonal.

Per Fourier mode s of the periodic box, phase fields are expanded in the
shifted weighted polynomials

    e_k(p; s) = H_k(p - s) * exp(-(p - s)^2 / 2),     k = 0 .. k_max,

where H_k are the monic (probabilists') Hermite polynomials,
H_{k+1}(u) = u H_k(u) - k H_{k-1}(u).  The diffusion generator multiplies
the degree-k coefficient by -k, its pseudo-inverse by -1/k, and the shell
projections simply mask degrees.

Coefficients are read off with the orthogonality quadrature

    c_k[s] = 1/(sqrt(2 pi) k!) * integral H_k(p - s) phi_hat[s, p] dp,

restricted to (mode, degree) pairs whose oscillatory support
|p - s| <= sqrt(2 (2k+1)) + margin fits inside the momentum window; pairs
without coverage are dropped (reported through the capture diagnostic)
rather than extracted from garbage tails.

All operations here are pure functions of immutable inputs; the per-mode
structure makes them shardable over Fourier modes with no shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import COVER_MARGIN, ConfigWave, Grid, ParameterError, PhaseField, SpectralField


def factorial(k: int) -> float:
    """k! as float; lgamma-based beyond 20 (not reachable at default shells)."""
    if k <= 20:
        return float(math.factorial(k))
    return math.exp(math.lgamma(k + 1.0))


def hermite_eval(k: int, y) -> np.ndarray:
    """H_k(y) for the exp(-y^2/2) weight, by the three-term recurrence."""
    if k < 0:
        raise ParameterError("degree must be non-negative")
    y = np.asarray(y, dtype=float)
    h_prev = np.zeros_like(y)
    h = np.ones_like(y)
    for j in range(k):
        h, h_prev = y * h - j * h_prev, h
    return h


def hermite_all(y: np.ndarray, k_max: int) -> np.ndarray:
    """Stack H_0(y) .. H_{k_max}(y) along a new leading axis."""
    y = np.asarray(y, dtype=float)
    out = np.zeros((k_max + 1,) + y.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = y
    for k in range(1, k_max):
        out[k + 1] = y * out[k] - k * out[k - 1]
    return out


def orthonormality_defect(k: int, kp: int, grid: Grid) -> float:
    """|normalized cross moment - delta| for degrees (k, kp) on the p grid.

    The normalized moment is 1/(sqrt(2 pi) k!) * integral H_kp H_k e^{-p^2/2} dp;
    a coarse grid shows up as a defect above tolerance, not as an exception.
    """
    p = grid.p
    w = grid.p_weights
    val = np.sum(w * hermite_eval(kp, p) * hermite_eval(k, p) * np.exp(-0.5 * p * p))
    val /= math.sqrt(2.0 * math.pi) * factorial(k)
    return float(abs(val - (1.0 if k == kp else 0.0)))


def shell_indices(dims: int, k_max: int) -> list[tuple[int, ...]]:
    """All Hermite multi-indices with total degree <= k_max."""
    if dims == 1:
        return [(k,) for k in range(k_max + 1)]
    out = []
    for head in range(k_max + 1):
        for rest in shell_indices(dims - 1, k_max - head):
            out.append((head,) + rest)
    return out


@dataclass(frozen=True)
class _Basis:
    synth: np.ndarray      # (num_x, num_p, k_max+1)
    extract: np.ndarray    # (num_x, k_max+1, num_p), zero rows where not kept
    keep: np.ndarray       # (num_x, k_max+1) bool
    inv_norm: np.ndarray   # 1/(sqrt(2 pi) k!)


@lru_cache(maxsize=16)
def _basis(grid: Grid) -> _Basis:
    s = grid.freqs
    p = grid.p
    w = grid.p_weights
    kmax = grid.k_max
    y = p[None, :] - s[:, None]
    H = hermite_all(y, kmax)                      # (K+1, num_x, num_p)
    synth = np.moveaxis(H * np.exp(-0.5 * y * y), 0, -1)
    inv_norm = np.array([1.0 / (math.sqrt(2.0 * math.pi) * factorial(k)) for k in range(kmax + 1)])
    cover = np.minimum(grid.p_max - s, grid.p_max + s)
    need = np.sqrt(2.0 * (2.0 * np.arange(kmax + 1) + 1.0)) + COVER_MARGIN
    keep = cover[:, None] >= need[None, :]
    extract = np.moveaxis(H, 0, 1) * w[None, None, :] * inv_norm[None, :, None]
    extract = np.where(keep[:, :, None], extract, 0.0)
    return _Basis(synth=synth, extract=extract, keep=keep, inv_norm=inv_norm)


@lru_cache(maxsize=16)
def _degree_total(grid: Grid) -> np.ndarray:
    """Total degree per coefficient cell, shape (k_max+1,)*dims."""
    k = np.arange(grid.k_max + 1)
    total = np.zeros((grid.k_max + 1,) * grid.dims, dtype=int)
    for j in range(grid.dims):
        sl = [None] * grid.dims
        sl[j] = slice(None)
        total = total + k[tuple(sl)]
    return total


def _fourier_coeffs(values: np.ndarray, naxes: int) -> np.ndarray:
    out = values
    for ax in range(naxes):
        out = np.fft.fft(out, axis=ax) / out.shape[ax]
    return out


def _fourier_synth(coeffs: np.ndarray, naxes: int, axes: list[int]) -> np.ndarray:
    out = coeffs
    for ax in axes:
        out = np.fft.ifft(out, axis=ax) * out.shape[ax]
    return out


def to_spectral(field: PhaseField) -> SpectralField:
    """Grid field -> shell coefficients (Fourier in x', quadrature in p')."""
    g = field.grid
    n = g.dims
    b = _basis(g)
    labels = list(range(2 * n))
    T = _fourier_coeffs(field.values, n)
    for j in range(n):
        out_labels = [2 * n + j if l == n + j else l for l in labels]
        T = np.einsum(b.extract, [j, 2 * n + j, n + j], T, labels, out_labels)
        labels = out_labels
    order = [labels.index(2 * n + j) for j in range(n)] + [labels.index(j) for j in range(n)]
    coeffs = np.transpose(T, order)
    mask = _degree_total(g) <= g.k_max
    coeffs = coeffs * mask.reshape(mask.shape + (1,) * n)
    return SpectralField(g, coeffs)


def from_spectral(spec: SpectralField) -> PhaseField:
    """Shell coefficients -> grid field (exact synthesis)."""
    g = spec.grid
    n = g.dims
    b = _basis(g)
    labels = [2 * n + j for j in range(n)] + list(range(n))
    T = spec.coeffs
    for j in range(n):
        out_labels = [n + j if l == 2 * n + j else l for l in labels]
        T = np.einsum(b.synth, [j, n + j, 2 * n + j], T, labels, out_labels)
        labels = out_labels
    order = [labels.index(j) for j in range(n)] + [labels.index(n + j) for j in range(n)]
    phat = np.transpose(T, order)
    values = _fourier_synth(phat, n, list(range(n)))
    return PhaseField(g, values)


def _as_multi(k, dims: int) -> tuple[int, ...]:
    if np.isscalar(k):
        if dims != 1:
            raise ParameterError("a multi-index is required for dims > 1")
        k = (int(k),)
    k = tuple(int(v) for v in k)
    if len(k) != dims:
        raise ParameterError(f"multi-index length {len(k)} != dims {dims}")
    if any(v < 0 for v in k):
        raise ParameterError("degrees must be non-negative")
    return k


# Modes whose shifted kernel has less than this much momentum-window support
# carry no representable signal; the unweighted polynomial read is zeroed
# there, since |H_k| ~ |s|^k at the window edge would only amplify rounding
# noise of grid fields.
READ_SUPPORT_MIN = 1.0


def shell_wave(k, field: PhaseField) -> ConfigWave:
    """Read off the configuration wave parameterizing shell k.

    Implements the momentum quadrature of H_k applied at the Fourier-shifted
    argument: transform in x', multiply by H_{k_j}(p'_j - s_j) per axis,
    integrate over p', transform back.  Degree zero is the momentum marginal.
    """
    g = field.grid
    n = g.dims
    k = _as_multi(k, n)
    s = g.freqs
    p = g.p
    w = g.p_weights
    supported = np.minimum(g.p_max - s, g.p_max + s) >= READ_SUPPORT_MIN
    T = _fourier_coeffs(field.values, n)
    labels = list(range(2 * n))
    for j in range(n):
        Q = hermite_eval(k[j], p[None, :] - s[:, None]) * w[None, :]
        if k[j] > 0:
            Q = np.where(supported[:, None], Q, 0.0)
        out_labels = [l for l in labels if l != n + j]
        T = np.einsum(Q, [j, n + j], T, labels, out_labels)
        labels = out_labels
    values = _fourier_synth(T, n, list(range(n)))
    return ConfigWave(g, values)


def lift_wave(k, psi: ConfigWave) -> PhaseField:
    """Embed a configuration wave into the degree-k shell.

    Per Fourier mode s the synthesized p' profile is the normalized
    H_k(p'-s) exp(-(p'-s)^2/2); degree zero is the coherent smearing onto
    the slow subspace.  Inverse of :func:`shell_wave` on its shell.
    """
    g = psi.grid
    n = g.dims
    k = _as_multi(k, n)
    b = _basis(g)
    T = _fourier_coeffs(psi.values, n)
    labels = list(range(n))
    for j in range(n):
        Sj = b.synth[:, :, k[j]] * b.inv_norm[k[j]]
        labels_out = labels + [n + j]
        T = np.einsum(Sj, [j, n + j], T, labels, labels_out)
        labels = labels_out
    values = _fourier_synth(T, n, list(range(n)))
    return PhaseField(g, values)


def lift_wave_kernel(k, psi: ConfigWave) -> PhaseField:
    """Gaussian-kernel form of :func:`lift_wave`: direct x'' quadrature.

    Evaluates, per axis, the convolution with
    (-i)^k / (2 pi k!) * d^k exp(-d^2/2) exp(i p d), d the minimal-image
    displacement on the periodic box.  Independent evaluation path used to
    cross-check the Fourier-shifted synthesis.
    """
    g = psi.grid
    n = g.dims
    k = _as_multi(k, n)
    x = g.x
    p = g.p
    d = x[:, None] - x[None, :]
    d = (d + 0.5 * g.length) % g.length - 0.5 * g.length
    if n == 1:
        kj = k[0]
        base = (d**kj) * np.exp(-0.5 * d * d) * g.dx * ((-1j) ** kj) / (2.0 * np.pi * factorial(kj))
        out = np.empty((g.num_x, g.num_p), dtype=complex)
        chunk = max(1, int(2**22 // (g.num_x * g.num_x)))
        for i0 in range(0, g.num_p, chunk):
            pi = p[i0 : i0 + chunk]
            block = base[None, :, :] * np.exp(1j * pi[:, None, None] * d[None, :, :])
            out[:, i0 : i0 + chunk] = np.einsum("ibc,c->bi", block, psi.values)
        return PhaseField(g, out)
    T = psi.values
    labels = list(range(n))
    for j in range(n):
        kj = k[j]
        M = (
            (d[:, :, None] ** kj)
            * np.exp(-0.5 * d[:, :, None] ** 2)
            * np.exp(1j * p[None, None, :] * d[:, :, None])
            * g.dx
            * ((-1j) ** kj)
            / (2.0 * np.pi * factorial(kj))
        )
        hi = 2 * n + j
        in_labels = [hi if l == j else l for l in labels]
        out_labels = [l for l in labels if l != j] + [j, n + j]
        # relabel the x'' axis to hi, contract it, emitting (x'_j, p'_j)
        T = np.einsum(M, [j, hi, n + j], T, in_labels, out_labels)
        labels = out_labels
    order = [labels.index(j) for j in range(n)] + [labels.index(n + j) for j in range(n)]
    return PhaseField(g, np.transpose(T, order))


def project_shell(k_total: int, field: PhaseField) -> PhaseField:
    """Project onto the total-degree-k eigenspace of the diffusion generator.

    Equals the sum over multi-indices of total degree k of lift-after-readoff;
    implemented by masking the shell coefficients.
    """
    g = field.grid
    if k_total < 0 or k_total > g.k_max:
        raise ParameterError(f"shell {k_total} outside [0, {g.k_max}]")
    spec = to_spectral(field)
    total = _degree_total(g)
    coeffs = np.where((total == k_total).reshape(total.shape + (1,) * g.dims), spec.coeffs, 0.0)
    return from_spectral(SpectralField(g, coeffs))


def diffusion_pseudoinverse(field: PhaseField) -> PhaseField:
    """Invert the diffusion generator on the non-zero shells.

    Scales degree-k coefficients by -1/k for k >= 1 and annihilates the
    degree-zero component.
    """
    g = field.grid
    spec = to_spectral(field)
    total = _degree_total(g).astype(float)
    scale = np.zeros_like(total)
    nz = total > 0
    scale[nz] = -1.0 / total[nz]
    coeffs = spec.coeffs * scale.reshape(scale.shape + (1,) * g.dims)
    return from_spectral(SpectralField(g, coeffs))


def reconstruct(field: PhaseField) -> PhaseField:
    """Round trip through the shell representation (the retained part)."""
    return from_spectral(to_spectral(field))


def spectral_capture(field: PhaseField) -> float:
    """Representation fidelity: 1 - |reconstruct(field) - field| / |field|.

    Exactly 1 for representable fields; runs should warn when this drops
    below 1 - 1e-6.  Losses come from total degrees above k_max, coverage
    cuts, or Fourier modes whose shifted kernel misses the p' window; far
    out-of-span content can drive the value negative (the quadrature readoff
    is a biorthogonal functional, not an orthogonal projection).
    """
    nrm = field.norm()
    if nrm == 0:
        return 1.0
    defect = PhaseField(field.grid, reconstruct(field).values - field.values).norm()
    return 1.0 - defect / nrm


def synthesize_shells(
    grid: Grid,
    shell_weights: dict[int, float],
    band_limit: float,
    seed: int,
) -> PhaseField:
    """Random band-limited field with prescribed per-shell weights.

    Draws complex Gaussian coefficients on Fourier modes |s| <= band_limit
    for every multi-index whose total degree has an entry in
    ``shell_weights``, scales each total-degree block to the given weight.
    Deterministic for fixed seed.
    """
    rng = np.random.default_rng(seed)
    n = grid.dims
    total = _degree_total(grid)
    coeffs = np.zeros(grid.spectral_shape(), dtype=complex)
    band = np.ones((grid.num_x,) * n, dtype=bool)
    for j in range(n):
        sl = [None] * n
        sl[j] = slice(None)
        band &= (np.abs(grid.freqs) <= band_limit)[tuple(sl)]
    for idx in np.ndindex(*total.shape):
        wgt = shell_weights.get(int(total[idx]), 0.0)
        if wgt == 0.0:
            continue
        block = np.zeros((grid.num_x,) * n, dtype=complex)
        nb = int(band.sum())
        block[band] = rng.normal(size=nb) + 1j * rng.normal(size=nb)
        coeffs[idx] = block
    field = from_spectral(SpectralField(grid, coeffs))
    # renormalize each total-degree block on the grid to its requested weight
    parts = []
    for k_tot, wgt in sorted(shell_weights.items()):
        part = project_shell(k_tot, field)
        nrm = part.norm()
        if nrm > 0:
            parts.append(part.values * (wgt / nrm))
    if not parts:
        raise ParameterError("no non-zero shell weights given")
    return PhaseField(grid, np.sum(parts, axis=0))
