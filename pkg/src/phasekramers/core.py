"""Domain types shared across the solver stack.

Unit conventions
----------------
Physical inputs carry explicit scales: mass ``m``, action ``hbar``, thermal
energy ``kT`` and the resistance rate ``gamma`` (inverse time).  All grid
computation happens in the scaled variables

    x' = x * sqrt(kT * m) / hbar        (position)
    p' = p / sqrt(kT * m)               (momentum)
    V' = V / kT                         (potential)

on a periodic box x' in [0, L) and a truncated momentum window
p' in [-P, P].  Time is *not* rescaled; every generator built from these
types carries the physical rate kT/hbar explicitly, so trajectories computed
in scaled variables evolve in physical time.

Quadrature: periodic trapezoid (uniform weight dx) along x', plain trapezoid
along p'.  Inner products conjugate the second argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np


class ParameterError(ValueError):
    """Invalid physical parameters or grid settings."""


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one model instance.

    ``gamma`` is the medium resistance per unit mass (1/time): the large
    stiffness parameter of the full phase-space dynamics.
    """

    mass: float
    hbar: float
    thermal_energy: float
    gamma: float
    dims: int = 1

    def __post_init__(self):
        for name in ("mass", "hbar", "thermal_energy", "gamma"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and positive, got {v!r}")
        if self.dims < 1:
            raise ParameterError(f"dims must be >= 1, got {self.dims}")

    @property
    def momentum_scale(self) -> float:
        """sqrt(kT*m): thermal momentum, the p -> p' divisor."""
        return math.sqrt(self.thermal_energy * self.mass)

    @property
    def length_scale(self) -> float:
        """hbar/sqrt(kT*m): the x -> x' divisor."""
        return self.hbar / self.momentum_scale

    @property
    def rate(self) -> float:
        """kT/hbar: the frequency prefactor of the transport generator."""
        return self.thermal_energy / self.hbar


@dataclass(frozen=True)
class Potential:
    """External potential with analytic first and second derivatives.

    The callables act elementwise on physical positions of one coordinate.
    For ``dims > 1`` the solver uses the separable sum V(x) = sum_j V(x_j),
    which covers every named family used in the experiments.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]

    @staticmethod
    def zero() -> "Potential":
        z = lambda x: np.zeros_like(np.asarray(x, dtype=float))
        return Potential("zero", z, z, z)

    @staticmethod
    def harmonic(mass: float, omega: float, center: float = 0.0) -> "Potential":
        """V = (1/2) m omega^2 (x - center)^2."""
        mw2 = mass * omega * omega
        return Potential(
            "harmonic",
            lambda x: 0.5 * mw2 * (np.asarray(x, float) - center) ** 2,
            lambda x: mw2 * (np.asarray(x, float) - center),
            lambda x: np.full_like(np.asarray(x, float), mw2),
        )

    @staticmethod
    def quartic(coefficient: float = 1.0, center: float = 0.0) -> "Potential":
        """V = c (x - center)^4."""
        c = float(coefficient)
        return Potential(
            "quartic",
            lambda x: c * (np.asarray(x, float) - center) ** 4,
            lambda x: 4.0 * c * (np.asarray(x, float) - center) ** 3,
            lambda x: 12.0 * c * (np.asarray(x, float) - center) ** 2,
        )

    @staticmethod
    def tabulated(xs: np.ndarray, vs: np.ndarray) -> "Potential":
        """Cubic-spline interpolant of sampled values; derivatives from the spline."""
        from scipy.interpolate import CubicSpline

        spline = CubicSpline(np.asarray(xs, float), np.asarray(vs, float))
        d1 = spline.derivative(1)
        d2 = spline.derivative(2)
        return Potential("tabulated", spline, d1, d2)


# Coverage margin for the per-mode Hermite shell cut, in p' units beyond the
# oscillatory support sqrt(2*(2k+1)) of the degree-k weighted polynomial.
COVER_MARGIN = 2.5


@dataclass(frozen=True)
class Grid:
    """Tensor grid: periodic x' box, truncated p' window, Hermite shell cap.

    ``num_x`` must be a power of two (transform efficiency); ``p_max >= 6``
    so the unit-width momentum kernel fits with room to spare; ``k_max``
    bounds the total Hermite degree retained by the spectral representation.
    """

    length: float
    num_x: int
    p_max: float
    num_p: int
    k_max: int
    dims: int = 1

    def __post_init__(self):
        if self.length <= 0:
            raise ParameterError("length must be positive")
        if self.num_x < 4 or (self.num_x & (self.num_x - 1)) != 0:
            raise ParameterError(f"num_x must be a power of two >= 4, got {self.num_x}")
        if self.p_max < 6:
            raise ParameterError(f"p_max must be >= 6, got {self.p_max}")
        if self.num_p < 8:
            raise ParameterError(f"num_p must be >= 8, got {self.num_p}")
        if self.k_max < 4:
            raise ParameterError(f"k_max must be >= 4, got {self.k_max}")
        if self.dims < 1:
            raise ParameterError("dims must be >= 1")

    @property
    def dx(self) -> float:
        return self.length / self.num_x

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / (self.num_p - 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.num_x) * self.dx

    @property
    def p(self) -> np.ndarray:
        return np.linspace(-self.p_max, self.p_max, self.num_p)

    @property
    def freqs(self) -> np.ndarray:
        """Angular wavenumbers s of the periodic box, in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.num_x, d=self.dx)

    @property
    def p_weights(self) -> np.ndarray:
        w = np.full(self.num_p, self.dp)
        w[0] = w[-1] = 0.5 * self.dp
        return w

    def phase_shape(self) -> tuple:
        return (self.num_x,) * self.dims + (self.num_p,) * self.dims

    def config_shape(self) -> tuple:
        return (self.num_x,) * self.dims

    def spectral_shape(self) -> tuple:
        return (self.k_max + 1,) * self.dims + (self.num_x,) * self.dims


def _phase_weights(grid: Grid) -> np.ndarray:
    w = np.array([1.0])
    for _ in range(grid.dims):
        w = np.multiply.outer(w, grid.p_weights)
    return w.reshape((1,) * grid.dims + (grid.num_p,) * grid.dims) * grid.dx**grid.dims


def _lock(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PhaseField:
    """Complex wave function phi[x', p'] sampled on the tensor grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _lock(self.values)
        if v.shape != self.grid.phase_shape():
            raise ParameterError(f"phase field shape {v.shape} != {self.grid.phase_shape()}")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        w = _phase_weights(self.grid)
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * w).real))

    def inner(self, other: "PhaseField") -> complex:
        w = _phase_weights(self.grid)
        return complex(np.sum(self.values * np.conj(other.values) * w))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Shell coefficients c_k[s] of the x'-Fourier x Hermite expansion.

    The represented function is, per Fourier mode s of the box,

        phi_hat[s, p'] = sum_k c_k[s] * H_k(p' - s) * exp(-(p'-s)^2 / 2),

    with H_k the monic Hermite polynomials for the exp(-u^2/2) weight.
    Axes: ``dims`` Hermite-degree axes first, then ``dims`` Fourier axes.
    Entries with total degree above ``k_max`` are identically zero.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = _lock(self.coeffs)
        if c.shape != self.grid.spectral_shape():
            raise ParameterError(f"coeff shape {c.shape} != {self.grid.spectral_shape()}")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True, eq=False)
class ConfigWave:
    """Complex wave psi[x'] on the configuration grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _lock(self.values)
        if v.shape != self.grid.config_shape():
            raise ParameterError(f"config wave shape {v.shape} != {self.grid.config_shape()}")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2).real * self.grid.dx**self.grid.dims))

    def inner(self, other: "ConfigWave") -> complex:
        return complex(np.sum(self.values * np.conj(other.values)) * self.grid.dx**self.grid.dims)

    def normalized(self) -> "ConfigWave":
        n = self.norm()
        if n == 0:
            raise ParameterError("cannot normalize the zero wave")
        return ConfigWave(self.grid, self.values / n)


class DimensionlessData(NamedTuple):
    x: np.ndarray | float | None
    p: np.ndarray | float | None
    v: np.ndarray | float | None


def to_dimensionless(params: ModelParams, x=None, p=None, potential: Potential | None = None) -> DimensionlessData:
    """Map physical (x, p, V) to scaled (x', p', V').

    ``potential`` is evaluated at ``x`` and scaled by 1/kT, so the returned
    ``v`` is the dimensionless potential sampled at the scaled positions.
    """
    xs = None if x is None else np.asarray(x, float) / params.length_scale
    ps = None if p is None else np.asarray(p, float) / params.momentum_scale
    vs = None
    if potential is not None:
        if x is None:
            raise ParameterError("potential conversion needs positions x")
        vs = potential.value(np.asarray(x, float)) / params.thermal_energy
    return DimensionlessData(xs, ps, vs)


def from_dimensionless(params: ModelParams, x=None, p=None, v=None) -> DimensionlessData:
    """Inverse of :func:`to_dimensionless`; composes with it to the identity."""
    xs = None if x is None else np.asarray(x, float) * params.length_scale
    ps = None if p is None else np.asarray(p, float) * params.momentum_scale
    vs = None if v is None else np.asarray(v, float) * params.thermal_energy
    return DimensionlessData(xs, ps, vs)


class PotentialTables(NamedTuple):
    """Dimensionless potential arrays on the grid (separable for dims > 1)."""

    v: np.ndarray                 # V'(x') summed over axes
    dv: tuple                     # dV'/dx'_j per axis, broadcast to config shape
    d2: tuple                     # d2V'/dx'_j^2 per axis
    lap: np.ndarray               # sum_j d2V'/dx'_j^2


def potential_tables(params: ModelParams, potential: Potential, grid: Grid) -> PotentialTables:
    """Evaluate V', its gradient and Laplacian on the scaled grid.

    Chain rule of the x -> x' scaling: each x'-derivative carries one factor
    of the length scale.
    """
    lam = params.length_scale
    kt = params.thermal_energy
    x_phys = grid.x * lam
    v1 = potential.value(x_phys) / kt
    g1 = potential.grad(x_phys) * lam / kt
    l1 = potential.laplacian(x_phys) * lam * lam / kt
    n = grid.dims
    shape = grid.config_shape()
    v = np.zeros(shape)
    lap = np.zeros(shape)
    dv = []
    d2 = []
    for j in range(n):
        sl = [None] * n
        sl[j] = slice(None)
        v = v + v1[tuple(sl)]
        lap = lap + l1[tuple(sl)]
        dv.append(np.broadcast_to(g1[tuple(sl)], shape))
        d2.append(np.broadcast_to(l1[tuple(sl)], shape))
    return PotentialTables(v, tuple(dv), tuple(d2), lap)
