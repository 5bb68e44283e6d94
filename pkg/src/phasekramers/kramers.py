"""Time integration of the full phase-space dynamics

    dphi/dt = transport(phi) + gamma * diffusion(phi),

stiff in gamma.  The default scheme is Strang splitting with the stiff half
steps taken exactly: the diffusion generator is diagonal in the shell
representation, so its exponential is the multiplier exp(-gamma k dt) per
total degree k.  The explicit middle step integrates the transport generator
with classical RK4 on the grid.  Second order in dt, unconditionally stable
in the stiff part.

A first-order IMEX variant (explicit transport Euler, exact implicit
diffusion solve) is kept as a cross-check scheme.

The true dynamics do not conserve the norm (the diffusion part is
dissipative); the evolver never renormalizes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import Grid, ModelParams, ParameterError, PhaseField, Potential, SpectralField, potential_tables
from .hermite import _degree_total, from_spectral, project_shell, to_spectral
from .operators import _transport_values, transport_norm_estimate

_SCHEMES = ("exponential-splitting", "imex")

# Startup heuristic: dt * rate * |transport|_est must stay below this.
EXPLICIT_STABILITY_LIMIT = 0.5


class StabilityError(ParameterError):
    """Chosen step size violates the explicit-part stability heuristic."""


@dataclass(frozen=True)
class EvolverConfig:
    """Step-size and output policy for one evolution run.

    ``dt`` is the slow-phase step (default min(0.01, 0.1/gamma)); the first
    ``transient_time`` units (default 10/gamma) are resolved with the finer
    ``transient_dt`` (default min(dt, 0.1/gamma)) to capture the initial
    relaxation.
    """

    gamma: float
    t_end: float
    dt: float | None = None
    scheme: str = "exponential-splitting"
    output_stride: int = 10
    sample_interval: float | None = None
    transient_time: float | None = None
    transient_dt: float | None = None
    store_fields: bool = False

    def __post_init__(self):
        if self.gamma <= 0:
            raise ParameterError("gamma must be positive")
        if self.t_end < 0:
            raise ParameterError("t_end must be non-negative")
        object.__setattr__(self, "scheme", str(self.scheme).lower())
        if self.scheme not in _SCHEMES:
            raise ParameterError(f"scheme must be one of {_SCHEMES}")
        if self.output_stride < 1:
            raise ParameterError("output_stride must be >= 1")
        if self.sample_interval is not None and self.sample_interval <= 0:
            raise ParameterError("sample_interval must be positive")

    @property
    def slow_dt(self) -> float:
        return self.dt if self.dt is not None else min(0.01, 0.1 / self.gamma)

    @property
    def fast_dt(self) -> float:
        return self.transient_dt if self.transient_dt is not None else min(self.slow_dt, 0.1 / self.gamma)

    @property
    def fast_until(self) -> float:
        return self.transient_time if self.transient_time is not None else 10.0 / self.gamma


@dataclass
class Trajectory:
    """Sampled evolution: times, per-shell norms, and optional snapshots."""

    times: np.ndarray
    total_norm: np.ndarray
    mode_norms: np.ndarray            # (samples, k_max+1)
    slow_waves: list                  # ConfigWave at each sample (degree-0 readoff)
    fields: list | None = None        # PhaseField snapshots when stored
    aborted: bool = False
    capture: float = 1.0              # shell-representation fidelity of the initial field


def mode_norms(field: PhaseField) -> list[tuple[int, float]]:
    """Norms of the total-degree projections, k = 0 .. k_max."""
    return [(k, project_shell(k, field).norm()) for k in range(field.grid.k_max + 1)]


class KramersEvolver:
    """Drives one grid/potential/parameter combination through time."""

    def __init__(self, params: ModelParams, potential: Potential, grid: Grid, config: EvolverConfig):
        if grid.dims != params.dims:
            raise ParameterError("grid dims != params dims")
        self.params = params
        self.potential = potential
        self.grid = grid
        self.config = config
        self.tables = potential_tables(params, potential, grid)
        total = _degree_total(grid)
        self._degrees = total.reshape(total.shape + (1,) * grid.dims)
        est = transport_norm_estimate(grid, params, potential)
        worst = max(config.slow_dt, config.fast_dt) * params.rate * est
        if worst > EXPLICIT_STABILITY_LIMIT:
            raise StabilityError(
                f"dt*rate*|transport|_est = {worst:.3g} exceeds {EXPLICIT_STABILITY_LIMIT}; "
                f"reduce dt below {EXPLICIT_STABILITY_LIMIT / (params.rate * est):.3e}"
            )

    # -- single steps ------------------------------------------------------

    def _transport_rk4(self, values: np.ndarray, dt: float) -> np.ndarray:
        f = lambda v: _transport_values(v, self.grid, self.params, self.tables)
        k1 = f(values)
        k2 = f(values + 0.5 * dt * k1)
        k3 = f(values + 0.5 * dt * k2)
        k4 = f(values + dt * k3)
        return values + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step_coeffs(self, coeffs: np.ndarray, dt: float) -> np.ndarray:
        g = self.grid
        if self.config.scheme == "exponential-splitting":
            half = np.exp(-self.config.gamma * self._degrees * (0.5 * dt))
            c = coeffs * half
            phi = from_spectral(SpectralField(g, c))
            mid = self._transport_rk4(phi.values, dt)
            c = to_spectral(PhaseField(g, mid)).coeffs * half
            return c
        # IMEX Euler: explicit transport, exact diagonal implicit diffusion
        phi = from_spectral(SpectralField(g, coeffs))
        adv = to_spectral(PhaseField(g, _transport_values(phi.values, g, self.params, self.tables)))
        return (coeffs + dt * adv.coeffs) / (1.0 + self.config.gamma * self._degrees * dt)

    def step(self, state: SpectralField, dt: float | None = None) -> SpectralField:
        dt = self.config.slow_dt if dt is None else dt
        return SpectralField(self.grid, self.step_coeffs(state.coeffs, dt))

    # -- trajectories ------------------------------------------------------

    def _shell_norms(self, coeffs: np.ndarray) -> np.ndarray:
        g = self.grid
        out = np.zeros(g.k_max + 1)
        for k in range(g.k_max + 1):
            masked = np.where(self._degrees == k, coeffs, 0.0)
            out[k] = from_spectral(SpectralField(g, masked)).norm()
        return out

    def evolve(self, field0: PhaseField) -> Trajectory:
        """Run to t_end, sampling every ``output_stride`` steps, or exactly at
        multiples of ``sample_interval`` when that is set (steps shorten to
        land on the boundaries, so samples compare time-aligned across runs
        with different step sizes).

        On NaN/overflow the run stops and the trajectory is returned with
        ``aborted=True`` holding the samples up to the last finite state.
        """
        from .hermite import shell_wave

        from .hermite import spectral_capture

        cfg = self.config
        g = self.grid
        capture = spectral_capture(field0)
        if capture < 1.0 - 1e-6:
            warnings.warn(
                f"shell representation captures only {capture:.9f} of the initial field "
                f"(below 1 - 1e-6); raise k_max or widen the momentum window"
            )
        coeffs = to_spectral(field0).coeffs
        t = 0.0
        times, totals, shells, slows = [], [], [], []
        fields = [] if cfg.store_fields else None
        aborted = False

        def sample():
            phi = from_spectral(SpectralField(g, coeffs))
            times.append(t)
            totals.append(phi.norm())
            shells.append(self._shell_norms(coeffs))
            slows.append(shell_wave((0,) * g.dims, phi))
            if fields is not None:
                fields.append(phi)

        sample()
        step_i = 0
        boundary_i = 1
        while t < cfg.t_end - 1e-12:
            dt = cfg.fast_dt if t < cfg.fast_until - 1e-12 else cfg.slow_dt
            dt = min(dt, cfg.t_end - t)
            take_sample = False
            if cfg.sample_interval is not None:
                boundary = boundary_i * cfg.sample_interval
                if t + dt >= boundary - 1e-12:
                    dt = boundary - t
                    take_sample = True
            nxt = self.step_coeffs(coeffs, dt)
            if not np.isfinite(nxt).all():
                warnings.warn(f"non-finite state at t={t + dt:.6g}; aborting with last finite state")
                aborted = True
                break
            coeffs = nxt
            t += dt
            step_i += 1
            if cfg.sample_interval is not None:
                if take_sample:
                    t = boundary_i * cfg.sample_interval   # suppress accumulation drift
                    boundary_i += 1
                    sample()
                elif t >= cfg.t_end - 1e-12:
                    sample()
            elif step_i % cfg.output_stride == 0 or t >= cfg.t_end - 1e-12:
                sample()
        if aborted and (not times or times[-1] < t):
            sample()
        return Trajectory(
            times=np.array(times),
            total_norm=np.array(totals),
            mode_norms=np.array(shells),
            slow_waves=slows,
            fields=fields,
            aborted=aborted,
            capture=capture,
        )


def kramers_step(state: SpectralField, config: EvolverConfig, params: ModelParams,
                 potential: Potential, dt: float | None = None) -> SpectralField:
    """One integrator step (module-level convenience over the evolver)."""
    return KramersEvolver(params, potential, state.grid, config).step(state, dt)
