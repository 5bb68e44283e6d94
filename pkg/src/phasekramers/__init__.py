"""Dissipative wave dynamics on phase space: stiff spectral evolution of the
generalized Kramers equation and its reduced dissipative Schrodinger limit."""

from .core import (
    ConfigWave,
    Grid,
    ModelParams,
    ParameterError,
    PhaseField,
    Potential,
    SpectralField,
    from_dimensionless,
    potential_tables,
    to_dimensionless,
)
from .hermite import (
    diffusion_pseudoinverse,
    from_spectral,
    hermite_eval,
    lift_wave,
    lift_wave_kernel,
    orthonormality_defect,
    project_shell,
    shell_wave,
    spectral_capture,
    synthesize_shells,
    to_spectral,
)
from .kramers import EvolverConfig, KramersEvolver, StabilityError, Trajectory, kramers_step, mode_norms
from .operators import apply_diffusion, apply_diffusion_spectral, apply_transport
from .perturbation import (
    DecoherenceReport,
    DegenerateSpectrumError,
    EigenPackage,
    corrected_state,
    corrections,
    decoherence_report,
    line_width,
    solve_eigen,
    transition_probability,
)
from .reduced import (
    ReducedTrajectory,
    apply_dissipative_hamiltonian,
    apply_hamiltonian,
    dissipator_closed,
    dissipator_composed,
    embed_wave,
    schrodinger_evolve,
    transport_coupling_from_base,
    transport_coupling_to_base,
)

__version__ = "0.1.0"
