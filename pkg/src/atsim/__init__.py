"""atsim: pulse-level simulation of Autler-Townes spectroscopy in a driven
three-level spin system, with open-system dynamics and curve fitting."""

from .linalg3 import (
    BARE,
    DRESSED,
    DensityMatrix,
    EigenSystem,
    NumericalError,
    StateVector,
    basis_state,
    conjugate_basis,
    eig_hermitian,
    propagator,
)
from .lindblad import (
    DecoherenceParams,
    LindbladOp,
    dissipators_from_params,
    evolve_rk4,
    lindblad_rhs,
    make_dephasing,
    make_relaxation,
    real_ode_rhs,
    steady_state,
)
from .model import (
    DressedBasis,
    DriveParams,
    GroundStateParams,
    ats_splitting,
    dressed_hamiltonian,
    effective_two_level,
    eigenenergies_detuned,
    mhz_to_rad,
    nonresonant_dressed,
    probe_resonance,
    rad_to_mhz,
    rotating_frame_hamiltonian,
    transition_frequencies,
)
from .experiments import (
    DEFAULT_CONTRAST,
    Dip,
    PrePulse,
    PulseSchedule,
    ScanResult,
    TimeTrace,
    amplitude_sweep,
    analytic_interference,
    default_probe_grid,
    detuning_sweep,
    dynamics_trace,
    find_dips,
    optimal_duration,
    optimal_durations,
    pl_from_p0,
    population_p0,
    rabi_reference_trace,
    run_schedule,
    spectrum_scan,
)
from .fitting import MODELS, FitResult, default_init, dominant_frequency, evaluate, fit

__version__ = "0.1.0"
