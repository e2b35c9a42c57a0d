"""Simulator for a cat-encoded quantum memory in the ultrastrong
qubit-resonator coupling regime.

A logical qubit alpha |g,0> + beta |e,0> is written into the degenerate
cat-like ground doublet of the quantum Rabi model by sweeping the coupling
up, held, and read back by the reverse sweep plus one phase correction.
The package covers the closed-system protocol, its dressed-basis open
dynamics, a two-cell entangled register, and a CLI that emits the standard
curves as CSV.
"""
from .hilbert import (
    HilbertDims,
    State,
    TruncationError,
    annihilation_op,
    basis_state,
    coherent_state,
    coherent_truncation_weight,
    creation_op,
    fock_annihilation,
    identity_op,
    infer_two_mode_fock,
    join_cells,
    normalized,
    number_op,
    pauli_op,
    product_state,
    tensor,
    two_mode_index,
    two_mode_vacuum,
)
from .model import (
    CouplingSchedule,
    ModelParams,
    build_rabi,
    hamiltonian_at,
    joint_parity_op,
    parity_op,
    retrieval_schedule,
    storage_schedule,
)
from .spectral import (
    GaugeAlignmentError,
    GaugeChain,
    Spectrum,
    align_gauge,
    build_gauge_chain,
    cat_approximant,
    eigendecompose,
    mean_photon,
    seed_gauge,
)
from .dynamics import (
    NormDriftError,
    PhaseLandscape,
    PropagatorConfig,
    RoundTrip,
    Trajectory,
    branch_phase_correction,
    corrected_fidelity,
    optimal_evolution_time,
    optimize_retrieval_phase,
    phase_landscape,
    physical_time,
    propagate,
    retrieval_run,
    roundtrip_run,
    storage_input,
    storage_run,
)
from .lindblad import (
    MasterTrajectory,
    NoiseRates,
    PositivityError,
    dressed_dissipators,
    evolve_master,
    fidelity_mixed,
    flat_rate,
    ohmic_rate,
    optimize_retrieval_phase_mixed,
    pure_density,
    validate_density,
)
from .protocols import (
    EXPERIMENTS,
    ExperimentError,
    ExperimentSpec,
    ResultBundle,
    beam_splitter,
    cell_entropy,
    prepare_two_cell,
    run_experiment,
    two_cell_retrieval,
    two_cell_return_fidelity,
    two_cell_storage,
    two_cell_target_fidelity,
)

__version__ = "0.1.0"
