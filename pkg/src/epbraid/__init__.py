"""Spectra, eigenvalue braids, and state-transfer dynamics of a lossy three-level system."""

from .braiding import (
    BraidWord,
    ClosureInvariants,
    NormalForm,
    StrandSet,
    VorticityReport,
    canonical_loops,
    closure_invariants,
    extract_braid_word,
    free_reduce,
    normal_form,
    sample_strands,
    vorticity,
    words_equivalent,
)
from .dynamics import (
    EpCount,
    FidelityMap,
    PopulationSeries,
    RectangleLoopSchedule,
    Trajectory,
    convergence_ratio,
    enclosed_ep_count,
    evolve,
    fidelity_map,
    launch_state,
    overlaps,
    population_dynamics,
)
from .errors import (
    AmbiguousCrossingError,
    DegenerateEigenbasisError,
    DegenerateLoopError,
    EpbraidError,
    FitDivergedError,
    IntegrationUnstableError,
    NumericError,
    ValidationError,
)
from .exceptional import (
    ArcCrossing,
    Ep3Location,
    IsolatedLine,
    PhaseDiagram,
    SpectralPhase,
    arc_crossings_at_g,
    classify_grid,
    classify_phase,
    ep3_location,
    isolated_exceptional_lines,
    phase_diagram,
    reduced_discriminant,
    trace_ep2_arcs,
)
from .fitting import (
    FitResult,
    ObservationSet,
    fit_parameters,
    population_model,
    simulate_observations,
)
from .loops import ArcSegment, ControlLoop, LineSegment, loop_from_json
from .params import SystemParams, angular_to_cyclic, cyclic_to_angular
from .spectral import (
    CubicCoefficients,
    EigenSystem,
    GaugeReport,
    Spectrum,
    build_coupled_hamiltonian,
    build_hamiltonian,
    cardano_roots,
    eigensystem,
    eigenvalues_cardano,
    gauge_transform,
    spectrum_grid,
    symmetry_residuals,
)

__version__ = "0.1.0"
