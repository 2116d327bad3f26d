"""Structure-preserving solvers for kinetic Vicsek / DFL alignment dynamics.

The collision operator conserves mass, preserves positivity under an
explicit CFL bound and dissipates both the weighted L2 norm and the free
energy, which makes long-time behavior (relaxation, phase transition,
traveling bands) trustworthy at the discrete level.
"""

from .collision import (
    CFLViolationError,
    CollisionParams,
    ModelKind,
    SubstepCapError,
    VonMisesWeights,
    apply_QN,
    cfl_collision,
    collision_adapt,
    collision_step,
    effective_mu,
    von_mises_weights,
)
from .diagnostics import (
    FreeEnergyValue,
    KappaBranch,
    KappaSolution,
    accuracy_order,
    dissipation_audit,
    entropy_uniform,
    entropy_vonmises,
    equilibrium_gap,
    free_energy,
    max_rho_series,
    solve_kappa,
)
from .kinetic_solver import (
    FieldMoments,
    InitSpec,
    RunRecord,
    SolverConfig,
    density_and_flux,
    init_field,
    run,
)
from .particle_sim import (
    BandProfile,
    MicroParams,
    NeighborStats,
    ParticleState,
    avg_neighbors,
    band_profile,
    init_particles,
    neighbor_flux,
    neighbor_fluxes,
    run_micro,
    step_particles,
)
from .transport import DistributionField, SpatialGrid, cfl_transport, transport_step
from .velocity_grid import AngularGrid, Moments, make_grid, moments

__version__ = "0.1.0"
