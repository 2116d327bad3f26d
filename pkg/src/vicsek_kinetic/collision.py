"""Structure-preserving collision operator for circle-valued alignment dynamics.

The operator is the flux form of the angular Fokker-Planck operator

    Q(f) = sigma * d/dtheta ( M * d/dtheta (f / M) ),

with the von Mises weight M(theta) = exp((mu_f/sigma) cos(theta - theta_bar))
rebuilt from the current distribution at every (sub-)step.  The discrete
version differences the ratio f/M between half-nodes, which makes mass
conservation a telescoping identity, keeps the operator symmetric in the
M-weighted inner product, and makes the discrete von Mises an exact fixed
point (f/M constant implies Q_N(f) identically zero, in floating point too).

The effective alignment strength mu_f is the model switch: the Vicsek model
uses the constant mu (with pure diffusion at the zero-flux singularity),
the DFL model scales it with the flux norm, mu * |j|.

All operations broadcast over leading axes: ``f`` may be ``(n_theta,)`` or a
stack ``(..., n_theta)`` of independent cells.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .velocity_grid import AngularGrid, Moments, moments

__all__ = [
    "ModelKind",
    "CollisionParams",
    "VonMisesWeights",
    "CFLViolationError",
    "SubstepCapError",
    "effective_mu",
    "von_mises_weights",
    "apply_QN",
    "cfl_collision",
    "collision_step",
    "collision_adapt",
]

logger = logging.getLogger(__name__)


class ModelKind(enum.Enum):
    """Alignment model: constant strength (Vicsek) or flux-proportional (DFL)."""

    VICSEK = "vicsek"
    DFL = "dfl"


class CFLViolationError(ValueError):
    """Explicit Euler step larger than the collision stability bound."""


class SubstepCapError(RuntimeError):
    """Adaptive sub-stepping exceeded its cap (runaway concentration guard)."""


@dataclass(frozen=True)
class CollisionParams:
    """Model kind plus alignment strength mu, diffusion sigma and the
    relative zero-flux threshold (Vicsek only): the drift is disabled when
    |j| <= j_epsilon * rho, the unique rotation-equivariant extension of the
    singular alignment direction."""

    model: ModelKind
    mu: float
    sigma: float
    j_epsilon: float = 1e-12

    def __post_init__(self) -> None:
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.j_epsilon < 0.0:
            raise ValueError(f"j_epsilon must be non-negative, got {self.j_epsilon}")


@dataclass(frozen=True)
class VonMisesWeights:
    """Equilibrium weights at nodes and half-nodes, M_k and M_{k+1/2}.

    With mu_f = 0 both arrays are exactly one (the weight normalization is
    irrelevant: every identity used downstream is invariant under rescaling
    M, so the prefactor is fixed to 1).
    """

    m_node: np.ndarray
    m_half: np.ndarray
    mu_f: np.ndarray


def effective_mu(params: CollisionParams, m: Moments) -> np.ndarray:
    """Effective alignment strength mu_f for the current moments.

    Vicsek: mu where the flux is above the zero-flux threshold, else 0.
    DFL: mu * |j| always (no singularity).
    """
    if params.model is ModelKind.VICSEK:
        cutoff = params.j_epsilon * np.asarray(m.rho)
        return np.where(np.asarray(m.j_norm) > cutoff, params.mu, 0.0)
    return params.mu * np.asarray(m.j_norm)


def von_mises_weights(
    grid: AngularGrid,
    theta_bar: np.ndarray | float,
    mu_f: np.ndarray | float,
    sigma: float,
) -> VonMisesWeights:
    """von Mises weights exp((mu_f/sigma) cos(theta - theta_bar)).

    ``theta_bar`` may be NaN (undefined direction) only where mu_f = 0; the
    weights there are exactly one.  Half-node weights are evaluated exactly
    at theta_k + dtheta/2, not averaged from node values.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    mu_f = np.asarray(mu_f, dtype=float)
    theta_bar = np.asarray(theta_bar, dtype=float)
    undefined = ~np.isfinite(theta_bar)
    if np.any(undefined & (mu_f > 0.0)):
        raise ValueError("theta_bar undefined where mu_f > 0")

    kappa = (mu_f / sigma)[..., None]
    if np.any(undefined):
        theta_bar = np.where(undefined, 0.0, theta_bar)  # kappa is 0 there
    cb = np.cos(theta_bar)[..., None]
    sb = np.sin(theta_bar)[..., None]
    # cos(theta - theta_bar) expanded so only the node trig tables are needed
    m_node = np.exp(kappa * (grid.cos_theta * cb + grid.sin_theta * sb))
    m_half = np.exp(
        kappa * (np.cos(grid.theta_half) * cb + np.sin(grid.theta_half) * sb)
    )
    return VonMisesWeights(m_node=m_node, m_half=m_half, mu_f=mu_f)


def apply_QN(
    f: np.ndarray, w: VonMisesWeights, sigma: float, grid: AngularGrid
) -> np.ndarray:
    """Image of the discrete collision operator (a rate; entries may be < 0).

    Q_N(f)_k = sigma/dtheta^2 * [ M_{k+1/2} (r_{k+1} - r_k)
                                  - M_{k-1/2} (r_k - r_{k-1}) ],  r = f / M.
    """
    f = np.asarray(f, dtype=float)
    r = f / w.m_node
    dr_up = np.roll(r, -1, axis=-1) - r          # r_{k+1} - r_k
    flux = w.m_half * dr_up                      # M_{k+1/2} (r_{k+1} - r_k)
    return (sigma / grid.dtheta**2) * (flux - np.roll(flux, 1, axis=-1))


def cfl_collision(
    mu_f: np.ndarray | float, sigma: float, dtheta: float
) -> np.ndarray | float:
    """Largest explicit-Euler step keeping the update matrix non-negative.

    dt_max = dtheta^2/(2 sigma) * exp(-2 (mu_f/sigma) sin(dtheta/4)).
    Sufficient (not sharp): it bounds the diagonal of Id + dt*Q_N below by
    zero for every mean direction, hence positivity and the max principle
    on f/M.
    """
    if sigma <= 0.0 or dtheta <= 0.0:
        raise ValueError("sigma and dtheta must be positive")
    mu_f = np.asarray(mu_f, dtype=float)
    out = (dtheta**2 / (2.0 * sigma)) * np.exp(
        -2.0 * (mu_f / sigma) * np.sin(0.25 * dtheta)
    )
    return float(out) if out.ndim == 0 else out


def _refresh(f: np.ndarray, params: CollisionParams, grid: AngularGrid):
    """Moments, effective mu and weights recomputed from the current f.

    Where the mean direction is undefined (flux at roundoff scale) the drift
    is dropped for both models: mu_f is forced to 0 and the step is pure
    diffusion, the unique rotation-equivariant choice.
    """
    m = moments(f, grid)
    mu_f = np.where(m.theta_defined, effective_mu(params, m), 0.0)
    w = von_mises_weights(grid, m.theta_bar, mu_f, params.sigma)
    return m, mu_f, w


def collision_step(
    f: np.ndarray, dt: float, params: CollisionParams, grid: AngularGrid
) -> np.ndarray:
    """One explicit Euler step f + dt*Q_N(f) with weights rebuilt from f.

    The scheme is nonlinear: theta_bar and mu_f are frozen only within this
    single step.  Raises CFLViolationError if dt exceeds the stability bound
    at the largest mu_f measured on the input (the tightest cell binds).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    f = np.asarray(f, dtype=float)
    _, mu_f, w = _refresh(f, params, grid)
    bound = cfl_collision(np.max(mu_f), params.sigma, grid.dtheta)
    if dt > bound * (1.0 + 1e-12):
        raise CFLViolationError(
            f"dt={dt:.6g} exceeds collision CFL bound {bound:.6g} "
            f"(max mu_f={np.max(mu_f):.6g}, dtheta={grid.dtheta:.6g})"
        )
    return f + dt * apply_QN(f, w, params.sigma, grid)


def collision_adapt(
    f: np.ndarray,
    dt_total: float,
    params: CollisionParams,
    grid: AngularGrid,
    substep_cap: int = 10**6,
) -> np.ndarray:
    """Advance the collision ODE by dt_total with per-cell adaptive sub-steps.

    Each cell advances with delta_t = min(cfl_collision(mu_f), remaining),
    recomputing mu_f after every sub-step (for DFL the bound moves with |j|).
    The final time is reached exactly: the sub-steps sum to dt_total.

    Raises SubstepCapError once any cell exceeds ``substep_cap`` sub-steps;
    that guards against a concentration blow-up shrinking the bound to the
    point where the run would stall.  The incident is logged with the
    offending mu_f before raising.
    """
    if dt_total <= 0.0:
        raise ValueError(f"dt_total must be positive, got {dt_total}")
    f = np.asarray(f, dtype=float).copy()
    shape = f.shape
    cells = f.reshape(-1, grid.n_theta)
    remaining = np.full(cells.shape[0], float(dt_total))
    n_steps = 0
    active = remaining > 0.0
    while np.any(active):
        if n_steps >= substep_cap:
            worst = float(np.max(_refresh(cells[active], params, grid)[1]))
            logger.error(
                "collision_adapt exceeded %d sub-steps (dt_total=%g, "
                "max mu_f=%g, dtheta=%g); aborting",
                substep_cap, dt_total, worst, grid.dtheta,
            )
            raise SubstepCapError(
                f"exceeded {substep_cap} sub-steps (max mu_f={worst:.6g})"
            )
        fa = cells[active]
        _, mu_f, w = _refresh(fa, params, grid)
        dt = np.minimum(
            cfl_collision(mu_f, params.sigma, grid.dtheta), remaining[active]
        )
        cells[active] = fa + dt[:, None] * apply_QN(fa, w, params.sigma, grid)
        remaining[active] -= dt
        active = remaining > 0.0
        n_steps += 1
    return cells.reshape(shape)
