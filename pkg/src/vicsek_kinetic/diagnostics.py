"""Scalar functionals and analysis tools for the alignment dynamics.

Covers the free energy and its dissipation audits, relative entropies
against the uniform and von Mises references, the compatibility-condition
solver for the von Mises concentration, convergence-order estimation,
distance to local equilibrium, and the max-density periodicity probe.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .collision import CollisionParams, ModelKind, apply_QN, effective_mu, von_mises_weights
from .transport import DistributionField
from .velocity_grid import AngularGrid, moments

__all__ = [
    "FreeEnergyValue",
    "KappaBranch",
    "KappaSolution",
    "free_energy",
    "dissipation_audit",
    "solve_kappa",
    "vonmises_reference",
    "relative_entropy",
    "entropy_uniform",
    "entropy_vonmises",
    "accuracy_order",
    "MaxRhoAnalysis",
    "max_rho_series",
    "equilibrium_gap",
    "phase_scan",
]

logger = logging.getLogger(__name__)

_LOG_FLOOR = 1e-300
_QUAD_N = 4096  # trapezoid nodes for the circle integrals (spectrally accurate)


def _safe_log(f: np.ndarray) -> np.ndarray:
    """log with the documented positivity floor; floored entries are counted."""
    n_floored = int(np.count_nonzero(f < _LOG_FLOOR))
    if n_floored:
        logger.warning("entropy floor applied to %d values", n_floored)
    return np.log(np.maximum(f, _LOG_FLOOR))


@dataclass(frozen=True)
class FreeEnergyValue:
    """Entropy part, alignment part and their combination.

    total = entropy_part - (mu/sigma) * interaction_part, with the
    interaction Phi = |j| for Vicsek and |j|^2 / 2 for DFL.  A Lyapunov
    functional of the homogeneous dynamics.
    """

    entropy_part: float
    interaction_part: float
    total: float


def free_energy(
    f: np.ndarray, model: ModelKind, mu: float, sigma: float, grid: AngularGrid
) -> FreeEnergyValue:
    """Free energy of one angular distribution (requires f > 0)."""
    f = np.asarray(f, dtype=float)
    entropy = float(grid.dtheta * (f * _safe_log(f)).sum())
    j_norm = float(moments(f, grid).j_norm)
    phi = j_norm if model is ModelKind.VICSEK else 0.5 * j_norm**2
    total = entropy - (mu / sigma) * phi
    if not np.isfinite(total):
        raise ValueError(f"non-finite free energy (entropy={entropy}, phi={phi})")
    return FreeEnergyValue(entropy_part=entropy, interaction_part=phi, total=total)


def dissipation_audit(
    f: np.ndarray, params: CollisionParams, grid: AngularGrid, n_pairs: int = 8
) -> tuple[float, float, float]:
    """(l2_rate, entropy_rate, symmetry_defect) at the weights frozen from f.

    l2_rate      <Q_N f, f>_{1/M}       (should be <= 0)
    entropy_rate sum Q_N(f)_k ln(f/M)_k (should be <= 0)
    defect       max |<Q_N u, v> - <u, Q_N v>|_{1/M} over a fixed seeded
                 sample of unit-norm positive pairs
    """
    f = np.asarray(f, dtype=float)
    m = moments(f, grid)
    mu_f = np.where(m.theta_defined, effective_mu(params, m), 0.0)
    w = von_mises_weights(grid, m.theta_bar, mu_f, params.sigma)
    qf = apply_QN(f, w, params.sigma, grid)
    l2_rate = float((qf * f / w.m_node).sum())
    entropy_rate = float((qf * _safe_log(f / w.m_node)).sum())

    rng = np.random.Generator(np.random.Philox(key=2024))
    defect = 0.0
    for _ in range(n_pairs):
        u = rng.uniform(0.1, 1.1, size=grid.n_theta)
        v = rng.uniform(0.1, 1.1, size=grid.n_theta)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        qu = apply_QN(u, w, params.sigma, grid)
        qv = apply_QN(v, w, params.sigma, grid)
        defect = max(
            defect,
            abs(float((qu * v / w.m_node).sum()) - float((u * qv / w.m_node).sum())),
        )
    return l2_rate, entropy_rate, defect


class KappaBranch(enum.Enum):
    ZERO = "zero"
    POSITIVE = "positive"


@dataclass(frozen=True)
class KappaSolution:
    """Concentration solving kappa = 2*pi*rho_bar * A(mu*kappa/sigma), where
    A is the mean cosine of the von Mises distribution.  kappa equals the
    flux norm |j| of the compatible von Mises state; it is zero exactly when
    sigma >= pi*mu*rho_bar."""

    kappa: float
    threshold_sigma: float
    branch: KappaBranch


def _mean_cosine(kappa_tilde: float) -> float:
    """A(k) = int cos e^{k cos} / int e^{k cos} by trapezoid quadrature."""
    theta = np.arange(_QUAD_N) * (2.0 * np.pi / _QUAD_N)
    cos = np.cos(theta)
    # shift the exponent by its max so large concentrations cannot overflow
    weight = np.exp(kappa_tilde * (cos - 1.0))
    return float((cos * weight).sum() / weight.sum())


def solve_kappa(rho_bar: float, mu: float, sigma: float) -> KappaSolution:
    """Solve the compatibility condition by bisection (residual <= 1e-10)."""
    if rho_bar <= 0.0 or mu <= 0.0 or sigma <= 0.0:
        raise ValueError("rho_bar, mu and sigma must be positive")
    threshold = np.pi * mu * rho_bar
    if sigma >= threshold:
        return KappaSolution(kappa=0.0, threshold_sigma=threshold, branch=KappaBranch.ZERO)

    two_pi_rho = 2.0 * np.pi * rho_bar

    def residual(kappa: float) -> float:
        return two_pi_rho * _mean_cosine(mu * kappa / sigma) - kappa

    lo, hi = 0.0, two_pi_rho
    # residual(0) = 0 with positive slope; residual(2*pi*rho_bar) < 0 since
    # the mean cosine is < 1, so the positive root is bracketed
    if residual(hi) >= 0.0:
        raise RuntimeError(
            f"bracket failure solving the compatibility condition "
            f"(rho_bar={rho_bar}, mu={mu}, sigma={sigma})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * two_pi_rho:
            break
    kappa = 0.5 * (lo + hi)
    if abs(residual(kappa)) > 1e-10:
        raise RuntimeError(
            f"compatibility residual {residual(kappa):.3e} above tolerance "
            f"(rho_bar={rho_bar}, mu={mu}, sigma={sigma})"
        )
    return KappaSolution(kappa=kappa, threshold_sigma=threshold, branch=KappaBranch.POSITIVE)


def vonmises_reference(
    rho_bar: float, kappa: float, mu: float, sigma: float, grid: AngularGrid
) -> np.ndarray:
    """Nodal values of the compatible von Mises state of mean density rho_bar.

    2*pi*rho_bar * e^{(mu*kappa/sigma) cos theta} / int e^{(mu*kappa/sigma) cos}.
    With kappa = 0 this is exactly the constant rho_bar (same value the
    uniform-reference entropy uses, so the two entropies then coincide
    bit for bit).
    """
    if kappa == 0.0:
        return np.full(grid.n_theta, float(rho_bar))
    kt = mu * kappa / sigma
    theta_q = np.arange(_QUAD_N) * (2.0 * np.pi / _QUAD_N)
    z = (2.0 * np.pi / _QUAD_N) * np.exp(kt * (np.cos(theta_q) - 1.0)).sum()
    return 2.0 * np.pi * rho_bar * np.exp(kt * (grid.cos_theta - 1.0)) / z


def relative_entropy(F: DistributionField, reference: np.ndarray) -> float:
    """dx*dy*dtheta * sum f ln(f / reference(theta)) over the whole field."""
    ref = np.asarray(reference, dtype=float)
    vol = F.grid.dx * F.grid.dy * F.agrid.dtheta
    val = float(vol * (F.values * (_safe_log(F.values) - np.log(ref))).sum())
    if not np.isfinite(val):
        raise ValueError("non-finite relative entropy")
    return val


def entropy_uniform(F: DistributionField) -> float:
    """Relative entropy against the uniform state of the same mass (>= 0)."""
    vol = F.grid.dx * F.grid.dy * F.agrid.dtheta
    mass = vol * F.values.sum()
    rho_bar = mass / (2.0 * np.pi * F.grid.length**2)
    val = float(vol * (F.values * (_safe_log(F.values) - np.log(rho_bar))).sum())
    if not np.isfinite(val):
        raise ValueError("non-finite relative entropy")
    if val < -1e-10 * max(1.0, abs(mass)):
        raise AssertionError(f"uniform relative entropy is negative: {val:.3e}")
    return val


def entropy_vonmises(F: DistributionField, mu: float, sigma: float) -> float:
    """Relative entropy against the compatible von Mises state (theta = 0).

    The concentration comes from the compatibility condition at the field's
    mean density; above the threshold it degenerates to entropy_uniform.
    """
    vol = F.grid.dx * F.grid.dy * F.agrid.dtheta
    mass = vol * F.values.sum()
    rho_bar = mass / (2.0 * np.pi * F.grid.length**2)
    sol = solve_kappa(rho_bar, mu, sigma)
    if sol.kappa == 0.0:
        return entropy_uniform(F)
    ref = vonmises_reference(rho_bar, sol.kappa, mu, sigma, F.agrid)
    return relative_entropy(F, ref)


def accuracy_order(
    run_family: list[tuple[float, np.ndarray]], reference: np.ndarray
) -> float:
    """Least-squares slope of ln(L2 error) vs ln(dtheta) against ``reference``.

    Every family member must live on a grid whose nodes are a subset of the
    reference grid (node counts dividing the reference count); errors are
    measured on the shared nodes.
    """
    if len(run_family) < 3:
        raise ValueError(f"need at least 3 resolutions, got {len(run_family)}")
    n_ref = len(reference)
    errs = []
    dthetas = []
    for dtheta, f in run_family:
        n = len(f)
        if n >= n_ref or n_ref % n != 0:
            raise ValueError(
                f"grid with {n} nodes is not nested in the {n_ref}-node reference"
            )
        if not np.isclose(dtheta, 2.0 * np.pi / n, rtol=1e-12):
            raise ValueError(f"dtheta {dtheta} inconsistent with {n} nodes")
        sub = np.asarray(reference)[:: n_ref // n]
        errs.append(np.sqrt(dtheta * ((np.asarray(f) - sub) ** 2).sum()))
        dthetas.append(dtheta)
    slope = np.polyfit(np.log(dthetas), np.log(errs), 1)[0]
    return float(slope)


@dataclass(frozen=True)
class MaxRhoAnalysis:
    times: np.ndarray
    values: np.ndarray
    peak_times: np.ndarray  # strict local maxima over the final third
    dominant_period: float | None


def max_rho_series(record) -> MaxRhoAnalysis:
    """Max-density series of a run plus a simple periodicity estimate.

    Peaks are strict local maxima of the series restricted to the final
    third of the run; the dominant period is their mean spacing (None with
    fewer than 3 peaks).  Deliberately assumption-light: no spectral fits.
    """
    times = np.asarray(record.times, dtype=float)
    values = np.asarray(record.max_rho, dtype=float)
    if times.shape != values.shape:
        raise ValueError("times and max_rho must have equal length")
    if times.size < 3:
        return MaxRhoAnalysis(times, values, np.empty(0), None)
    t_cut = times[0] + (times[-1] - times[0]) * (2.0 / 3.0)
    sel = times >= t_cut
    tt, vv = times[sel], values[sel]
    if tt.size < 3:
        return MaxRhoAnalysis(times, values, np.empty(0), None)
    interior = (vv[1:-1] > vv[:-2]) & (vv[1:-1] >= vv[2:])
    peaks = tt[1:-1][interior]
    period = float(np.diff(peaks).mean()) if peaks.size >= 3 else None
    return MaxRhoAnalysis(times, values, peaks, period)


def equilibrium_gap(
    f: np.ndarray, params: CollisionParams, grid: AngularGrid
) -> float:
    """L2 distance from f to the local-equilibrium von Mises matched to f.

    The reference has the same angular mass and mean direction as f; its
    concentration is mu/sigma for the Vicsek model and comes from the
    compatibility condition at f's mean density for DFL.  With zero flux the
    reference degenerates to the uniform state of the same mass.
    """
    f = np.asarray(f, dtype=float)
    m = moments(f, grid)
    if params.model is ModelKind.VICSEK:
        kt = params.mu / params.sigma
    else:
        rho_bar = float(m.rho) / (2.0 * np.pi)
        kt = params.mu * solve_kappa(rho_bar, params.mu, params.sigma).kappa / params.sigma
    if not bool(m.theta_defined):
        ref = np.full(grid.n_theta, 1.0)
    else:
        ref = np.exp(kt * np.cos(grid.theta - float(m.theta_bar)))
    ref *= float(m.rho) / (grid.dtheta * ref.sum())
    return float(np.sqrt(grid.dtheta * ((f - ref) ** 2).sum()))


def phase_scan(
    template,  # SolverConfig; imported lazily to keep this module solver-free
    rho_values: np.ndarray,
    sigma_values: np.ndarray,
) -> np.ndarray:
    """Run the solver once per (rho_bar, sigma) pair and collect the final
    entropies plus the compatible concentration.

    Returns rows (rho_bar, sigma, E_u, E_VM, kappa) in row-major scan order
    (rho outer, sigma inner); mean density is injected through the init's
    mean_rho, which equals the normalized mean density for the perturbative
    init kinds.
    """
    from dataclasses import replace

    from . import kinetic_solver

    rows = []
    for rho_bar in np.asarray(rho_values, dtype=float):
        for sigma in np.asarray(sigma_values, dtype=float):
            cfg = replace(
                template,
                sigma=float(sigma),
                init=replace(template.init, mean_rho=float(rho_bar)),
            )
            record = kinetic_solver.run(cfg)
            kappa = solve_kappa(rho_bar, cfg.mu, sigma).kappa
            rows.append(
                (rho_bar, sigma, record.e_u[-1], record.e_vm[-1], kappa)
            )
            logger.info(
                "scan point rho_bar=%.4g sigma=%.4g E_u=%.4g E_VM=%.4g kappa=%.4g",
                *rows[-1],
            )
    return np.asarray(rows, dtype=float)
