"""Collision operator: weights, conservation, stability, structure."""

import numpy as np
import pytest

from vicsek_kinetic import (
    CFLViolationError,
    CollisionParams,
    ModelKind,
    SubstepCapError,
    apply_QN,
    cfl_collision,
    collision_adapt,
    collision_step,
    effective_mu,
    free_energy,
    make_grid,
    moments,
    von_mises_weights,
)

VICSEK = CollisionParams(model=ModelKind.VICSEK, mu=1.0, sigma=0.2)
DFL = CollisionParams(model=ModelKind.DFL, mu=1.0, sigma=0.2)


def dense_qn_matrix(w, sigma, grid):
    """Entry-by-entry tridiagonal-circulant matrix of the discrete operator."""
    n = grid.n_theta
    A = np.zeros((n, n))
    s = sigma / grid.dtheta**2
    for k in range(n):
        km, kp = (k - 1) % n, (k + 1) % n
        A[k, km] = s * w.m_half[km] / w.m_node[km]               # a_k
        A[k, k] = -s * (w.m_half[k] + w.m_half[km]) / w.m_node[k]  # b_k
        A[k, kp] = s * w.m_half[k] / w.m_node[kp]                # c_k
    return A


class TestEffectiveMu:
    def test_vicsek_above_threshold(self):
        g = make_grid(8)
        f = 1.0 + 0.5 * np.cos(g.theta)
        m = moments(f, g)
        assert m.j_norm == pytest.approx(0.5 * np.pi, rel=1e-13)
        assert effective_mu(VICSEK, m) == pytest.approx(1.0)

    def test_dfl_scales_with_flux(self):
        g = make_grid(64)
        # flux norm 0.5: first-harmonic amplitude 0.5/pi
        f = 1.0 + (0.5 / np.pi) * np.cos(g.theta)
        m = moments(f, g)
        assert effective_mu(DFL, m) == pytest.approx(0.5, rel=1e-12)

    def test_vicsek_uniform_disables_drift(self):
        g = make_grid(16)
        m = moments(np.full(16, 2.0), g)
        assert effective_mu(VICSEK, m) == 0.0


class TestWeights:
    def test_zero_mu_gives_heat_kernel_weights(self):
        g = make_grid(16)
        w = von_mises_weights(g, np.nan, 0.0, 0.2)
        np.testing.assert_array_equal(w.m_node, np.ones(16))
        np.testing.assert_array_equal(w.m_half, np.ones(16))

    def test_quadrant_values(self):
        g = make_grid(4)
        w = von_mises_weights(g, 0.0, 1.0, 0.2)  # mu_f/sigma = 5
        np.testing.assert_allclose(
            w.m_node, [np.exp(5.0), 1.0, np.exp(-5.0), 1.0], rtol=1e-13
        )

    def test_matches_direct_exponential_oracle(self):
        import math

        g = make_grid(30)
        w = von_mises_weights(g, 0.3, 1.0, 0.2)
        for k in range(30):
            assert w.m_node[k] == pytest.approx(
                math.exp(5.0 * math.cos(g.theta[k] - 0.3)), rel=1e-14
            )
            assert w.m_half[k] == pytest.approx(
                math.exp(5.0 * math.cos(g.theta[k] + g.dtheta / 2 - 0.3)), rel=1e-14
            )

    def test_rejects_undefined_direction_with_drift(self):
        g = make_grid(8)
        with pytest.raises(ValueError):
            von_mises_weights(g, np.nan, 1.0, 0.2)


class TestApplyQN:
    def test_discrete_equilibrium_is_exact_kernel(self):
        g = make_grid(32)
        w = von_mises_weights(g, 0.7, 1.0, 0.2)
        q = apply_QN(w.m_node, w, 0.2, g)
        np.testing.assert_array_equal(q, np.zeros(32))  # f/M constant: exact zero

    @pytest.mark.parametrize("seed", range(5))
    def test_conservation(self, seed):
        g = make_grid(16)
        rng = np.random.default_rng(seed)
        f = rng.uniform(0.1, 2.0, 16)
        w = von_mises_weights(g, rng.uniform(0, 2 * np.pi), rng.uniform(0, 2), 0.2)
        q = apply_QN(f, w, 0.2, g)
        assert abs(q.sum()) <= 1e-13 * np.abs(q).max() * g.n_theta

    def test_matches_dense_matrix_oracle(self):
        g = make_grid(8)
        rng = np.random.default_rng(1)
        f = rng.uniform(0.5, 1.5, 8)
        w = von_mises_weights(g, 0.0, 0.4, 0.2)  # mu_f/sigma = 2
        A = dense_qn_matrix(w, 0.2, g)
        np.testing.assert_allclose(apply_QN(f, w, 0.2, g), A @ f, rtol=1e-12, atol=1e-12)

    def test_second_order_consistency_against_analytic_operator(self):
        # smooth test function with closed-form image under the continuous
        # operator sigma*(f'' - (g' f)'), g = (mu_f/sigma) cos(theta - tb)
        sigma, mu_f, tb = 0.2, 0.6, 0.9
        kt = mu_f / sigma

        def f(t):
            return 2.0 + np.cos(t) + 0.3 * np.sin(3 * t)

        def q_exact(t):
            fp = -np.sin(t) + 0.9 * np.cos(3 * t)
            fpp = -np.cos(t) - 2.7 * np.sin(3 * t)
            gp = -kt * np.sin(t - tb)
            gpp = -kt * np.cos(t - tb)
            return sigma * (fpp - gpp * f(t) - gp * fp)

        errs, dths = [], []
        for n in [8, 16, 32, 64, 128, 256]:
            g = make_grid(n)
            w = von_mises_weights(g, tb, mu_f, sigma)
            q = apply_QN(f(g.theta), w, sigma, g)
            errs.append(np.sqrt(g.dtheta * ((q - q_exact(g.theta)) ** 2).sum()))
            dths.append(g.dtheta)
        slope = np.polyfit(np.log(dths), np.log(errs), 1)[0]
        assert 1.8 <= slope <= 2.2


class TestCFL:
    def test_pure_diffusion_bound(self):
        g = make_grid(16)
        assert cfl_collision(0.0, 0.2, g.dtheta) == pytest.approx(
            g.dtheta**2 / (2 * 0.2), rel=1e-14
        )

    def test_bound_shrinks_with_alignment(self):
        g = make_grid(16)
        assert cfl_collision(2.0, 0.2, g.dtheta) < cfl_collision(1.0, 0.2, g.dtheta)

    def test_update_matrix_nonnegative_at_bound(self):
        # sweep the mean direction; every entry of Id + dt*Q_N stays >= 0
        g = make_grid(30)
        sigma, mu_f = 0.2, 1.0
        dt = cfl_collision(mu_f, sigma, g.dtheta)
        for tb in np.arange(0.0, 2 * np.pi, 0.1):
            w = von_mises_weights(g, tb, mu_f, sigma)
            B = np.eye(30) + dt * dense_qn_matrix(w, sigma, g)
            assert B.min() >= 0.0


class TestCollisionStep:
    def test_uniform_is_bitwise_fixed_point(self):
        g = make_grid(30)
        f = np.full(30, 0.8)
        out = collision_step(f, 1e-2, VICSEK, g)
        np.testing.assert_array_equal(out, f)

    def test_von_mises_is_fixed_point(self):
        # the self-consistent weights make f/M constant, so the update adds
        # an exact zero rate (the remeasured direction sits below 1 ulp on a
        # grid fine enough to kill quadrature aliasing)
        g = make_grid(32)
        params = CollisionParams(model=ModelKind.VICSEK, mu=0.2, sigma=0.2)
        w = von_mises_weights(g, 0.3, params.mu, params.sigma)
        f = w.m_node.copy()
        out = collision_step(f, 1e-3, params, g)
        np.testing.assert_array_equal(out, f)

    def test_rejects_oversized_step(self):
        g = make_grid(16)
        f = 1.0 + 0.5 * np.cos(g.theta)
        dt = 2.0 * cfl_collision(1.0, VICSEK.sigma, g.dtheta)
        with pytest.raises(CFLViolationError):
            collision_step(f, dt, VICSEK, g)

    def test_mass_and_free_energy_along_run(self):
        from vicsek_kinetic.kinetic_solver import smooth_skew_profile

        g = make_grid(64)
        f = smooth_skew_profile(g.theta)
        mass0 = g.dtheta * f.sum()
        dt = 1e-3
        fe_prev = free_energy(f, ModelKind.VICSEK, 1.0, 0.2, g).total
        for step in range(1000):
            f = collision_step(f, dt, VICSEK, g)
            if step % 20 == 0:
                fe = free_energy(f, ModelKind.VICSEK, 1.0, 0.2, g).total
                assert fe <= fe_prev + 1e-12 * abs(fe_prev)
                fe_prev = fe
        assert g.dtheta * f.sum() == pytest.approx(mass0, rel=1e-12)
        assert f.min() >= 0.0


class TestCollisionAdapt:
    def test_single_substep_equals_plain_step(self):
        g = make_grid(32)
        f = 1.0 + 0.4 * np.cos(g.theta)
        dt = 0.5 * cfl_collision(1.0, VICSEK.sigma, g.dtheta)
        np.testing.assert_array_equal(
            collision_adapt(f, dt, VICSEK, g), collision_step(f, dt, VICSEK, g)
        )

    def test_substeps_sum_to_total(self):
        # concentrated DFL state (|j| ~ 0.8): the bound shrinks, several
        # substeps are needed, and they must accumulate to dt_total exactly
        g = make_grid(32)
        f = 0.032 * np.exp(3.0 * np.cos(g.theta))
        params = CollisionParams(model=ModelKind.DFL, mu=1.0, sigma=0.2)
        dt_total = 0.25
        mass0 = g.dtheta * f.sum()
        out = collision_adapt(f, dt_total, params, g)
        # manual sub-step accumulation mirroring the adaptive policy
        acc, remaining = f.copy(), dt_total
        n_sub, t_sum = 0, 0.0
        while remaining > 0.0:
            m = moments(acc, g)
            bound = cfl_collision(float(effective_mu(params, m)), params.sigma, g.dtheta)
            h = min(bound, remaining)
            acc = collision_step(acc, h, params, g)
            remaining -= h
            t_sum += h
            n_sub += 1
        assert n_sub > 1
        assert abs(t_sum - dt_total) <= 1e-12
        np.testing.assert_allclose(out, acc, rtol=1e-13, atol=1e-15)
        assert g.dtheta * out.sum() == pytest.approx(mass0, rel=1e-12)
        assert out.min() >= 0.0

    def test_substep_cap_aborts_loudly(self):
        g = make_grid(32)
        f = 1.0 + 0.4 * np.cos(g.theta)
        with pytest.raises(SubstepCapError):
            collision_adapt(f, 10.0, VICSEK, g, substep_cap=3)

    def test_per_cell_independence(self):
        # a stack of cells advances exactly like each cell alone
        g = make_grid(16)
        rng = np.random.default_rng(5)
        stack = rng.uniform(0.2, 1.5, size=(4, 16))
        out = collision_adapt(stack, 0.3, DFL, g)
        for i in range(4):
            np.testing.assert_array_equal(out[i], collision_adapt(stack[i], 0.3, DFL, g))


class TestStructure:
    @pytest.mark.parametrize("n", [8, 16, 32])
    def test_symmetry_and_dissipation(self, n):
        g = make_grid(n)
        rng = np.random.default_rng(n)
        w = von_mises_weights(g, rng.uniform(0, 2 * np.pi), rng.uniform(0.1, 1.5), 0.2)
        for _ in range(200):
            u = rng.uniform(0.05, 1.0, n)
            v = rng.uniform(0.05, 1.0, n)
            qu = apply_QN(u, w, 0.2, g)
            qv = apply_QN(v, w, 0.2, g)
            sym = (qu * v / w.m_node).sum() - (u * qv / w.m_node).sum()
            assert abs(sym) <= 1e-12 * np.linalg.norm(u) * np.linalg.norm(v) * (
                0.2 / g.dtheta**2
            ) * np.abs(w.m_half).max()
            assert (qu * u / w.m_node).sum() <= 1e-12
            assert (qu * np.log(u / w.m_node)).sum() <= 1e-12

    def test_l2_rate_matches_flux_square_identity(self):
        g = make_grid(16)
        rng = np.random.default_rng(9)
        u = rng.uniform(0.1, 1.0, 16)
        w = von_mises_weights(g, 1.1, 0.8, 0.2)
        qu = apply_QN(u, w, 0.2, g)
        lhs = (qu * u / w.m_node).sum()
        r = u / w.m_node
        rhs = -(0.2 / g.dtheta**2) * (w.m_half * (np.roll(r, -1) - r) ** 2).sum()
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_max_principle_on_f_over_M(self, seed):
        # at dt <= the stability bound the update on r = f/M is a convex
        # combination of neighbors: its range cannot grow
        g = make_grid(24)
        rng = np.random.default_rng(seed)
        f = rng.uniform(0.05, 2.0, 24)
        mu_f = rng.uniform(0.1, 1.0)
        w = von_mises_weights(g, rng.uniform(0, 2 * np.pi), mu_f, 0.2)
        dt = cfl_collision(mu_f, 0.2, g.dtheta)
        f_new = f + dt * apply_QN(f, w, 0.2, g)
        r, r_new = f / w.m_node, f_new / w.m_node
        assert r_new.min() >= r.min() - 1e-12 * np.abs(r).max()
        assert r_new.max() <= r.max() + 1e-12 * np.abs(r).max()

    def test_weighted_l2_zero_only_at_equilibrium(self):
        g = make_grid(16)
        w = von_mises_weights(g, 0.0, 0.5, 0.2)
        q_eq = apply_QN(1.7 * w.m_node, w, 0.2, g)
        assert abs((q_eq * w.m_node).sum()) <= 1e-12
        u = w.m_node * (1.0 + 0.1 * np.cos(2 * g.theta))
        qu = apply_QN(u, w, 0.2, g)
        assert (qu * u / w.m_node).sum() < -1e-6
