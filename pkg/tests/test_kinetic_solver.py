"""Full scheme: initial conditions, moments, run loop invariants."""

import numpy as np
import pytest

from vicsek_kinetic import (
    SolverConfig,
    density_and_flux,
    init_field,
    run,
)
from vicsek_kinetic.fileio import ConfigError
from vicsek_kinetic.kinetic_solver import InitSpec, smooth_skew_profile


def base_items(**over):
    items = {
        "model": "vicsek", "mu": "1.0", "sigma": "0.2", "c": "1.0",
        "length": "2.0", "m_x": "10", "m_y": "10", "n_theta": "16",
        "t_end": "0.4", "init": "random", "init_amplitude": "0.5",
        "init_mean_rho": "0.2", "seed": "7", "diag_every": "0.2",
    }
    items.update({k: str(v) for k, v in over.items()})
    return items


def make_cfg(**over):
    return SolverConfig.from_items(base_items(**over))


class TestConfig:
    def test_roundtrip_through_items(self):
        cfg = make_cfg()
        again = SolverConfig.from_items(cfg.to_items())
        assert again == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            SolverConfig.from_items(base_items(bogus="1"))

    def test_missing_key_rejected(self):
        items = base_items()
        del items["mu"]
        with pytest.raises(ConfigError):
            SolverConfig.from_items(items)

    def test_bad_number_rejected(self):
        with pytest.raises(ConfigError):
            SolverConfig.from_items(base_items(mu="fast"))

    def test_snapshot_after_end_rejected(self):
        with pytest.raises(ConfigError):
            make_cfg(snapshot_every="9.0")


class TestInitField:
    def test_homogeneous_band_matches_formula_and_is_y_independent(self):
        cfg = make_cfg(init="homogeneous-band", init_mean_rho="0.0763",
                       m_x="20", m_y="4", n_theta="12", length="10.0")
        F = init_field(cfg)
        g, sg = F.agrid, F.grid
        rho_bar = 0.0763
        x = np.arange(sg.m_x) * sg.dx
        for i in (0, 7, 13):
            for k in (0, 5, 11):
                pert = sum(
                    np.cos(p * g.theta[k]) + np.cos(2 * p * np.pi * x[i] / sg.length)
                    for p in (1, 2, 3, 5, 7)
                )
                want = rho_bar * (1.0 + 0.1 * pert)
                assert F.values[i, 0, k] == pytest.approx(want, rel=1e-13)
        np.testing.assert_array_equal(
            F.values, np.broadcast_to(F.values[:, :1, :], F.values.shape)
        )
        assert np.all(F.values > 0)
        # the init's mean_rho is the normalized mean density of the field
        assert density_and_flux(F).rho_bar == pytest.approx(rho_bar, rel=1e-12)

    def test_smooth_skew_value_at_zero(self):
        prof = smooth_skew_profile(np.array([0.0]))
        assert prof[0] == pytest.approx(2.1 / np.e, rel=1e-15)

    def test_smooth_skew_field_replicated(self):
        cfg = make_cfg(init="smooth-skew", m_x="4", m_y="3")
        F = init_field(cfg)
        np.testing.assert_array_equal(
            F.values, np.broadcast_to(F.values[:1, :1, :], F.values.shape)
        )

    def test_random_zero_amplitude_is_uniform_fixed_point(self):
        for model in ("vicsek", "dfl"):
            cfg = make_cfg(model=model, init_amplitude="0.0", t_end="0.2",
                           diag_every="0.2")
            F0 = init_field(cfg)
            np.testing.assert_array_equal(F0.values, np.full_like(F0.values, 0.2))
            record = run(cfg)
            np.testing.assert_array_equal(record.final_field.values, F0.values)

    def test_uniform_von_mises_mass(self):
        cfg = make_cfg(init="uniform-von-mises", init_kappa="5.0")
        F = init_field(cfg)
        m = density_and_flux(F)
        # unit angular mass per cell
        assert m.mass == pytest.approx(cfg.length**2, rel=1e-12)

    def test_strict_positivity_enforced(self):
        with pytest.raises(ConfigError):
            init_field(make_cfg(init="uniform-von-mises", init_kappa="1e4"))


class TestDensityAndFlux:
    def test_uniform_normalizations(self):
        cfg = make_cfg(init_amplitude="0.0", init_mean_rho="0.3")
        F = init_field(cfg)
        m = density_and_flux(F)
        np.testing.assert_allclose(m.rho, 2.0 * np.pi * 0.3, rtol=1e-13)
        assert m.rho_bar == pytest.approx(0.3, rel=1e-13)
        assert m.mean_rho == pytest.approx(2.0 * np.pi * 0.3, rel=1e-13)

    def test_matches_triple_sum_oracle(self):
        cfg = make_cfg(m_x="5", m_y="4", n_theta="8")
        F = init_field(cfg)
        g = F.agrid
        m = density_and_flux(F)
        mass = 0.0
        for i in range(5):
            for j in range(4):
                r = jx = jy = 0.0
                for k in range(8):
                    r += g.dtheta * F.values[i, j, k]
                    jx += g.dtheta * np.cos(g.theta[k]) * F.values[i, j, k]
                    jy += g.dtheta * np.sin(g.theta[k]) * F.values[i, j, k]
                assert m.rho[i, j] == pytest.approx(r, rel=1e-13)
                assert m.j[i, j, 0] == pytest.approx(jx, rel=1e-13, abs=1e-15)
                assert m.j[i, j, 1] == pytest.approx(jy, rel=1e-13, abs=1e-15)
                mass += F.grid.dx * F.grid.dy * r
        assert m.mass == pytest.approx(mass, rel=1e-13)


class TestRun:
    def test_mass_conserved_and_positive(self):
        record = run(make_cfg(t_end="2.0", diag_every="0.5"))
        np.testing.assert_allclose(record.mass, record.mass[0], rtol=1e-10)
        assert record.final_field.values.min() >= 0.0
        assert record.times[-1] == pytest.approx(2.0, abs=1e-12)

    def test_deterministic_bit_identical(self):
        a = run(make_cfg(model="dfl"))
        b = run(make_cfg(model="dfl"))
        for name in ("times", "mass", "rho_bar", "max_rho", "e_u", "e_vm", "j_global"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
        np.testing.assert_array_equal(a.final_field.values, b.final_field.values)

    def test_y_homogeneity_preserved_by_full_scheme(self):
        cfg = make_cfg(init="homogeneous-band", init_mean_rho="0.1",
                       model="dfl", t_end="1.0", length="10.0",
                       m_x="20", m_y="6", n_theta="12")
        record = run(cfg)
        v = record.final_field.values
        np.testing.assert_array_equal(v, np.broadcast_to(v[:, :1, :], v.shape))

    def test_aligned_von_mises_field_is_steady(self):
        # spatially constant, collision-equilibrated: one step changes nothing
        cfg = make_cfg(init="uniform-von-mises", init_kappa="5.0",
                       t_end="0.2", diag_every="0.2", m_x="10", m_y="10",
                       n_theta="32")
        F0 = init_field(cfg)
        record = run(cfg)
        np.testing.assert_allclose(
            record.final_field.values, F0.values, rtol=0,
            atol=1e-12 * F0.values.max(),
        )

    def test_substep_cap_abort_recorded(self, tmp_path):
        out = tmp_path / "aborted"
        out.mkdir()
        record = run(make_cfg(substep_cap="1"), out_dir=str(out))
        assert record.aborted
        assert "sub-steps" in record.abort_reason
        # a final snapshot of the partial state is still written
        assert (out / "snapshots").exists()
        assert len(record.snapshots) >= 1
        assert (out / "series.csv").exists()

    def test_dfl_above_threshold_uniformizes(self):
        # disordered side (sigma > pi*mu*rho_bar): a small random
        # perturbation decays to the uniform state, monotonically in the
        # uniform relative entropy after the transient
        cfg = make_cfg(model="dfl", length="10.0", m_x="30", m_y="30",
                       n_theta="16", t_end="60.0", init_amplitude="0.3",
                       init_mean_rho="0.04", seed="9", diag_every="2.0")
        assert cfg.sigma > np.pi * cfg.mu * 0.04
        rec = run(cfg)
        e = rec.e_u
        assert e[-1] < 1e-6 * e[0]
        last_half = rec.times >= rec.times[-1] / 2.0
        tail = e[last_half]
        assert np.all(np.diff(tail) <= 1e-12 * np.abs(tail[:-1]))

    def test_pseudo_1d_runs(self):
        cfg = make_cfg(m_y="1", model="dfl", init="homogeneous-band",
                       init_mean_rho="0.0763", length="10.0", m_x="100",
                       n_theta="30", t_end="3.0", diag_every="1.0")
        record = run(cfg)
        assert record.times[-1] == pytest.approx(3.0, abs=1e-9)
        np.testing.assert_allclose(record.mass, record.mass[0], rtol=1e-11)

    def test_output_layout(self, tmp_path):
        out = tmp_path / "r1"
        out.mkdir()
        cfg = make_cfg(t_end="0.4", snapshot_every="0.2", diag_every="0.1")
        record = run(cfg, out_dir=str(out))
        assert (out / "config.echo").exists()
        assert (out / "series.csv").exists()
        assert len(record.snapshots) == 3  # t = 0, 0.2, 0.4
        from vicsek_kinetic.fileio import read_series, read_snapshot

        series = read_series(str(out / "series.csv"))
        np.testing.assert_array_equal(series["t"], record.times)
        header, values = read_snapshot(record.snapshots[-1])
        np.testing.assert_array_equal(values, record.final_field.values)
        assert header.t == pytest.approx(0.4)
