"""Monte Carlo sampling, estimator physics, and reproducibility."""

import math

import numpy as np
import pytest

from ado3d import McConfig, MediumParams, run_mc, run_mc_fields, sample_hg
from ado3d.mc import _run_histogram


class TestSampleHg:
    def test_isotropic_branch(self):
        assert sample_hg(0.0, 0.25) == pytest.approx(-0.5)
        assert sample_hg(0.0, 0.0) == pytest.approx(-1.0)
        assert sample_hg(0.0, 0.999999) == pytest.approx(1.0, abs=1e-5)

    def test_anisotropic_closed_form(self):
        # (1 + 0.81 - (0.19/1.0)^2) / 1.8
        assert sample_hg(0.9, 0.5) == pytest.approx(0.9855, abs=1e-12)

    def test_result_stays_in_range(self):
        rng = np.random.default_rng(5)
        for g in (0.1, 0.5, 0.9, 0.99):
            samples = [sample_hg(g, float(u)) for u in rng.uniform(0, 1, 500)]
            assert all(-1.0 <= s <= 1.0 for s in samples)

    def test_sample_mean_matches_anisotropy(self):
        rng = np.random.default_rng(19)
        g = 0.7
        n = 200_000
        samples = np.array(
            [sample_hg(g, float(u)) for u in rng.uniform(0.0, 1.0, n)]
        )
        stderr = samples.std(ddof=1) / math.sqrt(n)
        assert abs(samples.mean() - g) < 3.0 * stderr

    def test_rejects_invalid_anisotropy(self):
        with pytest.raises(ValueError):
            sample_hg(1.0, 0.5)
        with pytest.raises(ValueError):
            sample_hg(-0.1, 0.5)


class TestMcConfig:
    def test_shell_volumes(self):
        cfg = McConfig(
            photons=1000,
            seed=1,
            rho_edges=np.array([0.0, 1.0, 2.0]),
            z_edges=np.array([0.0, 0.5]),
        )
        expected = np.array([[math.pi * 0.5], [3.0 * math.pi * 0.5]])
        np.testing.assert_allclose(cfg.shell_volumes, expected, rtol=1e-13)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(photons=0),
            dict(rho_edges=np.array([1.0, 0.5])),
            dict(rho_edges=np.array([-1.0, 0.5])),
            dict(z_edges=np.array([0.0])),
            dict(weight_cutoff=0.0),
            dict(weight_cutoff=1.5),
            dict(batches=0),
        ],
    )
    def test_validation(self, kwargs):
        base = dict(
            photons=1000,
            seed=1,
            rho_edges=np.array([0.0, 1.0]),
            z_edges=np.array([0.0, 1.0]),
        )
        base.update(kwargs)
        with pytest.raises(ValueError):
            McConfig(**base)


@pytest.fixture(scope="module")
def low_albedo_medium():
    """Short photon lifetimes keep the unit tests fast."""
    return MediumParams(mu_a=0.5, mu_s=2.0, anisotropy=0.5, degree=3)


def _box_config(photons, seed, **kwargs):
    return McConfig(
        photons=photons,
        seed=seed,
        rho_edges=np.array([0.0, 1.0, 2.0]),
        z_edges=np.linspace(-2.0, 4.0, 13),
        **kwargs,
    )


class TestRunMc:
    def test_weight_conservation(self, low_albedo_medium):
        cfg = _box_config(5000, 3)
        _, _, absorbed = _run_histogram(low_albedo_medium, cfg)
        assert absorbed <= cfg.photons
        # Russian roulette truncates only the cutoff-scale tail.
        assert absorbed > cfg.photons * 0.99

    def test_pure_absorber_matches_beer_lambert(self):
        """With negligible scattering the deposition along the axis is the
        analytic ballistic attenuation profile."""
        medium = MediumParams(mu_a=0.5, mu_s=1e-12, anisotropy=0.0, degree=0)
        cfg = McConfig(
            photons=200_000,
            seed=11,
            rho_edges=np.array([0.0, 1.0]),
            z_edges=np.linspace(0.0, 4.0, 9),
        )
        field = run_mc(medium, cfg)
        edges = cfg.z_edges
        volumes = cfg.shell_volumes[0]
        expected = (
            np.exp(-medium.mu_a * edges[:-1]) - np.exp(-medium.mu_a * edges[1:])
        ) / (medium.mu_a * volumes)
        for got, err, ref in zip(field.values, field.stderr, expected):
            assert abs(got - ref) < 3.0 * err

    def test_reproducible_for_fixed_seed(self, low_albedo_medium):
        a = run_mc_fields(low_albedo_medium, _box_config(3000, 21))
        b = run_mc_fields(low_albedo_medium, _box_config(3000, 21))
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa.values, fb.values)
            np.testing.assert_array_equal(fa.stderr, fb.stderr)
        c = run_mc_fields(low_albedo_medium, _box_config(3000, 22))
        assert np.any(c[0].values != a[0].values)

    def test_independent_runs_agree_within_errors(self, low_albedo_medium):
        a = run_mc_fields(low_albedo_medium, _box_config(40_000, 31))[0]
        b = run_mc_fields(low_albedo_medium, _box_config(40_000, 32))[0]
        well_sampled = (a.stderr > 0) & (a.stderr < 0.05 * np.abs(a.values))
        assert np.count_nonzero(well_sampled) >= 5
        diff = np.abs(a.values - b.values)[well_sampled]
        bound = 3.0 * np.sqrt(a.stderr**2 + b.stderr**2)[well_sampled]
        # A single 3-sigma outlier among ~10 bins is within expectation.
        assert np.count_nonzero(diff > bound) <= 1

    def test_pooling_batches_is_consistent(self, low_albedo_medium):
        half = run_mc_fields(low_albedo_medium, _box_config(20_000, 41))[0]
        full = run_mc_fields(low_albedo_medium, _box_config(40_000, 41))[0]
        peak = int(np.argmax(full.values))
        bound = 3.0 * math.hypot(half.stderr[peak], full.stderr[peak])
        assert abs(half.values[peak] - full.values[peak]) < bound

    def test_run_mc_requires_single_shell(self, low_albedo_medium):
        with pytest.raises(ValueError):
            run_mc(low_albedo_medium, _box_config(10, 1))

    def test_provenance_and_shapes(self, low_albedo_medium):
        fields = run_mc_fields(low_albedo_medium, _box_config(2000, 51))
        assert len(fields) == 2
        for field, center in zip(fields, (0.5, 1.5)):
            assert field.provenance == "MC"
            assert field.rho == pytest.approx(center)
            assert field.values.shape == (12,)
            assert field.stderr.shape == (12,)
