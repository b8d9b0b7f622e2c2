import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nightgrid.errors import DataError
from nightgrid.grid_io import cell_point_arrays
from nightgrid.hotspots import extract_hotspots
from nightgrid.stats import ModelSpec, fit_growth_model, fit_scaling
from nightgrid.synth import (
    Blob,
    SplitMix64,
    SynthCorpusSpec,
    SynthSpec,
    city_subseed,
    corpus_spec_from_dict,
    gaussian_field,
    generate_city,
    generate_corpus,
    splitmix64_stream,
    write_corpus,
)


class TestSplitMix64:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**64 - 1), n=st.integers(1, 200))
    def test_vectorized_matches_sequential(self, seed, n):
        rng = SplitMix64(seed)
        scalar = [rng.next_u64() for _ in range(n)]
        assert splitmix64_stream(seed, n).tolist() == scalar

    def test_float_range_and_determinism(self):
        a = SplitMix64(12345)
        b = SplitMix64(12345)
        va = [a.next_float() for _ in range(100)]
        vb = [b.next_float() for _ in range(100)]
        assert va == vb
        assert all(0.0 <= v < 1.0 for v in va)

    def test_gaussian_field_matches_scalar(self):
        # Same uniforms, same Box-Muller branch; numpy's vectorized cos
        # and log1p may differ from libm in the last ulp.
        rng = SplitMix64(777)
        scalar = [rng.next_gauss(2.5) for _ in range(64)]
        vec = gaussian_field(777, 64, 2.5)
        np.testing.assert_allclose(vec, scalar, rtol=1e-12, atol=0)

    def test_gaussian_field_moments(self):
        field = gaussian_field(1, 200_000, 1.0)
        assert float(field.mean()) == pytest.approx(0.0, abs=0.01)
        assert float(field.std()) == pytest.approx(1.0, abs=0.01)

    def test_subseeds_distinct(self):
        seeds = [city_subseed(42, i) for i in range(1000)]
        assert len(set(seeds)) == 1000

    def test_shuffle_is_permutation(self):
        items = list(range(50))
        rng = SplitMix64(9)
        rng.shuffle(items)
        assert sorted(items) == list(range(50))
        assert items != list(range(50))


class TestGenerateCity:
    def test_peak_at_blob_center(self):
        spec = SynthSpec(
            nrows=21,
            ncols=21,
            cellsize=1.0,
            blobs=(Blob(row=10, col=7, amplitude=50.0, sigma=1.5),),
        )
        grid, centers = generate_city(spec)
        r, c = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        assert (r, c) == (10, 7)
        assert centers == [(10, 7)]
        assert grid.values[10, 7] == pytest.approx(50.0, rel=1e-12)

    def test_determinism_bit_identical(self):
        spec = SynthSpec(
            nrows=30,
            ncols=30,
            cellsize=500.0,
            blobs=(Blob(15, 15, 80.0, 2.0), Blob(5, 22, 60.0, 1.0)),
            noise_sd=3.0,
            seed=101,
        )
        a, _ = generate_city(spec)
        b, _ = generate_city(spec)
        assert np.array_equal(a.values, b.values)

    def test_blob_outside_grid_rejected(self):
        with pytest.raises(DataError, match="outside grid"):
            SynthSpec(nrows=10, ncols=10, cellsize=1.0, blobs=(Blob(12, 3, 50.0, 1.0),))

    def test_values_clipped_nonnegative(self):
        spec = SynthSpec(
            nrows=40,
            ncols=40,
            cellsize=1.0,
            blobs=(Blob(20, 20, 50.0, 1.0),),
            noise_sd=10.0,
            seed=5,
        )
        grid, _ = generate_city(spec)
        assert float(grid.values.min()) >= 0.0

    def test_hotspot_centroid_recovers_blob_center(self):
        # End to end: extracted hotspot centroid lands within one cell of
        # the true blob center.
        spec = SynthSpec(
            nrows=25,
            ncols=25,
            cellsize=1.0,
            blobs=(Blob(row=12, col=8, amplitude=100.0, sigma=1.2),),
        )
        grid, _ = generate_city(spec)
        hs = extract_hotspots(grid)
        x, y, *_ = cell_point_arrays(grid)
        # expected planar center of cell (12, 8): x = col+0.5, y = nrows-row-0.5
        assert float(hs.xs.mean()) == pytest.approx(8.5, abs=1.0)
        assert float(hs.ys.mean()) == pytest.approx(25 - 12 - 0.5, abs=1.0)


class TestGenerateCorpus:
    BASE = dict(
        n_cities=12,
        alpha=1.0,
        beta=0.5,
        population_range=(2e3, 5e4),
        seed=7,
    )

    def test_deterministic(self):
        a = generate_corpus(SynthCorpusSpec(**self.BASE))
        b = generate_corpus(SynthCorpusSpec(**self.BASE))
        for ca, cb in zip(a, b):
            assert ca.population == cb.population
            assert np.array_equal(ca.grid.values, cb.grid.values)
            assert ca.gdp == cb.gdp

    def test_hotspot_count_tracks_blob_count(self):
        # With sharp separated blobs on zero background the extracted
        # count stays within a few percent of the planted blob count.
        cities = generate_corpus(SynthCorpusSpec(**self.BASE))
        for city in cities:
            ratio = city.hotspot_count / city.blob_count
            assert 0.95 <= ratio <= 1.10, city.city_id

    def test_scaling_recovery(self):
        spec = SynthCorpusSpec(
            n_cities=30, alpha=2.0, beta=0.55, population_range=(2e3, 8e4), seed=3
        )
        cities = generate_corpus(spec)
        fit = fit_scaling(
            [(c.city_id, c.population, float(c.hotspot_count)) for c in cities]
        )
        assert fit.beta == pytest.approx(0.55, abs=0.02)
        assert fit.alpha == pytest.approx(2.0, rel=0.15)

    def test_clustered_more_compact_than_scattered(self):
        base = dict(self.BASE, spacing_range=(4, 4))
        clustered = generate_corpus(
            SynthCorpusSpec(**dict(base, compactness_profile="clustered"))
        )
        scattered = generate_corpus(
            SynthCorpusSpec(
                **dict(base, compactness_profile="scattered", grid_side=120)
            )
        )
        mean_pi = lambda cs: sum(c.pi for c in cs) / len(cs)
        assert mean_pi(clustered) > mean_pi(scattered)

    def test_spacing_one_merges_into_compact_block(self):
        cities = generate_corpus(
            SynthCorpusSpec(**dict(self.BASE, spacing_range=(1, 1)))
        )
        assert sum(c.pi for c in cities) / len(cities) > 0.8

    def test_gdp_generator_vertex_recovery(self):
        spec = SynthCorpusSpec(
            n_cities=120,
            alpha=1.5,
            beta=0.5,
            population_range=(2e3, 2e5),
            spacing_range=(1, 6),
            seed=11,
            gdp_coeffs=(5.3, 0.6, 6.3, -5.1),
            gdp_noise_sd=0.2,
        )
        cities = generate_corpus(spec)
        fit = fit_growth_model(
            [
                (c.city_id, c.gdp / c.area_km2, c.population, c.pi, c.ai)
                for c in cities
            ],
            ModelSpec.M3_pop_pi_sq,
        )
        assert fit.coefficients["com_sq"] < 0
        assert fit.optimal_compactness == pytest.approx(6.3 / 10.2, abs=0.05)

    def test_regions_cycle(self):
        spec = SynthCorpusSpec(**dict(self.BASE, regions=("US", "EU", "CN")))
        cities = generate_corpus(spec)
        assert [c.region for c in cities[:4]] == ["US", "EU", "CN", "US"]


class TestCorpusIO:
    def test_write_corpus_and_spec_roundtrip(self, tmp_path):
        spec = SynthCorpusSpec(
            n_cities=4, alpha=1.0, beta=0.5, population_range=(2e3, 2e4), seed=1
        )
        table_path, truth_path = write_corpus(spec, str(tmp_path))
        table = (tmp_path / "cities.csv").read_text()
        assert table.splitlines()[0] == "city_id,name,region,population,gdp,raster_path"
        assert len(table.splitlines()) == 5

        truth = json.loads((tmp_path / "ground_truth.json").read_text())
        assert len(truth["cities"]) == 4
        back = corpus_spec_from_dict(truth["spec"])
        assert back == spec
        for entry in truth["cities"]:
            assert (tmp_path / "rasters" / f"{entry['city_id']}.asc").exists()

    def test_bad_spec_key_rejected(self):
        with pytest.raises(DataError, match="bad corpus spec"):
            corpus_spec_from_dict({"n_cities": 3, "bogus_key": 1})

    def test_invalid_profile_rejected(self):
        with pytest.raises(DataError, match="profile"):
            SynthCorpusSpec(
                n_cities=1,
                alpha=1.0,
                beta=0.5,
                population_range=(1e3, 1e4),
                compactness_profile="spiral",
            )
