"""Tests for the image probes."""

import numpy as np
import pytest

from cogmap.atlas import (
    bifurcation_dump, encode_frames, pca, pca_grid_dump, pca_lattice, pixel_std, variability_probe,
)
from cogmap.atlas.probes import junction_maxima
from cogmap.models.exceptions import AnalysisError
from cogmap.services.artifacts import image_grid, load_png


@pytest.mark.unit
class TestPixelStd:

    def test_identical_images_have_zero_spread(self):
        images = np.repeat(np.random.default_rng(0).standard_normal((1, 4, 3, 2, 2)), 5, axis=0)
        np.testing.assert_array_equal(pixel_std(images), np.zeros(4))

    def test_matches_two_pass_formula(self):
        images = np.random.default_rng(1).standard_normal((6, 2, 3, 4, 4))
        mean = images.mean(axis=0)
        expected = np.sqrt(((images - mean) ** 2).mean(axis=0)).reshape(2, -1).mean(axis=1)
        np.testing.assert_allclose(pixel_std(images), expected)

    def test_junction_maxima(self):
        values = np.zeros(20)
        values[12] = 3.0
        rows = junction_maxima(values, [10], 2)
        assert rows[0]["frame"] == 12
        assert rows[0]["value"] == 3.0
        assert rows[0]["window_mean"] == pytest.approx(0.6)


@pytest.mark.integration
class TestVariabilityProbe:

    def test_values_per_frame(self, make_bundle, two_lap_dataset):
        profile = variability_probe(make_bundle(), two_lap_dataset, samples=2, window=3)
        assert profile.values.shape == (480,)
        assert np.all(np.isfinite(profile.values)) and np.all(profile.values >= 0)
        assert [row["junction"] for row in profile.junction_maxima] == [80, 320]

    def test_seeded(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        a = variability_probe(bundle, two_lap_dataset, samples=2, seed=4).values
        b = variability_probe(bundle, two_lap_dataset, samples=2, seed=4).values
        np.testing.assert_array_equal(a, b)

    def test_needs_two_samples(self, make_bundle, two_lap_dataset):
        with pytest.raises(AnalysisError) as excinfo:
            variability_probe(make_bundle(), two_lap_dataset, samples=1)
        assert excinfo.value.error_code == "TOO_FEW_SAMPLES"


@pytest.mark.integration
class TestBifurcationDump:

    def test_zero_window_has_one_column(self, make_bundle, two_lap_dataset):
        dump = bifurcation_dump(make_bundle(), two_lap_dataset, window=0)
        np.testing.assert_array_equal(dump.frames, [[80], [320]])
        assert dump.tiles.shape == (2, 3, 1, 16, 16, 3)
        assert dump.image_count == 6

    def test_image_count_and_files(self, make_bundle, two_lap_dataset, tmp_path):
        dump = bifurcation_dump(make_bundle(tau=2), two_lap_dataset, window=2, out_dir=tmp_path)
        assert dump.image_count == 2 * 3 * 5
        assert [p.name for p in dump.paths] == ["bifurcation_j0080.png", "bifurcation_j0320.png"]
        np.testing.assert_array_equal(load_png(dump.paths[0]), image_grid(dump.tiles[0]))

    def test_targets_split_after_junction(self, make_bundle, two_lap_dataset):
        dump = bifurcation_dump(make_bundle(tau=5), two_lap_dataset, window=2)
        # inputs 78..82 with τ = 5 reach past the junction, where the two sides differ
        assert not np.array_equal(dump.tiles[0, 0, -1], dump.tiles[0, 1, -1])
        np.testing.assert_array_equal(dump.tiles[0, 0, -1], two_lap_dataset.frames[87])

    def test_negative_window(self, make_bundle, two_lap_dataset):
        with pytest.raises(AnalysisError):
            bifurcation_dump(make_bundle(), two_lap_dataset, window=-1)


@pytest.mark.integration
class TestPcaGrid:

    def test_single_cell_decodes_centroid(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        traj = encode_frames(bundle, two_lap_dataset)
        grid = pca_grid_dump(bundle, traj, n=1)
        np.testing.assert_array_equal(grid.coords, np.zeros((1, 1, 2)))
        np.testing.assert_allclose(grid.z[0, 0], traj.z.mean(axis=0), rtol=1e-5, atol=1e-6)

    def test_ten_by_ten_grid(self, make_bundle, two_lap_dataset, tmp_path):
        bundle = make_bundle()
        traj = encode_frames(bundle, two_lap_dataset)
        grid = pca_grid_dump(bundle, traj, n=10, out_path=tmp_path / "pca_grid.png")
        assert grid.tiles.shape == (10, 10, 16, 16, 3)
        assert load_png(grid.path).shape == (178, 178, 3)

    def test_lattice_spans_projection(self):
        result = pca(np.random.default_rng(0).standard_normal((40, 3)))
        lattice = pca_lattice(result, 4)
        lo, hi = result.projection.min(axis=0), result.projection.max(axis=0)
        np.testing.assert_allclose(lattice[0, 0], [lo[0], hi[1]])
        np.testing.assert_allclose(lattice[-1, -1], [hi[0], lo[1]])
        np.testing.assert_allclose(result.transform(result.inverse(lattice.reshape(-1, 2)), 2),
                                   lattice.reshape(-1, 2), atol=1e-10)

    def test_lattice_size_must_be_positive(self):
        with pytest.raises(AnalysisError):
            pca_lattice(pca(np.random.default_rng(0).standard_normal((5, 2))), 0)
