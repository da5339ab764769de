"""Tests for closed-loop rollouts."""

import numpy as np
import pytest

from cogmap.dreamer import closed_loop, closed_loop_many, default_starts
from cogmap.dreamer.closed_loop import CHUNK
from cogmap.models.exceptions import ClassificationError, ShapeError


@pytest.mark.integration
class TestClosedLoop:

    def test_keeps_every_latent_and_image(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        run = closed_loop(bundle, two_lap_dataset.images([7])[0], iterations=5, start_index=7)
        assert run.z.shape == (6, 3)
        assert run.images.shape == (6, 3, 16, 16)
        assert run.iterations == 5
        np.testing.assert_array_equal(run.image(0), two_lap_dataset.images([7])[0])
        assert run.identity() == {'variant': 'VAE', 'tau': 1, 'zdim': 3, 'seed': 1, 'start_index': 7}

    def test_deterministic(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        start = two_lap_dataset.images([0])[0]
        a = closed_loop(bundle, start, iterations=4)
        b = closed_loop(bundle, start, iterations=4)
        np.testing.assert_array_equal(a.z, b.z)
        np.testing.assert_array_equal(a.images, b.images)

    def test_wrong_image_shape(self, make_bundle):
        with pytest.raises(ShapeError):
            closed_loop(make_bundle(), np.zeros((3, 8, 8)))

    def test_needs_an_iteration(self, make_bundle, two_lap_dataset):
        with pytest.raises(ClassificationError) as excinfo:
            closed_loop(make_bundle(), two_lap_dataset.images([0])[0], iterations=0)
        assert excinfo.value.error_code == "BAD_ARGUMENT"


@pytest.mark.integration
class TestClosedLoopMany:

    def test_batched_runs_match_single_runs(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        runs = closed_loop_many(bundle, two_lap_dataset, starts=[0, 5, 10], iterations=6,
                                keep=(3, 6), chunk=2)
        assert [r.start_index for r in runs] == [0, 5, 10]
        single = closed_loop(bundle, two_lap_dataset.images([5])[0], iterations=6)
        np.testing.assert_allclose(runs[1].z, single.z, rtol=1e-4, atol=1e-5)
        assert runs[1].images.shape == (4, 3, 16, 16)
        np.testing.assert_allclose(runs[1].image(6), single.image(6), atol=1e-4)

    def test_short_final_chunk_matches_single_runs(self, make_bundle, two_lap_dataset):
        bundle = make_bundle()
        starts = list(range(0, 330, 10))
        assert len(starts) % CHUNK != 0
        runs = closed_loop_many(bundle, two_lap_dataset, starts=starts, iterations=4, keep=None)
        assert [r.start_index for r in runs] == starts
        for index in (0, CHUNK - 1, len(starts) - 1):
            single = closed_loop(bundle, two_lap_dataset.images([starts[index]])[0], iterations=4)
            np.testing.assert_allclose(runs[index].z, single.z, rtol=1e-4, atol=1e-5)

    def test_images_outside_keep_range(self, make_bundle, two_lap_dataset):
        run = closed_loop_many(make_bundle(), two_lap_dataset, starts=[0], iterations=6,
                               keep=(3, 6))[0]
        with pytest.raises(ClassificationError) as excinfo:
            run.image(2)
        assert excinfo.value.error_code == "IMAGE_NOT_KEPT"

    def test_keep_none(self, make_bundle, two_lap_dataset):
        run = closed_loop_many(make_bundle(), two_lap_dataset, starts=[0], iterations=3,
                               keep=None)[0]
        assert run.images.shape[0] == 0
        assert run.z.shape == (4, 3)

    def test_start_outside_dataset(self, make_bundle, two_lap_dataset):
        with pytest.raises(ClassificationError) as excinfo:
            closed_loop_many(make_bundle(), two_lap_dataset, starts=[0, 480], iterations=2)
        assert excinfo.value.error_code == "BAD_START"


@pytest.mark.unit
def test_default_starts():
    starts = default_starts(480)
    assert len(starts) == 96
    assert starts[:3] == [0, 5, 10] and starts[-1] == 475
