"""
Closed-loop generation: each generated image is fed back as the next input.

    z_i = Enc_mean(x_i),  x_{i+1} = Gen(z_i)

Encoding uses the posterior mean and the generator runs with batch-norm
running statistics, so a run is a deterministic function of the bundle and
its start frame.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..mazeworld import MazeDataset
from ..models.config import Variant
from ..models.exceptions import ClassificationError, NonFiniteError, ShapeError
from ..nets import ModelBundle, encode, generate
from ..services.logging import ProgressTracker

logger = logging.getLogger(__name__)

DEFAULT_ITERATIONS = 200
DEFAULT_STRIDE = 5
CHUNK = 32


@dataclass
class ClosedLoopRun:
    """
    One autonomous rollout.

    ``z`` holds z_0..z_N. ``images`` holds the images x_k for
    k = image_start .. image_start + len(images) − 1; a full run keeps all
    N + 1 images.
    """

    start_index: int
    z: np.ndarray                       # (N+1, d_z)
    images: np.ndarray                  # (m, 3, S, S) float32 in [−1, 1]
    image_start: int
    variant: Variant
    tau: int
    zdim: int
    seed: int

    @property
    def iterations(self) -> int:
        return int(self.z.shape[0]) - 1

    def image(self, iteration: int) -> np.ndarray:
        k = iteration - self.image_start
        if not 0 <= k < len(self.images):
            raise ClassificationError(
                f"Image {iteration} was not kept (kept {self.image_start}.."
                f"{self.image_start + len(self.images) - 1})",
                error_code="IMAGE_NOT_KEPT",
                context={"iteration": iteration, "start_index": self.start_index})
        return self.images[k]

    def identity(self) -> dict:
        return {'variant': self.variant.value, 'tau': self.tau, 'zdim': self.zdim,
                'seed': self.seed, 'start_index': self.start_index}


def _rollout(bundle: ModelBundle, x: np.ndarray, iterations: int,
             keep: Tuple[int, int], starts: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Latents (N+1, b, d_z) and kept images (m, b, 3, S, S) for a batch of start images."""
    lo, hi = keep
    latents = np.empty((iterations + 1, x.shape[0], bundle.zdim), dtype=np.float32)
    kept = np.empty((hi - lo + 1,) + x.shape, dtype=np.float32) if hi >= lo else \
        np.zeros((0,) + x.shape, dtype=np.float32)
    for i in range(iterations + 1):
        if lo <= i <= hi:
            kept[i - lo] = x
        z = encode(bundle, x, mode="mean")
        if not np.all(np.isfinite(z)):
            raise NonFiniteError(
                f"Closed loop produced a non-finite latent at iteration {i}",
                error_code="NON_FINITE",
                context={"iteration": i, "starts": [int(s) for s in starts]})
        latents[i] = z
        if i < iterations:
            x = generate(bundle, z)
    return latents, kept


def closed_loop(bundle: ModelBundle, x_start: np.ndarray, iterations: int = DEFAULT_ITERATIONS,
                start_index: int = 0) -> ClosedLoopRun:
    """
    Iterate Gen∘Enc from one start image and keep every image and latent.

    Args:
        bundle: Trained bundle
        x_start: (3, S, S) image in [−1, 1]
        iterations: Number of generator steps N
        start_index: Dataset frame the image came from (recorded only)

    Returns:
        ClosedLoopRun: N + 1 latents and N + 1 images

    Raises:
        ShapeError: If the image does not match the bundle
        NonFiniteError: If a latent becomes NaN or infinite; the iteration is in the context
    """
    x = np.asarray(x_start, dtype=np.float32)
    size = bundle.arch.image_size
    if x.shape != (3, size, size):
        raise ShapeError(f"Start image must have shape (3, {size}, {size}), got {x.shape}",
                         error_code="SHAPE_MISMATCH", context={"input": x.shape})
    if iterations < 1:
        raise ClassificationError("Closed loop needs at least one iteration",
                                  error_code="BAD_ARGUMENT", context={"iterations": iterations})
    latents, kept = _rollout(bundle, x[None], iterations, (0, iterations), [start_index])
    return ClosedLoopRun(start_index=int(start_index), z=latents[:, 0].copy(),
                         images=kept[:, 0].copy(), image_start=0, variant=bundle.variant,
                         tau=bundle.tau, zdim=bundle.zdim, seed=bundle.seed)


def default_starts(frames: int, stride: int = DEFAULT_STRIDE) -> List[int]:
    """Start frames 0, stride, 2·stride, … below ``frames``."""
    return list(range(0, frames, stride))


def closed_loop_many(bundle: ModelBundle, dataset: MazeDataset,
                     starts: Optional[Sequence[int]] = None,
                     iterations: int = DEFAULT_ITERATIONS,
                     keep: Optional[Tuple[int, int]] = (180, 200),
                     chunk: int = CHUNK) -> List[ClosedLoopRun]:
    """
    Closed loops from many dataset frames, batched ``chunk`` starts at a time.

    Args:
        bundle: Trained bundle
        dataset: Source of the start frames
        starts: Frame indices (every fifth frame by default)
        iterations: Generator steps per run
        keep: Inclusive iteration range whose images are kept; None keeps none
        chunk: Starts per forward batch

    Returns:
        List[ClosedLoopRun]: One run per start, in the given order
    """
    starts = default_starts(len(dataset)) if starts is None else [int(s) for s in starts]
    bad = [s for s in starts if not 0 <= s < len(dataset)]
    if bad:
        raise ClassificationError(f"Start frames outside the dataset: {bad[:5]}",
                                  error_code="BAD_START", context={"frames": len(dataset)})
    if keep is None:
        window = (1, 0)
    else:
        window = (max(0, keep[0]), min(iterations, keep[1]))

    runs: List[ClosedLoopRun] = []
    tracker = ProgressTracker(logger, unit="starts")
    tracker.start_operation(f"closed loop {bundle.variant.value} tau={bundle.tau} seed={bundle.seed}",
                            len(starts))
    for offset in range(0, len(starts), chunk):
        batch = starts[offset:offset + chunk]
        latents, kept = _rollout(bundle, dataset.images(batch), iterations, window, batch)
        for b, start in enumerate(batch):
            runs.append(ClosedLoopRun(
                start_index=start, z=latents[:, b].copy(), images=kept[:, b].copy(),
                image_start=window[0], variant=bundle.variant, tau=bundle.tau,
                zdim=bundle.zdim, seed=bundle.seed))
        tracker.update_progress(len(batch))
    tracker.complete_operation()
    return runs
