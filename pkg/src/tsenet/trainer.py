"""Training loop: fresh synthetic batches, TS-E gradient, ADAM update, logging."""

from __future__ import annotations

import csv
import logging
import os
import time
from dataclasses import dataclass

import numpy as np

from .checkpoint import Checkpoint
from .config import ExperimentConfig
from .datagen.idx import find_mnist, load_mnist
from .datagen.movies import ClockMovie, clip_rng, make_mnist_batch
from .network import NetworkParams, init_params
from .objective import DegenerateCovarianceError, ObjectiveValue, tse_step_gradient
from .optimizer import AdamState, adam_step

log = logging.getLogger(__name__)


class NumericalAbort(RuntimeError):
    def __init__(self, layer: int, iteration: int, jitter: float):
        super().__init__(f"degenerate covariance in layer {layer} at iteration {iteration} "
                         f"(jitter escalated to {jitter:g})")
        self.layer = layer
        self.iteration = iteration


class DataError(RuntimeError):
    pass


def mnist_splits(config: ExperimentConfig):
    """(train images, train labels, test images, test labels) from ``config.dataset_dir``."""
    pairs = find_mnist(config.dataset_dir)
    if "train" not in pairs:
        raise DataError(f"MNIST training files not found in {config.dataset_dir!r}")
    train_x, train_y = load_mnist(*pairs["train"])
    if "test" in pairs:
        test_x, test_y = load_mnist(*pairs["test"])
    else:
        test_x, test_y = train_x[:0], train_y[:0]
    return train_x, train_y, test_x, test_y


def initial_checkpoint(config: ExperimentConfig) -> Checkpoint:
    params = init_params(config.layer_specs(), config.input_dim, config.init_seed)
    adam = AdamState.zeros_like(params.arrays(), rate=config.rate, beta1=config.beta1,
                                beta2=config.beta2, epsilon=config.epsilon,
                                clip_norm=config.clip_norm or None)
    data_state = np.zeros(0)
    if config.experiment == "clock":
        movie = ClockMovie(config.walk(), (config.resolution,) * 2, rng=clip_rng(config.data_seed))
        data_state = movie.state_array()
    return Checkpoint(config, params, adam, 0, data_state, np.zeros(0))


@dataclass
class Batch:
    inputs: np.ndarray
    clip_starts: np.ndarray


class BatchSource:
    """Synthesizes the training batch for a given iteration.

    Randomness for iteration i comes from seeds keyed on (data seed, i), so
    a resumed run sees the same batches as an uninterrupted one.
    """

    def __init__(self, config: ExperimentConfig, data_state: np.ndarray, images: np.ndarray | None = None):
        self.config = config
        self.images = images
        if config.experiment == "clock":
            self.movie = ClockMovie(config.walk(), (config.resolution,) * 2)
            self.movie.load_state_array(data_state)
        else:
            if images is None:
                raise DataError("MNIST experiment needs source images")
            if images.shape[1:] != (config.resolution, config.resolution):
                raise DataError(f"images are {images.shape[1:]}, config expects {config.resolution}px")

    def state(self) -> np.ndarray:
        return self.movie.state_array() if self.config.experiment == "clock" else np.zeros(0)

    def batch(self, iteration: int) -> Batch:
        cfg = self.config
        if cfg.experiment == "clock":
            rng = clip_rng(cfg.data_seed, iteration)
            clips = [self.movie.next_segment(cfg.clip_frames, rng).flat() for _ in range(cfg.clips_per_batch)]
            return Batch(np.vstack(clips), np.arange(cfg.clips_per_batch) * cfg.clip_frames)
        pool = min(cfg.movie_images, len(self.images))
        pick = clip_rng(cfg.data_seed, iteration).choice(pool, size=min(cfg.clips_per_batch, pool), replace=False)
        inputs, starts = make_mnist_batch(self.images, pick, cfg.walk(), cfg.clip_frames,
                                          (cfg.data_seed, iteration), workers=cfg.workers)
        return Batch(inputs, starts)


def gradient_with_retries(params: NetworkParams, batch: Batch, config: ExperimentConfig, iteration: int):
    jitter = config.jitter
    for attempt in range(config.jitter_retries + 1):
        try:
            return tse_step_gradient(params, batch.inputs, batch.clip_starts, config.objective(jitter))
        except DegenerateCovarianceError as exc:
            if attempt == config.jitter_retries:
                raise NumericalAbort(exc.layer, iteration, jitter) from exc
            log.warning("iteration %d: %s; retrying with jitter %g", iteration, exc, jitter * 10)
            jitter *= 10
    raise AssertionError("unreachable")


def metrics_header(depth: int) -> list[str]:
    return ["iteration", "f_ts", "f_e", "f_total"] + [f"logdet_{l}" for l in range(1, depth + 1)]


def metrics_row(iteration: int, value: ObjectiveValue) -> list[str]:
    nums = [value.f_ts, value.f_e, value.f_total] + list(value.per_layer_logdet)
    return [str(iteration)] + [repr(float(v)) for v in nums]


def train(config: ExperimentConfig, out_dir=None, resume: Checkpoint | None = None,
          images: np.ndarray | None = None, on_row=None) -> Checkpoint:
    """Run (or continue) training; returns the final checkpoint.

    Writes ``metrics.csv`` (deterministic values only), ``timing.csv``
    (wall-clock seconds per logged iteration), periodic ``checkpoint_*.tse``
    and ``checkpoint_final.tse`` into ``out_dir`` when one is given.
    """
    ckpt = resume if resume is not None else initial_checkpoint(config)
    if config.experiment == "mnist" and images is None:
        images = mnist_splits(config)[0]
    source = BatchSource(config, ckpt.data_state, images)
    params, adam = ckpt.params, ckpt.adam
    if config.iterations < ckpt.iteration:
        raise ValueError("checkpoint is already past the requested iteration count")

    metrics_f = timing_f = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.txt"), "w") as f:
            f.write(config.to_text())
        mode = "a" if resume is not None and ckpt.iteration > 0 else "w"
        metrics_f = open(os.path.join(out_dir, "metrics.csv"), mode, newline="")
        timing_f = open(os.path.join(out_dir, "timing.csv"), mode, newline="")
        metrics_w = csv.writer(metrics_f, lineterminator="\n")
        timing_w = csv.writer(timing_f, lineterminator="\n")
        if mode == "w":
            metrics_w.writerow(metrics_header(config.depth))
            timing_w.writerow(["iteration", "wall_seconds"])

    start = time.monotonic()
    summary = ckpt.summary
    iteration = ckpt.iteration
    try:
        while iteration < config.iterations:
            if config.hours and time.monotonic() - start > 3600 * config.hours:
                log.info("wall-clock budget reached after %d iterations", iteration)
                break
            iteration += 1
            batch = source.batch(iteration)
            value, grads = gradient_with_retries(params, batch, config, iteration)
            new_arrays, adam = adam_step(params.arrays(), grads, adam)
            params = params.with_arrays(new_arrays)
            summary = np.array([value.f_ts, value.f_e, value.f_total])

            if iteration == 1 or iteration % config.log_every == 0:
                row = metrics_row(iteration, value)
                if on_row is not None:
                    on_row(row)
                if metrics_f is not None:
                    metrics_w.writerow(row)
                    timing_w.writerow([iteration, f"{time.monotonic() - start:.3f}"])
                    metrics_f.flush()
                    timing_f.flush()
                log.info("iter %d  f_ts %.4g  f_e %.4g  f_total %.4g", iteration, value.f_ts,
                         value.f_e, value.f_total)
            if out_dir is not None and config.checkpoint_every and iteration % config.checkpoint_every == 0:
                Checkpoint(config, params, adam, iteration, source.state(), summary).save(
                    os.path.join(out_dir, f"checkpoint_{iteration:07d}.tse"))
    finally:
        if metrics_f is not None:
            metrics_f.close()
            timing_f.close()

    final = Checkpoint(config, params, adam, iteration, source.state(), summary)
    if out_dir is not None:
        final.save(os.path.join(out_dir, "checkpoint_final.tse"))
    return final
