"""Evaluation commands run against a trained checkpoint."""

from __future__ import annotations

import json
import os

import numpy as np

from .checkpoint import Checkpoint
from .datagen.clock import ClockState
from .datagen.movies import ClockMovie, clip_rng, downsample, make_mnist_clip
from .datagen.pgm import write_pgm
from .evaluation import (
    accuracy_sweep,
    angle_targets,
    fit_affine_readout,
    readout_rms,
    spaced_indices,
    volatility_ratio,
    write_csv,
)
from .network import forward
from .numerics import pca_fit
from .trainer import mnist_splits


class ExperimentMismatch(ValueError):
    pass


def _block_for(side: int) -> int:
    return 4 if side % 4 == 0 else 1


def clock_eval_movie(config, seed: int, frames: int):
    rng = clip_rng(seed)
    start = ClockState(*rng.uniform(0, 2 * np.pi, size=2))
    movie = ClockMovie(config.walk(), (config.resolution,) * 2, clock=start, rng=rng)
    return movie.next_segment(frames, rng)


def eval_clock(ckpt: Checkpoint, out_dir=None, units_per_layer: int = 3) -> dict:
    """Affine readout of (cos alpha, sin alpha) from TS-E outputs and baselines.

    The readout is fitted on a sparse random set of labeled frames of a
    fresh movie and scored on every frame of that movie.
    """
    config = ckpt.config
    if config.experiment != "clock":
        raise ExperimentMismatch(f"checkpoint is for the {config.experiment!r} experiment")
    clip = clock_eval_movie(config, config.eval_seed, config.eval_frames)
    x = clip.flat()
    alpha = clip.ground_truth
    trace = forward(ckpt.params, x)
    k = min(config.pca_components, x.shape[1])
    pca = pca_fit(x, k)
    reps = {
        "tse": trace.layers[-1],
        f"pca{k}": pca.project(x),
        "downsample": downsample(clip.frames, _block_for(config.resolution)),
    }
    labeled = spaced_indices(len(alpha), config.eval_labeled, config.eval_min_gap, config.eval_seed)
    rms, preds = {}, {}
    for name, z in reps.items():
        model = fit_affine_readout(z[labeled], angle_targets(alpha[labeled]))
        rms[name] = readout_rms(model, z, alpha)
        preds[name] = model.predict(z)

    volatility = [float(np.mean(volatility_ratio(x)))]
    volatility += [float(np.mean(volatility_ratio(a))) for a in trace.layers]
    report = {
        "experiment": "clock",
        "iteration": ckpt.iteration,
        "rms": rms,
        "volatility_ratio": volatility,
        "labeled_frames": labeled.tolist(),
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        truth = angle_targets(alpha)
        rows = []
        for name, p in preds.items():
            rows += [(t, truth[t, 0], truth[t, 1], p[t, 0], p[t, 1], name) for t in range(len(alpha))]
        write_csv(os.path.join(out_dir, "fig3_readout.csv"),
                  ["frame", "truth_cos", "truth_sin", "pred_cos", "pred_sin", "method"], rows)
        write_csv(os.path.join(out_dir, "volatility.csv"), ["layer", "units", "mean_ratio"],
                  [(l, (x if l == 0 else trace.layers[l - 1]).shape[1], v) for l, v in enumerate(volatility)])
        rng = np.random.default_rng(config.eval_seed)
        rows = []
        for l, a in enumerate(trace.layers, start=1):
            for unit in np.sort(rng.choice(a.shape[1], size=min(units_per_layer, a.shape[1]), replace=False)):
                rows += [(t, l, int(unit), a[t, unit]) for t in range(a.shape[0])]
        write_csv(os.path.join(out_dir, "fig2_activations.csv"), ["frame", "layer", "unit", "activation"], rows)
        with open(os.path.join(out_dir, "clock_report.json"), "w") as f:
            json.dump(report, f, indent=2)
    return report


def eval_mnist(ckpt: Checkpoint, out_dir=None, data=None) -> dict:
    """1-NN accuracy sweeps over labeled-set sizes for TS-E outputs and baselines.

    ``data`` may supply ``(train_x, train_y, test_x, test_y)`` directly;
    otherwise it is loaded from the configured dataset directory.
    """
    config = ckpt.config
    if config.experiment != "mnist":
        raise ExperimentMismatch(f"checkpoint is for the {config.experiment!r} experiment")
    train_x, train_y, test_x, test_y = data if data is not None else mnist_splits(config)
    n_movie = min(config.movie_images, len(train_x))
    pool_x, pool_y = train_x[n_movie:], train_y[n_movie:]
    flat = lambda imgs: imgs.reshape(len(imgs), -1)

    if config.pca_source == "movie":
        frames = [make_mnist_clip(train_x[i], config.walk(), config.clip_frames,
                                  seed=(config.eval_seed, i)).flat() for i in range(min(n_movie, 200))]
        pca_samples = np.vstack(frames)
    else:
        pca_samples = flat(train_x[:n_movie])
    pca = pca_fit(pca_samples, min(config.pca_components, pca_samples.shape[1]))

    methods = {
        "tse": lambda imgs: forward(ckpt.params, flat(imgs)).layers[-1],
        "pca": lambda imgs: pca.project(flat(imgs)),
        "downsample": lambda imgs: downsample(imgs, _block_for(imgs.shape[-1])),
        "raw": flat,
    }
    sizes = [n for n in config.sweep_sizes if n <= len(pool_y)]
    results = {name: accuracy_sweep(fn, pool_x, pool_y, sizes, test_x, test_y) for name, fn in methods.items()}
    report = {"experiment": "mnist", "iteration": ckpt.iteration,
              "accuracy": {name: dict(rows) for name, rows in results.items()}}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        rows = [(n, acc, name) for name, sweep in results.items() for n, acc in sweep]
        write_csv(os.path.join(out_dir, "fig5_sweep.csv"), ["size", "accuracy", "method"], rows)
        with open(os.path.join(out_dir, "mnist_report.json"), "w") as f:
            json.dump(report, f, indent=2)
    return report


def unit_image(weights: np.ndarray, frame_shape: tuple[int, int] | None) -> np.ndarray:
    """One unit's fan-in weights as an image scaled to [0, 1]; constant weights map to gray."""
    w = np.asarray(weights, dtype=float)
    lo, hi = w.min(), w.max()
    img = np.full_like(w, 0.5) if hi - lo <= 0 else (w - lo) / (hi - lo)
    if frame_shape is not None and int(np.prod(frame_shape)) == w.size:
        return img.reshape(frame_shape)
    side = int(round(np.sqrt(w.size)))
    if side * side == w.size:
        return img.reshape(side, side)
    return img.reshape(1, -1)


def dump_weights(ckpt: Checkpoint, layer: int = 1, count: int = 6, seed: int = 0, out_dir=".") -> list[str]:
    """Write the input weights of ``count`` randomly chosen units of ``layer`` as PGM files."""
    if not 1 <= layer <= ckpt.params.depth:
        raise ValueError(f"layer must be in 1..{ckpt.params.depth}")
    w = ckpt.params.weights[layer - 1]
    units = np.sort(np.random.default_rng(seed).choice(w.shape[0], size=min(count, w.shape[0]), replace=False))
    side = ckpt.config.resolution
    shape = (side, side) if layer == 1 else None
    wdir = os.path.join(out_dir, "weights")
    os.makedirs(wdir, exist_ok=True)
    paths = []
    for u in units:
        path = os.path.join(wdir, f"layer{layer}_unit{u:03d}.pgm")
        write_pgm(path, unit_image(w[u], shape))
        paths.append(path)
    return paths


def gen_preview(config, out_dir=".", count: int = 8, stride: int = 10, images=None) -> list[str]:
    """Sample frames of one training-style movie as PGM files."""
    fdir = os.path.join(out_dir, "frames")
    os.makedirs(fdir, exist_ok=True)
    frames = count * stride
    if config.experiment == "clock":
        clip = clock_eval_movie(config, config.data_seed, frames)
    else:
        if images is None:
            images = mnist_splits(config)[0]
        clip = make_mnist_clip(images[0], config.walk(), frames, seed=config.data_seed)
    paths = []
    for i in range(count):
        path = os.path.join(fdir, f"{config.experiment}_{i * stride:04d}.pgm")
        write_pgm(path, clip.frames[i * stride])
        paths.append(path)
    return paths
