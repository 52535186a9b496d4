"""Experiment configuration as flat ``key = value`` text.

Keys carry their units where one applies.  List values are comma
separated.  Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

from .datagen.camera import CameraWalkParams
from .network import LayerSpec
from .objective import ObjectiveConfig


class ConfigError(ValueError):
    pass


def _key(f) -> str:
    return f.metadata.get("key", f.name)


@dataclass
class ExperimentConfig:
    experiment: str = field(default="clock", metadata={"key": "experiment"})
    resolution: int = field(default=28, metadata={"key": "input.side_pixels"})
    layers: list[int] = field(default_factory=lambda: [144, 121, 100, 81, 64, 49, 36, 25, 16],
                              metadata={"key": "network.layer_units"})
    c: list[float] | None = field(default=None, metadata={"key": "objective.c"})
    d: list[float] | None = field(default=None, metadata={"key": "objective.d"})
    jitter: float = field(default=1e-6, metadata={"key": "objective.jitter"})
    jitter_retries: int = field(default=3, metadata={"key": "objective.jitter_retries"})

    rate: float = field(default=1e-3, metadata={"key": "adam.rate"})
    beta1: float = field(default=0.9, metadata={"key": "adam.beta1"})
    beta2: float = field(default=0.999, metadata={"key": "adam.beta2"})
    epsilon: float = field(default=1e-8, metadata={"key": "adam.epsilon"})
    clip_norm: float = field(default=0.0, metadata={"key": "adam.clip_global_norm"})

    position_std: float = field(default=1.5, metadata={"key": "walk.position.std_pixels"})
    log_scale_std: float = field(default=0.06, metadata={"key": "walk.log_scale.std"})
    rotation_std: float = field(default=0.12, metadata={"key": "walk.rotation.std_radians"})
    shear_std: float = field(default=0.0, metadata={"key": "walk.shear.std"})
    log_aspect_std: float = field(default=0.0, metadata={"key": "walk.log_aspect.std"})
    time_constant: float = field(default=24.0, metadata={"key": "walk.time_constant_frames"})
    pixel_noise: float = field(default=0.08, metadata={"key": "walk.pixel_noise.std"})

    clip_frames: int = field(default=2000, metadata={"key": "batch.clip_frames"})
    clips_per_batch: int = field(default=1, metadata={"key": "batch.clips"})
    workers: int = field(default=1, metadata={"key": "batch.workers"})

    iterations: int = field(default=1000, metadata={"key": "train.iterations"})
    hours: float = field(default=0.0, metadata={"key": "train.max_hours"})
    log_every: int = field(default=10, metadata={"key": "train.log_every_iterations"})
    checkpoint_every: int = field(default=500, metadata={"key": "train.checkpoint_every_iterations"})

    init_seed: int = field(default=1, metadata={"key": "seed.init"})
    data_seed: int = field(default=2, metadata={"key": "seed.data"})
    eval_seed: int = field(default=3, metadata={"key": "seed.eval"})

    eval_frames: int = field(default=10000, metadata={"key": "eval.clock.movie_frames"})
    eval_labeled: int = field(default=100, metadata={"key": "eval.clock.labeled_frames"})
    eval_min_gap: int = field(default=50, metadata={"key": "eval.clock.min_gap_frames"})
    pca_components: int = field(default=16, metadata={"key": "eval.pca_components"})
    pca_source: str = field(default="clean", metadata={"key": "eval.mnist.pca_source"})
    sweep_sizes: list[int] = field(default_factory=lambda: [18, 30, 100, 300, 1000, 3000, 10000, 30000],
                                   metadata={"key": "eval.mnist.sweep_sizes"})
    movie_images: int = field(default=30000, metadata={"key": "data.mnist.movie_images"})
    dataset_dir: str = field(default="data/mnist", metadata={"key": "data.mnist.dir"})
    out_dir: str = field(default="runs/default", metadata={"key": "output.dir"})

    def __post_init__(self):
        self.validate()

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.resolution * self.resolution

    def validate(self) -> None:
        if self.experiment not in ("clock", "mnist"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.layers or any(n < 1 for n in self.layers):
            raise ConfigError("layer sizes must be positive")
        for name in ("c", "d"):
            vals = getattr(self, name)
            if vals is not None and len(vals) != self.depth:
                raise ConfigError(f"objective.{name} has {len(vals)} entries for {self.depth} layers")
        if self.jitter <= 0:
            raise ConfigError("objective.jitter must be positive")
        if self.clip_frames < 2 or self.clips_per_batch < 1:
            raise ConfigError("batches need clips of at least 2 frames")
        if self.time_constant < 1:
            raise ConfigError("walk.time_constant_frames must be >= 1")
        if self.resolution < 8:
            raise ConfigError("input.side_pixels must be >= 8")
        if self.pca_source not in ("clean", "movie"):
            raise ConfigError("eval.mnist.pca_source must be 'clean' or 'movie'")

    def layer_specs(self) -> list[LayerSpec]:
        return [LayerSpec(n, "tanh") for n in self.layers]

    def objective(self, jitter: float | None = None) -> ObjectiveConfig:
        c = self.c if self.c is not None else [2.0**l for l in range(self.depth)]
        d = self.d if self.d is not None else [10.0] * self.depth
        return ObjectiveConfig(c=list(c), d=list(d), jitter=self.jitter if jitter is None else jitter)

    def walk(self) -> CameraWalkParams:
        return CameraWalkParams.build(
            position=self.position_std, log_scale=self.log_scale_std, rotation=self.rotation_std,
            shear=self.shear_std, log_aspect=self.log_aspect_std, time_constant=self.time_constant,
            pixel_noise=self.pixel_noise,
        )

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    # text format

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{_key(f)} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        by_key = {_key(f): f for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in by_key:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            f = by_key[key]
            try:
                values[f.name] = _parse(value, f.type)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        start = base if base is not None else cls()
        return dataclasses.replace(start, **values)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_text(f.read())

    @classmethod
    def preset(cls, name: str) -> "ExperimentConfig":
        if name == "clock":
            return cls()
        if name == "mnist":
            return cls(experiment="mnist", layers=[144, 121, 100, 81, 64, 49, 36, 25, 16],
                       shear_std=0.08, log_aspect_std=0.05, clip_frames=240, clips_per_batch=1000)
        if name == "mini-clock":
            return cls(resolution=16, layers=[32, 16, 8], clip_frames=1000, iterations=2000,
                       rate=1e-2, eval_frames=6000, log_every=10, checkpoint_every=0)
        raise ConfigError(f"unknown preset {name!r}")


def _format(value) -> str:
    if value is None:
        return "default"
    if isinstance(value, list):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(text: str, annotation: str):
    if text == "default":
        if "None" in annotation:
            return None
        raise ValueError("no default placeholder allowed here")
    if annotation.startswith("list[int]"):
        return [int(v) for v in text.split(",") if v.strip()]
    if annotation.startswith("list[float]"):
        return [float(v) for v in text.split(",") if v.strip()]
    if annotation == "int":
        return int(text)
    if annotation == "float":
        return float(text)
    return text
