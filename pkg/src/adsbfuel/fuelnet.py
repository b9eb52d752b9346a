"""Wide-and-deep interval fuel regressor, trained from scratch in numpy.

The model maps ``(t0, meta, alpha, beta)`` to a fuel mass::

    s = sigmoid(F_wide + F_deep + global_bias)
    q_hat = q_min + s * (q_max - q_min)

``F_wide`` is linear in the encoded ``(t0, meta)`` vector and ``F_deep`` is a
ReLU stack over the concatenated coefficient vectors.  Training minimises
the mean squared error between ``s`` and the scaled target with mini-batch
SGD plus momentum, or Adam as a config switch.  All randomness comes from
two seeded streams (weight initialisation and shuffling), so a fixed seed
reproduces a model bit for bit in single-threaded mode.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import (
    CorruptModel,
    Diverged,
    ShapeMismatch,
    TargetOutOfRange,
    UnknownAircraftType,
    VersionMismatch,
)
from .spectral import SpectralFeature, featurize
from .synth import TrainingSample
from .trajectory import AircraftMeta, FlightTrack, slice_track

FORMAT_VERSION = 1
MOMENTUM = 0.9
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
SATURATION_FLAG = 0.99
OPTIMIZERS = ("sgd", "adam")


@dataclass(frozen=True)
class ModelConfig:
    N_h: int = 50
    N_v: int = 50
    hidden_sizes: tuple[int, ...] = (256, 128, 64)
    activation: str = "relu"
    learning_rate: float = 0.05
    batch_size: int = 64
    epochs: int = 30
    seed: int = 0
    T_M: float = 10800.0
    type_vocabulary: tuple[str, ...] = ()
    lr_schedule: str = "cosine"
    optimizer: str = "sgd"
    standardize: bool = True
    shuffle: bool = True
    min_interval: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "type_vocabulary", tuple(str(t) for t in self.type_vocabulary))
        if not self.hidden_sizes or any(h <= 0 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be a non-empty sequence of positive integers")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation {self.activation!r}")
        if not 0.0 < self.learning_rate < 1.0:
            raise ValueError("learning_rate must lie in (0, 1)")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")
        if self.N_h < 0 or self.N_v < 0 or not self.T_M > 0:
            raise ValueError("radii must be non-negative and T_M positive")
        if self.lr_schedule not in ("constant", "cosine"):
            raise ValueError(f"unknown lr_schedule {self.lr_schedule!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if len(set(self.type_vocabulary)) != len(self.type_vocabulary):
            raise ValueError("type_vocabulary has duplicates")

    @property
    def deep_size(self) -> int:
        return self.N_h + self.N_v + 2

    @property
    def wide_size(self) -> int:
        return 3 + len(self.type_vocabulary)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        d["type_vocabulary"] = list(self.type_vocabulary)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ModelConfig:
        return cls(**d)


@dataclass(frozen=True)
class TargetScaler:
    q_min: float
    q_max: float

    def __post_init__(self):
        if not (0.0 <= self.q_min < self.q_max and math.isfinite(self.q_max)):
            raise ValueError(f"need 0 <= q_min < q_max, got [{self.q_min}, {self.q_max}]")

    @property
    def span(self) -> float:
        return self.q_max - self.q_min

    def scale(self, q):
        return (np.asarray(q, dtype=float) - self.q_min) / self.span

    def unscale(self, s):
        """Map ``s`` in (0, 1) to kg, kept strictly inside ``(q_min, q_max)``.

        A saturated sigmoid rounds to exactly 0 or 1 in floating point; the
        clip moves such values to the nearest representable interior point.
        """
        q = self.q_min + np.asarray(s, dtype=float) * self.span
        return np.clip(q, np.nextafter(self.q_min, np.inf), np.nextafter(self.q_max, -np.inf))


@dataclass(eq=False)
class WideDeepModel:
    """Parameters of the regressor.

    ``deep_layers`` holds ``(W, b)`` pairs with ``W`` of shape
    ``(fan_in, fan_out)``.  ``input_mean``/``input_std`` standardise the deep
    input (alpha then beta) and are fit on the training set.
    """

    config: ModelConfig
    scaler: TargetScaler
    wide_weights: np.ndarray
    wide_bias: np.ndarray
    deep_layers: list[tuple[np.ndarray, np.ndarray]]
    output_weights: np.ndarray
    global_bias: np.ndarray
    input_mean: np.ndarray
    input_std: np.ndarray

    def __post_init__(self):
        # scalar biases live in shape-(1,) arrays so they update in place
        self.wide_bias = np.array(self.wide_bias, dtype=float).reshape(1)
        self.global_bias = np.array(self.global_bias, dtype=float).reshape(1)
        self.check_shapes()

    def check_shapes(self) -> None:
        c = self.config
        if self.wide_weights.shape != (c.wide_size,):
            raise ShapeMismatch(f"wide weights {self.wide_weights.shape}, expected ({c.wide_size},)")
        if self.input_mean.shape != (c.deep_size,) or self.input_std.shape != (c.deep_size,):
            raise ShapeMismatch("input standardisation vectors do not match the deep input size")
        if len(self.deep_layers) != len(c.hidden_sizes):
            raise ShapeMismatch("number of deep layers does not match hidden_sizes")
        fan_in = c.deep_size
        for (W, b), h in zip(self.deep_layers, c.hidden_sizes):
            if W.shape != (fan_in, h) or b.shape != (h,):
                raise ShapeMismatch(f"layer shape {W.shape}/{b.shape}, expected ({fan_in}, {h})/({h},)")
            fan_in = h
        if self.output_weights.shape != (fan_in,):
            raise ShapeMismatch(f"output weights {self.output_weights.shape}, expected ({fan_in},)")

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays in a fixed order; updates in place reach the model."""
        out = [self.wide_weights, self.wide_bias]
        for W, b in self.deep_layers:
            out += [W, b]
        return out + [self.output_weights, self.global_bias]

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())


# ---------------------------------------------------------------------------
# encoding and forward pass
# ---------------------------------------------------------------------------


def encode_wide(t0: float, meta: AircraftMeta, vocabulary: Sequence[str], T_M: float = 10800.0) -> np.ndarray:
    """``[t0 / T_M, one-hot(type), age / 50, wingspan / 80]``."""
    vocabulary = list(vocabulary)
    try:
        k = vocabulary.index(meta.aircraft_type)
    except ValueError:
        raise UnknownAircraftType(f"aircraft type {meta.aircraft_type!r} not in vocabulary {vocabulary}") from None
    x = np.zeros(3 + len(vocabulary))
    x[0] = t0 / T_M
    x[1 + k] = 1.0
    x[-2] = meta.age / 50.0
    x[-1] = meta.wingspan / 80.0
    return x


def _deep_input(feature: SpectralFeature, config: ModelConfig) -> np.ndarray:
    if feature.radii != (config.N_h, config.N_v):
        raise ShapeMismatch(f"feature radii {feature.radii}, model expects {(config.N_h, config.N_v)}")
    return np.concatenate([feature.alpha, feature.beta])


def encode_batch(model_or_config, items) -> tuple[np.ndarray, np.ndarray]:
    """Stack ``(t0, meta, feature)`` triples into wide and raw deep matrices."""
    cfg = model_or_config.config if isinstance(model_or_config, WideDeepModel) else model_or_config
    items = list(items)
    Xw = np.empty((len(items), cfg.wide_size))
    Xd = np.empty((len(items), cfg.deep_size))
    for i, (t0, meta, feat) in enumerate(items):
        Xw[i] = encode_wide(t0, meta, cfg.type_vocabulary, cfg.T_M)
        Xd[i] = _deep_input(feat, cfg)
    return Xw, Xd


def _sigmoid(z):
    # split form avoids overflow warnings for large |z|
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward_cached(model: WideDeepModel, Xw: np.ndarray, Xd: np.ndarray):
    acts = [(Xd - model.input_mean) / model.input_std]
    for W, b in model.deep_layers:
        acts.append(np.maximum(acts[-1] @ W + b, 0.0))
    z = Xw @ model.wide_weights + model.wide_bias[0] + acts[-1] @ model.output_weights + model.global_bias[0]
    return _sigmoid(z), acts


def forward_batch(model: WideDeepModel, Xw: np.ndarray, Xd: np.ndarray) -> np.ndarray:
    """Sigmoid outputs ``s`` for encoded rows."""
    return _forward_cached(model, Xw, Xd)[0]


def forward(model: WideDeepModel, t0: float, meta: AircraftMeta, feature: SpectralFeature) -> float:
    """Predicted fuel mass (kg) for one interval."""
    Xw, Xd = encode_batch(model, [(t0, meta, feature)])
    return float(model.scaler.unscale(forward_batch(model, Xw, Xd)[0]))


def predict_samples(model: WideDeepModel, samples: Sequence[TrainingSample], batch: int = 4096) -> np.ndarray:
    """Predicted fuel mass for each sample (kg)."""
    out = np.empty(len(samples))
    for lo in range(0, len(samples), batch):
        part = samples[lo : lo + batch]
        Xw, Xd = encode_batch(model, [(s.feature.t0, s.meta, s.feature) for s in part])
        out[lo : lo + len(part)] = model.scaler.unscale(forward_batch(model, Xw, Xd))
    return out


# ---------------------------------------------------------------------------
# loss and gradients
# ---------------------------------------------------------------------------


def _targets(model: WideDeepModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    sc = model.scaler
    bad = (q < sc.q_min) | (q > sc.q_max)
    if np.any(bad):
        raise TargetOutOfRange(
            f"{int(bad.sum())} target(s) outside scaler range [{sc.q_min}, {sc.q_max}], e.g. {q[bad][0]}"
        )
    return sc.scale(q)


def loss_encoded(model: WideDeepModel, Xw, Xd, y) -> float:
    s = forward_batch(model, Xw, Xd)
    return float(np.mean((s - y) ** 2))


def loss(model: WideDeepModel, batch: Sequence[TrainingSample]) -> float:
    """Mean squared error between sigmoid outputs and scaled targets."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    Xw, Xd = encode_batch(model, [(s.feature.t0, s.meta, s.feature) for s in batch])
    y = _targets(model, [s.q_true for s in batch])
    return loss_encoded(model, Xw, Xd, y)


def gradients(model: WideDeepModel, Xw, Xd, y) -> tuple[float, list[np.ndarray]]:
    """Loss and its gradient for every array in ``model.parameters()``."""
    s, acts = _forward_cached(model, Xw, Xd)
    n = len(y)
    r = s - y
    L = float(np.mean(r**2))
    dz = (2.0 / n) * r * s * (1.0 - s)
    g_out = acts[-1].T @ dz
    g_gb = np.array([dz.sum()])
    g_ww = Xw.T @ dz
    g_wb = np.array([dz.sum()])
    delta = np.outer(dz, model.output_weights)
    deep = []
    for l in range(len(model.deep_layers) - 1, -1, -1):
        W, _ = model.deep_layers[l]
        delta = delta * (acts[l + 1] > 0)
        deep.append((acts[l].T @ delta, delta.sum(axis=0)))
        if l:
            delta = delta @ W.T
    grads = [g_ww, g_wb]
    for gW, gb in reversed(deep):
        grads += [gW, gb]
    grads += [g_out, g_gb]
    return L, grads


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def init_model(config: ModelConfig, scaler: TargetScaler, input_mean=None, input_std=None) -> WideDeepModel:
    """Glorot-uniform weights from the ``init`` stream, zero biases."""
    rng = np.random.default_rng([config.seed, 0])

    def glorot(fan_in, fan_out, shape):
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=shape)

    wide = glorot(config.wide_size, 1, (config.wide_size,))
    layers = []
    fan_in = config.deep_size
    for h in config.hidden_sizes:
        layers.append((glorot(fan_in, h, (fan_in, h)), np.zeros(h)))
        fan_in = h
    out = glorot(fan_in, 1, (fan_in,))
    mean = np.zeros(config.deep_size) if input_mean is None else np.asarray(input_mean, float)
    std = np.ones(config.deep_size) if input_std is None else np.asarray(input_std, float)
    return WideDeepModel(config, scaler, wide, 0.0, layers, out, 0.0, mean, std)


def canonical_order(samples: Sequence[TrainingSample]) -> list[int]:
    """Indices sorting samples by flight id, then segment start and content."""

    def key(i):
        s = samples[i]
        return (s.flight_id or "", float(s.feature.t0), float(s.q_true), s.feature.alpha.tobytes())

    return sorted(range(len(samples)), key=key)


def fit_scaler(samples: Sequence[TrainingSample]) -> TargetScaler:
    return TargetScaler(0.0, 1.1 * max(s.q_true for s in samples))


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    saturated: int = 0

    def smoothed(self, window: int = 3) -> np.ndarray:
        x = np.asarray(self.loss)
        if len(x) < window:
            return x
        return np.convolve(x, np.ones(window) / window, mode="valid")


def _lr_at(config: ModelConfig, step: int, total: int) -> float:
    if config.lr_schedule == "constant":
        return config.learning_rate
    return 0.5 * config.learning_rate * (1.0 + math.cos(math.pi * step / total))


def train(
    samples: Sequence[TrainingSample],
    config: ModelConfig,
    callback: Callable[[int, float], None] | None = None,
    threads: int = 1,
) -> tuple[WideDeepModel, TrainHistory]:
    """Fit a model by mini-batch descent (momentum SGD, or Adam if configured).

    Samples are first put in canonical order, so the file order of a dataset
    does not matter when ``config.shuffle`` is on.  The vocabulary defaults
    to the sorted set of types in the data.
    """
    if len(samples) < config.batch_size:
        raise ValueError(f"dataset of {len(samples)} samples is smaller than batch_size {config.batch_size}")
    if not config.type_vocabulary:
        config = replace(config, type_vocabulary=tuple(sorted({s.meta.aircraft_type for s in samples})))
    if config.shuffle:
        samples = [samples[i] for i in canonical_order(samples)]
    scaler = fit_scaler(samples)
    with threadpool_limits(limits=threads):
        Xw, Xd = encode_batch(config, [(s.feature.t0, s.meta, s.feature) for s in samples])
        mean = np.zeros(config.deep_size)
        std = np.ones(config.deep_size)
        if config.standardize:
            mean = Xd.mean(axis=0)
            std = Xd.std(axis=0)
            std = np.where(std > 1e-12 * max(1.0, float(np.abs(mean).max())), std, 1.0)
        model = init_model(config, scaler, mean, std)
        y = scaler.scale([s.q_true for s in samples])
        history = _fit(model, Xw, Xd, y, callback)
    return model, history


def _flatten(model: WideDeepModel) -> np.ndarray:
    """Move all parameters into one buffer and rebind the model to views of it."""
    params = model.parameters()
    flat = np.concatenate([p.ravel() for p in params])
    views, at = [], 0
    for p in params:
        views.append(flat[at : at + p.size].reshape(p.shape))
        at += p.size
    it = iter(views)
    model.wide_weights, model.wide_bias = next(it), next(it)
    model.deep_layers = [(next(it), next(it)) for _ in model.deep_layers]
    model.output_weights, model.global_bias = next(it), next(it)
    return flat


def _fit(model: WideDeepModel, Xw, Xd, y, callback) -> TrainHistory:
    """Mini-batch descent with momentum SGD or Adam on one flat parameter buffer."""
    cfg = model.config
    rng = np.random.default_rng([cfg.seed, 1])
    flat = _flatten(model)
    m1 = np.zeros_like(flat)
    m2 = np.zeros_like(flat) if cfg.optimizer == "adam" else None
    tmp = np.empty_like(flat)
    b1, b2 = ADAM_BETAS
    n = len(y)
    bs = cfg.batch_size
    per_epoch = n // bs
    total = per_epoch * cfg.epochs
    history = TrainHistory()
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        running = 0.0
        for k in range(per_epoch):
            idx = order[k * bs : (k + 1) * bs]
            lr = _lr_at(cfg, step, total)
            L, grads = gradients(model, Xw[idx], Xd[idx], y[idx])
            if not math.isfinite(L):
                raise Diverged(f"non-finite loss at epoch {epoch}, batch {k} (lr={lr:g})")
            g = np.concatenate([x.ravel() for x in grads])
            step += 1
            if m2 is None:
                m1 *= MOMENTUM
                m1 -= lr * g
                flat += m1
            else:
                m1 *= b1
                m1 += (1.0 - b1) * g
                m2 *= b2
                np.multiply(g, g, out=tmp)
                tmp *= 1.0 - b2
                m2 += tmp
                np.sqrt(m2, out=tmp)
                tmp /= math.sqrt(1.0 - b2**step)
                tmp += ADAM_EPS
                np.divide(m1, tmp, out=tmp)
                tmp *= lr / (1.0 - b1**step)
                flat -= tmp
            running += L
        if not np.all(np.isfinite(flat)):
            raise Diverged(f"non-finite parameters after epoch {epoch}")
        epoch_loss = running / per_epoch
        history.loss.append(epoch_loss)
        history.lr.append(lr)
        if callback is not None:
            callback(epoch, epoch_loss)
    s = forward_batch(model, Xw, Xd)
    history.saturated = int(np.count_nonzero(s > SATURATION_FLAG))
    return history


# ---------------------------------------------------------------------------
# prediction on tracks
# ---------------------------------------------------------------------------


def _check_interval(model: WideDeepModel, track: FlightTrack, t_a: float, t_b: float) -> None:
    if t_b - t_a < model.config.min_interval:
        raise ValueError(f"interval of {t_b - t_a:g} s is shorter than the {model.config.min_interval:g} s minimum")


def predict_intervals(model: WideDeepModel, track: FlightTrack, intervals) -> np.ndarray:
    """Predicted fuel (kg) for each ``(t_a, t_b)`` pair on one track."""
    if track.meta is None:
        raise ValueError("track has no aircraft metadata")
    cfg = model.config
    items = []
    for t_a, t_b in intervals:
        _check_interval(model, track, t_a, t_b)
        seg = slice_track(track, t_a, t_b)
        items.append((seg.duration, track.meta, featurize(seg, cfg.N_h, cfg.N_v, cfg.T_M)))
    if not items:
        return np.empty(0)
    Xw, Xd = encode_batch(model, items)
    return model.scaler.unscale(forward_batch(model, Xw, Xd))


def predict_interval(model: WideDeepModel, track: FlightTrack, t_a: float, t_b: float) -> float:
    """Predicted fuel (kg) burned on ``[t_a, t_b]`` of ``track``."""
    return float(predict_intervals(model, track, [(t_a, t_b)])[0])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def model_to_dict(model: WideDeepModel) -> dict:
    return {
        "version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "scaler": {"q_min": model.scaler.q_min, "q_max": model.scaler.q_max},
        "vocabulary": list(model.config.type_vocabulary),
        "input": {"mean": model.input_mean.tolist(), "std": model.input_std.tolist()},
        "wide": {"w": model.wide_weights.tolist(), "b": float(model.wide_bias[0])},
        "deep": [{"W": W.tolist(), "b": b.tolist()} for W, b in model.deep_layers],
        "out": {"w": model.output_weights.tolist()},
        "global_bias": float(model.global_bias[0]),
    }


def model_from_dict(d: dict) -> WideDeepModel:
    if not isinstance(d, dict) or "version" not in d:
        raise CorruptModel("model document has no version tag")
    if d["version"] != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {d['version']!r}, this build reads {FORMAT_VERSION}")
    try:
        cfg = ModelConfig.from_dict(d["config"])
        if list(cfg.type_vocabulary) != list(d["vocabulary"]):
            raise CorruptModel("vocabulary disagrees with config")
        arr = lambda x: np.array(x, dtype=float)  # noqa: E731
        return WideDeepModel(
            cfg,
            TargetScaler(float(d["scaler"]["q_min"]), float(d["scaler"]["q_max"])),
            arr(d["wide"]["w"]),
            float(d["wide"]["b"]),
            [(arr(layer["W"]).reshape(-1, len(layer["b"])), arr(layer["b"])) for layer in d["deep"]],
            arr(d["out"]["w"]),
            float(d["global_bias"]),
            arr(d["input"]["mean"]),
            arr(d["input"]["std"]),
        )
    except (KeyError, TypeError, ValueError, ShapeMismatch) as exc:
        raise CorruptModel(f"invalid model document: {exc}") from exc


def save_model(model: WideDeepModel, sink) -> None:
    """Write the model as JSON to a path (atomically) or a text stream."""
    text = json.dumps(model_to_dict(model), separators=(",", ":"))
    if hasattr(sink, "write"):
        sink.write(text)
        return
    atomic_write_text(sink, text)


def load_model(source) -> WideDeepModel:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"not a JSON document: {exc}") from exc
    return model_from_dict(d)


def atomic_write_text(path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
