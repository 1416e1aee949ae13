"""Differentiable objectives: analytic landscapes, synthetic datasets, MLP.

Every objective exposes ``value_and_grad(theta, batch)`` returning the
batch loss and its exact analytic gradient; one call counts as one
forward-backward propagation in the cost accounting. Datasets are
regenerated bit-identically from their descriptor, which is what lets
experiment outputs be byte-stable across reruns and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .numeric import RngStream

# Dataset generation draws from its own seed sequence, spawn-keyed apart
# from the four run streams so a shared integer seed never aliases them.
_DATASET_SPAWN_KEY = 11


class Objective:
    """Base class for differentiable objectives.

    Subclasses set ``param_dim`` and implement ``value_and_grad``.
    ``num_samples`` is None for full-batch-only objectives and the
    dataset size for estimators that accept index batches. Objectives are
    immutable after construction and safe to evaluate concurrently.
    """

    param_dim: int
    num_samples: int | None = None

    def value_and_grad(self, theta: np.ndarray, batch=None) -> tuple[float, np.ndarray]:
        raise NotImplementedError

    def value(self, theta: np.ndarray, batch=None) -> float:
        return self.value_and_grad(theta, batch)[0]

    def init_params(self, rng: RngStream) -> np.ndarray:
        return rng.standard_normal(self.param_dim)

    def _check_theta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.param_dim,):
            raise DimensionError(
                f"parameter vector has shape {theta.shape}, expected ({self.param_dim},)"
            )
        return theta


class QuadraticObjective(Objective):
    """L(theta) = 1/2 (theta - center)^T H (theta - center).

    ``hessian`` may be a full symmetric matrix or a 1-D array of diagonal
    curvatures. The exact gradient is H (theta - center).
    """

    def __init__(self, hessian, center=None):
        hessian = np.asarray(hessian, dtype=np.float64)
        if hessian.ndim == 1:
            hessian = np.diag(hessian)
        if hessian.ndim != 2 or hessian.shape[0] != hessian.shape[1]:
            raise DimensionError("hessian must be square or a 1-D diagonal")
        self.hessian = hessian
        self.param_dim = hessian.shape[0]
        if center is None:
            center = np.zeros(self.param_dim)
        self.center = np.asarray(center, dtype=np.float64)
        if self.center.shape != (self.param_dim,):
            raise DimensionError("center length does not match hessian")

    def value_and_grad(self, theta, batch=None):
        theta = self._check_theta(theta)
        delta = theta - self.center
        grad = self.hessian @ delta
        return float(0.5 * delta @ grad), grad


def _quartic_flank(curvature: float, half: float, barrier: float) -> tuple[float, float]:
    """Cubic and quartic coefficients of one well-to-apex quartic flank.

    The flank W(v) = 1/2 k v^2 + a v^3 + b v^4 on local coordinate
    v in [0, half] must reach the barrier height with zero slope at
    v = half. Its slope factors as W'(v) = 4b v (v - half)(v - r) with
    the spare root r outside (0, half) exactly when
    barrier > curvature * half^2 / 12, so under that bound the flank is
    strictly monotone and contributes no stationary point of its own.
    """
    m = barrier / half**2
    a = (4.0 * m - curvature) / half
    b = (0.5 * curvature - 3.0 * m) / half**2
    return a, b


class TwoWellLandscape(Objective):
    """Smooth 1-D double well extended to d dimensions.

    The first coordinate carries two local minima of equal depth: a flat
    well (small curvature) and a sharp well (large curvature), joined by
    per-side quartic flanks through a single barrier at the midpoint.
    The profile is C2 at the well bottoms and C1 with a zero slope at the
    apex, and has exactly three stationary points: the two minima and the
    barrier top. The remaining coordinates add a convex quadratic bowl.
    Only the well locations, the equal depth, and the two curvatures are
    contractual; the blend in between is an implementation detail.
    """

    def __init__(
        self,
        flat_center: float = -1.0,
        sharp_center: float = 1.0,
        flat_curvature: float = 1.0,
        sharp_curvature: float = 25.0,
        depth: float = 0.0,
        dim: int = 1,
        barrier: float | None = None,
        tail_curvature: float | None = None,
    ):
        if flat_center == sharp_center:
            raise ConfigError("well centers must be distinct")
        if not (0 < flat_curvature < sharp_curvature):
            raise ConfigError("need 0 < flat_curvature < sharp_curvature")
        if dim < 1:
            raise ConfigError("dim must be at least 1")
        self.flat_center = float(flat_center)
        self.sharp_center = float(sharp_center)
        self.flat_curvature = float(flat_curvature)
        self.sharp_curvature = float(sharp_curvature)
        self.depth = float(depth)
        self.param_dim = int(dim)
        self.tail_curvature = float(
            flat_curvature if tail_curvature is None else tail_curvature
        )

        # Left/right orientation of the two wells along coordinate 0.
        if self.flat_center < self.sharp_center:
            self._u1, self._k1 = self.flat_center, self.flat_curvature
            self._u2, self._k2 = self.sharp_center, self.sharp_curvature
        else:
            self._u1, self._k1 = self.sharp_center, self.sharp_curvature
            self._u2, self._k2 = self.flat_center, self.flat_curvature
        half = 0.5 * (self._u2 - self._u1)
        self._half = half
        self._mid = self._u1 + half
        if barrier is None:
            barrier = (self.flat_curvature + self.sharp_curvature) * half**2 / 8.0
        floor = self.sharp_curvature * half**2 / 12.0
        if not barrier > floor:
            raise ConfigError(
                f"barrier must exceed sharp_curvature * half_gap^2 / 12 = {floor:g} "
                f"to keep the profile a clean double well, got {barrier}"
            )
        self.barrier = float(barrier)
        self._a1, self._b1 = _quartic_flank(self._k1, half, self.barrier)
        self._a2, self._b2 = _quartic_flank(self._k2, half, self.barrier)

    def _well_1d(self, u: float) -> tuple[float, float]:
        """Value and derivative of the double-well profile at u."""
        if u < self._u1:
            duu = u - self._u1
            return self.depth + 0.5 * self._k1 * duu * duu, self._k1 * duu
        if u > self._u2:
            duu = u - self._u2
            return self.depth + 0.5 * self._k2 * duu * duu, self._k2 * duu
        if u <= self._mid:
            # left flank, local coordinate increasing toward the apex
            v, k, a, b = u - self._u1, self._k1, self._a1, self._b1
            sign = 1.0
        else:
            # right flank, mirrored so the same quartic applies
            v, k, a, b = self._u2 - u, self._k2, self._a2, self._b2
            sign = -1.0
        value = self.depth + v * v * (0.5 * k + v * (a + b * v))
        deriv = sign * v * (k + v * (3.0 * a + 4.0 * b * v))
        return value, deriv

    def value_and_grad(self, theta, batch=None):
        theta = self._check_theta(theta)
        value, d0 = self._well_1d(float(theta[0]))
        grad = np.empty_like(theta)
        grad[0] = d0
        if self.param_dim > 1:
            tail = theta[1:]
            value += 0.5 * self.tail_curvature * float(tail @ tail)
            grad[1:] = self.tail_curvature * tail
        return value, grad

    def init_params(self, rng: RngStream) -> np.ndarray:
        """Uniform over a box straddling both basins."""
        half = 0.5 * abs(self._u2 - self._u1)
        theta = rng.standard_normal(self.param_dim) * 0.1
        theta[0] = rng.uniform(self._u1 - half, self._u2 + half)
        return theta


# ---------------------------------------------------------------------------
# Synthetic datasets


@dataclass
class Dataset:
    """Feature matrix with integer class labels plus its descriptor."""

    inputs: np.ndarray
    labels: np.ndarray
    generator: str = "csv"
    noise: float = 0.0
    seed: int = 0

    @property
    def size(self) -> int:
        return self.inputs.shape[0]

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.size else 0


def _dataset_generator(seed: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_DATASET_SPAWN_KEY,))
    return np.random.Generator(np.random.PCG64(ss))


def _split_sizes(size: int) -> tuple[int, int]:
    return (size + 1) // 2, size // 2


def make_dataset(generator: str, size: int, noise: float = 0.0, seed: int = 0) -> Dataset:
    """Generate a 2-class, 2-D dataset deterministically from its descriptor.

    generators:
      blobs     two Gaussian clusters centered at (-2, 0) and (2, 0),
                spread ``noise`` (points sit exactly on the centers at 0)
      two_moons class 0 on the upper unit half-circle at the origin,
                class 1 on the lower unit half-circle centered (1, 0.5),
                arc positions evenly spaced, Gaussian jitter ``noise``
      spiral    two interleaved arms, radius 0.25..2 over a 3*pi sweep,
                arms offset by pi, Gaussian jitter ``noise``
    """
    if size <= 0:
        raise ConfigError(f"dataset size must be positive, got {size}")
    if noise < 0:
        raise ConfigError(f"noise must be nonnegative, got {noise}")
    rng = _dataset_generator(seed)
    n0, n1 = _split_sizes(size)

    if generator == "blobs":
        centers = np.array([[-2.0, 0.0], [2.0, 0.0]])
        points = [centers[k] + noise * rng.standard_normal((n, 2)) for k, n in ((0, n0), (1, n1))]
    elif generator == "two_moons":
        t0 = np.linspace(0.0, math.pi, n0)
        t1 = np.linspace(0.0, math.pi, n1)
        outer = np.column_stack([np.cos(t0), np.sin(t0)])
        inner = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
        points = [
            outer + noise * rng.standard_normal((n0, 2)),
            inner + noise * rng.standard_normal((n1, 2)),
        ]
    elif generator == "spiral":
        points = []
        for k, n in ((0, n0), (1, n1)):
            t = np.linspace(0.0, 1.0, n)
            radius = 0.25 + 1.75 * t
            angle = 3.0 * math.pi * t + math.pi * k
            arm = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
            points.append(arm + noise * rng.standard_normal((n, 2)))
    else:
        raise ConfigError(f"unknown dataset generator {generator!r}")

    inputs = np.vstack(points).astype(np.float64)
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    return Dataset(inputs=inputs, labels=labels, generator=generator, noise=float(noise), seed=int(seed))


def dataset_to_csv(dataset: Dataset, path) -> None:
    """Write features-then-label rows; floats as shortest round-trip decimals."""
    dim = dataset.inputs.shape[1]
    header = ",".join([f"x{i}" for i in range(dim)] + ["label"])
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row, label in zip(dataset.inputs, dataset.labels):
            cells = [repr(float(v)) for v in row]
            cells.append(str(int(label)))
            fh.write(",".join(cells) + "\n")


def dataset_from_csv(path) -> Dataset:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if not header or header[-1] != "label":
            raise ConfigError(f"{path}: expected feature columns then a label column")
        dim = len(header) - 1
        inputs, labels = [], []
        for line in fh:
            cells = line.strip().split(",")
            if len(cells) != dim + 1:
                raise ConfigError(f"{path}: row width {len(cells)} != header width {dim + 1}")
            inputs.append([float(v) for v in cells[:dim]])
            labels.append(int(cells[dim]))
    return Dataset(
        inputs=np.asarray(inputs, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
    )


class MinibatchSampler:
    """Epoch-shuffled minibatch index stream.

    Draws a fresh permutation of the dataset from the batch RNG stream
    whenever the previous epoch is exhausted; batches may straddle an
    epoch boundary so that T batches of size B cover every index either
    floor(TB/N) or ceil(TB/N) times.
    """

    def __init__(self, dataset_size: int, rng: RngStream, batch_size: int):
        if not 1 <= batch_size <= dataset_size:
            raise ValueError(
                f"batch_size must lie in [1, {dataset_size}], got {batch_size}"
            )
        self.dataset_size = dataset_size
        self.batch_size = batch_size
        self._rng = rng
        self._perm = np.empty(0, dtype=np.int64)
        self._cursor = 0

    def next_batch(self) -> np.ndarray:
        out = np.empty(self.batch_size, dtype=np.int64)
        filled = 0
        while filled < self.batch_size:
            if self._cursor >= self._perm.size:
                self._perm = self._rng.permutation(self.dataset_size)
                self._cursor = 0
            take = min(self.batch_size - filled, self._perm.size - self._cursor)
            out[filled : filled + take] = self._perm[self._cursor : self._cursor + take]
            self._cursor += take
            filled += take
        return out


# ---------------------------------------------------------------------------
# Multilayer perceptron with hand-derived backpropagation


def _tanh(z):
    return np.tanh(z)


def _tanh_deriv(a):
    return 1.0 - a * a


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_deriv(a):
    return (a > 0.0).astype(np.float64)


_ACTIVATIONS = {"tanh": (_tanh, _tanh_deriv), "relu": (_relu, _relu_deriv)}


class MlpObjective(Objective):
    """Fully connected network with softmax cross-entropy loss.

    Parameters live in one flat vector, ordered layer by layer as the
    weight matrix (row-major) followed by the bias. The gradient is
    computed by explicit backpropagation; activation derivatives are
    expressed in terms of the activations so the same caches serve both
    passes.
    """

    def __init__(self, layer_sizes, dataset: Dataset, activation: str = "tanh"):
        layer_sizes = [int(n) for n in layer_sizes]
        if len(layer_sizes) < 2 or any(n <= 0 for n in layer_sizes):
            raise ConfigError(f"bad layer sizes {layer_sizes}")
        if activation not in _ACTIVATIONS:
            raise ConfigError(f"unknown activation {activation!r}")
        if layer_sizes[0] != dataset.inputs.shape[1]:
            raise DimensionError(
                f"input layer {layer_sizes[0]} != feature dim {dataset.inputs.shape[1]}"
            )
        if layer_sizes[-1] < dataset.num_classes:
            raise DimensionError(
                f"output layer {layer_sizes[-1]} < {dataset.num_classes} classes"
            )
        self.layer_sizes = layer_sizes
        self.activation = activation
        self.dataset = dataset
        self.num_samples = dataset.size
        self.param_dim = sum(
            n_in * n_out + n_out for n_in, n_out in zip(layer_sizes, layer_sizes[1:])
        )

    def _unpack(self, theta: np.ndarray):
        layers = []
        offset = 0
        for n_in, n_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            w = theta[offset : offset + n_in * n_out].reshape(n_in, n_out)
            offset += n_in * n_out
            b = theta[offset : offset + n_out]
            offset += n_out
            layers.append((w, b))
        return layers

    def _resolve_batch(self, batch):
        if batch is None:
            return self.dataset.inputs, self.dataset.labels
        batch = np.asarray(batch, dtype=np.int64)
        if batch.size == 0 or batch.min() < 0 or batch.max() >= self.dataset.size:
            raise ValueError("batch indices out of range")
        return self.dataset.inputs[batch], self.dataset.labels[batch]

    def forward(self, theta: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        """Logits for a feature matrix; no caches kept."""
        theta = self._check_theta(theta)
        act, _ = _ACTIVATIONS[self.activation]
        a = np.asarray(inputs, dtype=np.float64)
        layers = self._unpack(theta)
        for w, b in layers[:-1]:
            a = act(a @ w + b)
        w, b = layers[-1]
        return a @ w + b

    def predict(self, theta: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward(theta, inputs), axis=1)

    def value_and_grad(self, theta, batch=None):
        theta = self._check_theta(theta)
        x, y = self._resolve_batch(batch)
        act, act_deriv = _ACTIVATIONS[self.activation]
        layers = self._unpack(theta)

        activations = [x]
        a = x
        for w, b in layers[:-1]:
            a = act(a @ w + b)
            activations.append(a)
        w, b = layers[-1]
        logits = a @ w + b

        # Stable log-softmax cross-entropy.
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        log_probs = shifted - log_z
        n = x.shape[0]
        loss = -float(log_probs[np.arange(n), y].mean())

        grad = np.empty_like(theta)
        grad_layers = self._unpack(grad)
        delta = np.exp(log_probs)
        delta[np.arange(n), y] -= 1.0
        delta /= n
        for idx in range(len(layers) - 1, -1, -1):
            w, _ = layers[idx]
            gw, gb = grad_layers[idx]
            gw[...] = activations[idx].T @ delta
            gb[...] = delta.sum(axis=0)
            if idx > 0:
                delta = (delta @ w.T) * act_deriv(activations[idx])
        return loss, grad

    def init_params(self, rng: RngStream) -> np.ndarray:
        """Fan-in scaled normal weights, zero biases."""
        theta = np.empty(self.param_dim)
        offset = 0
        for n_in, n_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            w = rng.standard_normal((n_in, n_out)) / math.sqrt(n_in)
            theta[offset : offset + n_in * n_out] = w.ravel()
            offset += n_in * n_out
            theta[offset : offset + n_out] = 0.0
            offset += n_out
        return theta


class WeightDecayObjective(Objective):
    """Adds an L2 penalty 1/2 * strength * ||theta||^2 to a base objective.

    The penalty contributes to both the loss and the gradient, so it
    participates in every propagation of a two-propagation step.
    """

    def __init__(self, base: Objective, strength: float):
        if strength < 0:
            raise ConfigError(f"weight decay must be nonnegative, got {strength}")
        self.base = base
        self.strength = float(strength)
        self.param_dim = base.param_dim
        self.num_samples = base.num_samples

    def value_and_grad(self, theta, batch=None):
        loss, grad = self.base.value_and_grad(theta, batch)
        theta = np.asarray(theta, dtype=np.float64)
        return loss + 0.5 * self.strength * float(theta @ theta), grad + self.strength * theta

    def init_params(self, rng: RngStream) -> np.ndarray:
        return self.base.init_params(rng)

    def predict(self, theta, inputs):
        return self.base.predict(theta, inputs)

    def forward(self, theta, inputs):
        return self.base.forward(theta, inputs)
