"""Vector arithmetic, split-stream RNG, and finite-difference utilities.

Parameter vectors are plain 1-D float64 numpy arrays throughout the
package. Randomness is organized as named streams derived from a single
64-bit seed, so that the Bernoulli trials, batch sampling, parameter
initialization, and landscape probing never share a draw sequence. This
is what makes degenerate runs (trial probability identically 0) land on
bit-identical trajectories with a plain SGD loop using the same seed.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DimensionError, EvaluationError

# Fixed registry of stream labels; the index doubles as the spawn key so
# that every (seed, stream) pair maps to one platform-independent sequence.
STREAM_IDS = ("trial", "batch", "init", "landscape")
_STREAM_INDEX = {name: i for i, name in enumerate(STREAM_IDS)}


class RngStream:
    """One named, deterministic random stream split off a base seed.

    Two instances built from the same ``(seed, stream_id)`` replay the
    same sequence on every platform; distinct stream ids from one seed
    are statistically independent. A stream is single-owner: do not share
    one instance between concurrent tasks.
    """

    def __init__(self, seed: int, stream_id: str):
        if stream_id not in _STREAM_INDEX:
            raise ValueError(
                f"unknown stream_id {stream_id!r}; expected one of {STREAM_IDS}"
            )
        self.seed = int(seed)
        self.stream_id = stream_id
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(_STREAM_INDEX[stream_id],)
        )
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id!r})"

    def random(self) -> float:
        """One uniform draw from [0, 1)."""
        return float(self._gen.random())

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size=size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def bernoulli(rng: RngStream, p: float) -> int:
    """Bernoulli trial: 1 with probability ``p``, else 0.

    Always consumes exactly one uniform draw, including for p=0 and p=1,
    so trajectories driven by different schedules but the same seed stay
    aligned draw-for-draw.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    u = rng.random()
    return 1 if u < p else 0


def axpy(a: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``a * x + y`` as a new vector."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.shape} vs {y.shape}")
    return a * x + y


def l2_norm(x: np.ndarray) -> float:
    """Euclidean norm of a nonempty vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise DimensionError("l2_norm of an empty vector")
    return float(np.linalg.norm(x))


def central_diff_grad(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central finite-difference gradient of a scalar function.

    Component i is (f(x + h e_i) - f(x - h e_i)) / (2 h). Used as the
    independent oracle against which analytic gradients are checked.
    """
    if h <= 0:
        raise ValueError(f"step size h must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    probe = x.copy()
    for i in range(x.size):
        probe[i] = x[i] + h
        f_plus = f(probe)
        probe[i] = x[i] - h
        f_minus = f(probe)
        probe[i] = x[i]
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise EvaluationError(f"non-finite value at finite-difference probe {i}")
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad
