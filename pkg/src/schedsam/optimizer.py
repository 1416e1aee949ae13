"""One-propagation and two-propagation update steps plus the scheduled driver.

The driver runs T update steps. At each step it draws from the trial
stream with probability p(t) given by the schedule: outcome 0 applies a
plain gradient step (one propagation), outcome 1 applies the
ascent-then-descent step (two propagations on the same batch). The trace
records the outcome and cost of every step, so the empirical average
propagation count is reconstructed exactly, never estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, EvaluationError
from .numeric import RngStream, bernoulli, l2_norm
from .objective import MinibatchSampler, Objective
from .scheduler import Schedule, expected_eta_exact


@dataclass(frozen=True)
class LrSchedule:
    """Learning-rate profile over a run: constant or half-cosine decay."""

    kind: str
    base: float

    def __post_init__(self):
        if self.kind not in ("constant", "cosine"):
            raise ConfigError(f"lr schedule kind must be constant or cosine, got {self.kind!r}")
        if not self.base > 0:
            raise ConfigError(f"learning rate must be positive, got {self.base}")


def lr_at(lr_schedule: LrSchedule, t: int, total_steps: int) -> float:
    """Learning rate at step t; cosine decays from base toward 0, no restarts."""
    if not 0 <= t < total_steps:
        raise ValueError(f"step index {t} outside [0, {total_steps})")
    if lr_schedule.kind == "constant":
        return lr_schedule.base
    return lr_schedule.base * 0.5 * (1.0 + math.cos(t * math.pi / total_steps))


@dataclass(frozen=True)
class OptimizerConfig:
    """Run hyperparameters.

    batch_size of None means full-batch evaluation (the only mode for
    analytic landscapes without samples).
    """

    rho: float
    lr_schedule: LrSchedule
    total_steps: int
    seed: int
    batch_size: int | None = None
    grad_norm_floor: float = 1e-12

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if self.total_steps < 1:
            raise ConfigError(f"total_steps must be at least 1, got {self.total_steps}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.grad_norm_floor < 0:
            raise ConfigError("grad_norm_floor must be nonnegative")


@dataclass(slots=True)
class StepRecord:
    """One step of the trace: trial outcome and cost, loss and gradient
    norm at the pre-update point."""

    t: int
    x_t: int
    eta_t: int
    loss: float
    grad_norm: float


@dataclass
class RunReport:
    """Everything a single run produced."""

    final_theta: np.ndarray
    trace: list[StepRecord]
    empirical_eta: float
    expected_eta: float
    seed: int
    schedule: str


def compute_epsilon(grad: np.ndarray, rho: float, floor: float = 1e-12) -> np.ndarray:
    """Ascent offset of radius rho along the gradient direction.

    The norm-rho rescaling of the gradient is the exact maximizer of the
    first-order expansion of the loss over the rho-ball. Gradients with
    norm at or below ``floor`` give a zero offset, degrading the step to
    a plain gradient step instead of dividing by ~0.
    """
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    grad = np.asarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise EvaluationError("non-finite gradient in ascent-offset computation")
    norm = l2_norm(grad)
    if norm <= floor:
        return np.zeros_like(grad)
    return (rho / norm) * grad


def _checked_eval(obj: Objective, theta: np.ndarray, batch, t: int, what: str):
    loss, grad = obj.value_and_grad(theta, batch)
    if not (math.isfinite(loss) and np.isfinite(grad).all()):
        raise DivergenceError(f"non-finite {what} at step {t}", step=t)
    return loss, grad


def sgd_step(obj: Objective, theta: np.ndarray, batch, lr: float, t: int = 0):
    """One plain gradient step; exactly one propagation."""
    if not lr > 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    loss, grad = _checked_eval(obj, theta, batch, t, "loss/gradient")
    new_theta = theta - lr * grad
    record = StepRecord(t=t, x_t=0, eta_t=1, loss=float(loss), grad_norm=l2_norm(grad))
    return new_theta, record


def sam_step(
    obj: Objective,
    theta: np.ndarray,
    batch,
    lr: float,
    rho: float,
    floor: float = 1e-12,
    t: int = 0,
):
    """Ascent-then-descent step; exactly two propagations, same batch.

    First propagation evaluates the gradient at theta; the second
    evaluates it at theta + epsilon, the radius-rho ascent point, and
    that second gradient drives the update.
    """
    if not lr > 0:
        raise ConfigError(f"learning rate must be positive, got {lr}")
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    loss, grad = _checked_eval(obj, theta, batch, t, "loss/gradient (first propagation)")
    gnorm = l2_norm(grad)
    # norm <= floor degrades the ascent point to theta itself
    ascent = theta if gnorm <= floor else theta + (rho / gnorm) * grad
    _, grad2 = _checked_eval(obj, ascent, batch, t, "gradient (second propagation)")
    new_theta = theta - lr * grad2
    record = StepRecord(t=t, x_t=1, eta_t=2, loss=float(loss), grad_norm=gnorm)
    return new_theta, record


def empirical_eta(trace: list[StepRecord]) -> float:
    """Average propagations per step, reconstructed exactly from the trace."""
    if not trace:
        raise ValueError("empirical_eta of an empty trace")
    return sum(r.eta_t for r in trace) / len(trace)


def ss_sam_run(
    obj: Objective,
    config: OptimizerConfig,
    schedule: Schedule,
    theta0: np.ndarray | None = None,
) -> RunReport:
    """Run T scheduled steps and return the full trace and accounting.

    Streams: trial outcomes, batch order, and parameter init each come
    from their own stream of config.seed, so changing the schedule never
    perturbs batching or initialization. theta0, when given, overrides
    the drawn initialization (the init stream is then left untouched).
    """
    total = config.total_steps
    schedule.validate(total)
    probs = schedule.probabilities(total).tolist()

    trial_rng = RngStream(config.seed, "trial")
    if theta0 is None:
        theta = obj.init_params(RngStream(config.seed, "init"))
    else:
        theta = np.array(theta0, dtype=np.float64)

    sampler = None
    if obj.num_samples is not None and config.batch_size is not None:
        sampler = MinibatchSampler(
            obj.num_samples, RngStream(config.seed, "batch"), config.batch_size
        )

    trace: list[StepRecord] = []
    floor = config.grad_norm_floor
    try:
        for t in range(total):
            x = bernoulli(trial_rng, probs[t])
            lr = lr_at(config.lr_schedule, t, total)
            batch = sampler.next_batch() if sampler is not None else None
            if x:
                theta, record = sam_step(obj, theta, batch, lr, config.rho, floor, t=t)
            else:
                theta, record = sgd_step(obj, theta, batch, lr, t=t)
            trace.append(record)
    except DivergenceError as err:
        raise DivergenceError(str(err), step=err.step, trace=trace) from None

    return RunReport(
        final_theta=theta,
        trace=trace,
        empirical_eta=empirical_eta(trace),
        expected_eta=expected_eta_exact(schedule, total),
        seed=config.seed,
        schedule=schedule.canonical(),
    )
