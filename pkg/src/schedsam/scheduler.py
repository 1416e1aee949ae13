"""Scheduling functions and expected propagation-cost accounting.

A schedule maps a step index t in [0, T) to the probability p(t) of
taking the two-propagation step instead of the one-propagation step.
The expected average propagation count over a run is

    1 + (1/T) * sum_{t=0}^{T-1} p(t)

computed here both by direct summation (``expected_eta_exact``) and by
the per-family analytic formula (``expected_eta_closed_form``). The two
agree exactly for the constant family and to O(1/T) for the others; the
documented gaps are tested, not assumed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TRIG_VARIANTS = ("cos1", "cos2", "sin1", "sin2")


def format_param(value: float) -> str:
    """Compact decimal for canonical strings: 0.5 -> '0.5', 1.0 -> '1'."""
    value = float(value)
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


class Schedule:
    """Base class: immutable probability schedule p(t) on [0, T)."""

    family: str

    def probabilities(self, total_steps: int) -> np.ndarray:
        """Vector of p(t) for t = 0 .. total_steps-1."""
        raise NotImplementedError

    def probability(self, t: int, total_steps: int) -> float:
        raise NotImplementedError

    def canonical(self) -> str:
        raise NotImplementedError

    def validate(self, total_steps: int) -> None:
        """Raise ConfigError unless p(t) is a probability for all t in [0, T)."""
        if total_steps < 1:
            raise ConfigError(f"total_steps must be positive, got {total_steps}")

    def closed_form_eta(self, total_steps: int) -> float:
        raise NotImplementedError

    def __repr__(self):
        return self.canonical()


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True, repr=False)
class ConstantSchedule(Schedule):
    """p(t) = a_c for every step."""

    a_c: float
    family = "constant"

    def __post_init__(self):
        object.__setattr__(self, "a_c", _check_unit("a_c", self.a_c))

    def probabilities(self, total_steps):
        return np.full(total_steps, self.a_c)

    def probability(self, t, total_steps):
        return self.a_c

    def canonical(self):
        return f"constant(a_c={format_param(self.a_c)})"

    def closed_form_eta(self, total_steps):
        return 1.0 + self.a_c


@dataclass(frozen=True, repr=False)
class PiecewiseSchedule(Schedule):
    """Two-stage schedule: p = a_p while t <= b_p*T, then 1 - a_p."""

    a_p: float
    b_p: float
    family = "piecewise"

    def __post_init__(self):
        object.__setattr__(self, "a_p", _check_unit("a_p", self.a_p))
        object.__setattr__(self, "b_p", _check_unit("b_p", self.b_p))

    def probabilities(self, total_steps):
        t = np.arange(total_steps)
        return np.where(t <= self.b_p * total_steps, self.a_p, 1.0 - self.a_p)

    def probability(self, t, total_steps):
        return self.a_p if t <= self.b_p * total_steps else 1.0 - self.a_p

    def canonical(self):
        return f"piecewise(a_p={format_param(self.a_p)},b_p={format_param(self.b_p)})"

    def closed_form_eta(self, total_steps):
        return 2.0 + 2.0 * self.a_p * self.b_p - self.b_p - self.a_p


@dataclass(frozen=True, repr=False)
class LinearSchedule(Schedule):
    """Linearly ramped probability.

    Two construction forms:
      mid=m        passes through (0, 0) and (T/2, m) when m <= 0.5, or
                   through (T/2, m) and (T, 1) when m >= 0.5; valid for
                   every T by construction
      a_l, b_l     direct per-step slope and intercept p(t) = a_l*t + b_l;
                   only valid for a T where the line stays inside [0, 1]
    """

    mid: float | None = None
    a_l: float | None = None
    b_l: float | None = None
    family = "linear"

    def __post_init__(self):
        direct = self.a_l is not None or self.b_l is not None
        if (self.mid is None) == (not direct):
            raise ConfigError("give either mid or (a_l, b_l), not both")
        if self.mid is not None:
            object.__setattr__(self, "mid", _check_unit("mid", self.mid))
        else:
            if self.a_l is None or self.b_l is None:
                raise ConfigError("direct form needs both a_l and b_l")
            object.__setattr__(self, "a_l", float(self.a_l))
            object.__setattr__(self, "b_l", float(self.b_l))

    def _line(self, total_steps: int) -> tuple[float, float]:
        """Resolve to (slope, intercept) for the given horizon."""
        if self.mid is None:
            return self.a_l, self.b_l
        m = self.mid
        if m <= 0.5:
            return 2.0 * m / total_steps, 0.0
        return 2.0 * (1.0 - m) / total_steps, 2.0 * m - 1.0

    def probabilities(self, total_steps):
        slope, intercept = self._line(total_steps)
        return np.clip(slope * np.arange(total_steps) + intercept, 0.0, 1.0)

    def probability(self, t, total_steps):
        slope, intercept = self._line(total_steps)
        return float(min(1.0, max(0.0, slope * t + intercept)))

    def validate(self, total_steps):
        super().validate(total_steps)
        if self.mid is not None:
            return
        tol = 1e-12
        for t in (0, total_steps - 1):
            p = self.a_l * t + self.b_l
            if not -tol <= p <= 1.0 + tol:
                raise ConfigError(
                    f"linear schedule leaves [0, 1] at t={t} (p={p}) for T={total_steps}"
                )

    def canonical(self):
        if self.mid is not None:
            return f"linear(mid={format_param(self.mid)})"
        return f"linear(a_l={format_param(self.a_l)},b_l={format_param(self.b_l)})"

    def closed_form_eta(self, total_steps):
        slope, intercept = self._line(total_steps)
        return 1.0 + slope * (total_steps / 2.0) + intercept


@dataclass(frozen=True, repr=False)
class TrigSchedule(Schedule):
    """Trigonometric schedules over one half-period.

    cos1: 1/2 + 1/2 cos(t*pi/T)   (two-propagation steps front-loaded)
    cos2: 1/2 - 1/2 cos(t*pi/T)   (back-loaded)
    sin1: sin(t*pi/T)             (peaked mid-run)
    sin2: 1 - sin(t*pi/T)         (dipped mid-run)
    """

    variant: str
    family = "trig"

    def __post_init__(self):
        if self.variant not in TRIG_VARIANTS:
            raise ConfigError(
                f"trig variant must be one of {TRIG_VARIANTS}, got {self.variant!r}"
            )

    def probabilities(self, total_steps):
        phase = np.arange(total_steps) * (math.pi / total_steps)
        if self.variant == "cos1":
            return 0.5 + 0.5 * np.cos(phase)
        if self.variant == "cos2":
            return 0.5 - 0.5 * np.cos(phase)
        if self.variant == "sin1":
            return np.sin(phase)
        return 1.0 - np.sin(phase)

    def probability(self, t, total_steps):
        phase = t * math.pi / total_steps
        if self.variant == "cos1":
            return 0.5 + 0.5 * math.cos(phase)
        if self.variant == "cos2":
            return 0.5 - 0.5 * math.cos(phase)
        if self.variant == "sin1":
            return math.sin(phase)
        return 1.0 - math.sin(phase)

    def canonical(self):
        return f"trig({self.variant})"

    def closed_form_eta(self, total_steps):
        if self.variant in ("cos1", "cos2"):
            return 1.5
        # sum_{t=0}^{T-1} sin(t*pi/T) = cot(pi/(2T)), by telescoping the
        # complex-exponential geometric series.
        cot = 1.0 / math.tan(math.pi / (2.0 * total_steps))
        if self.variant == "sin1":
            return 1.0 + cot / total_steps
        return 2.0 - cot / total_steps


@dataclass(frozen=True)
class EtaReport:
    """Expected average propagation count for one schedule and horizon."""

    schedule: str
    family: str
    total_steps: int
    exact: float
    closed_form: float


_SCHEDULE_RE = re.compile(r"^\s*([a-z0-9_]+)\s*\(\s*(.*?)\s*\)\s*$")


def parse_schedule(text: str) -> Schedule:
    """Parse a canonical schedule string.

    Forms: constant(a_c=0.6), piecewise(a_p=0,b_p=0.5), linear(mid=0.3),
    linear(a_l=1e-4,b_l=0), trig(sin1).
    """
    match = _SCHEDULE_RE.match(text)
    if not match:
        raise ConfigError(f"unparseable schedule {text!r}")
    family, body = match.group(1), match.group(2)
    if family == "trig":
        return TrigSchedule(variant=body.strip())
    kwargs: dict[str, float] = {}
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise ConfigError(f"expected key=value in schedule {text!r}")
            key, _, raw = item.partition("=")
            try:
                kwargs[key.strip()] = float(raw)
            except ValueError:
                raise ConfigError(f"bad numeric value {raw!r} in schedule {text!r}") from None
    try:
        if family == "constant":
            return ConstantSchedule(**kwargs)
        if family == "piecewise":
            return PiecewiseSchedule(**kwargs)
        if family == "linear":
            return LinearSchedule(**kwargs)
    except TypeError:
        raise ConfigError(f"wrong parameters for {family} schedule: {text!r}") from None
    raise ConfigError(f"unknown schedule family {family!r}")


def _check_step(t: int, total_steps: int) -> None:
    if not 0 <= t < total_steps:
        raise ValueError(f"step index {t} outside [0, {total_steps})")


def eval_schedule(schedule: Schedule, t: int, total_steps: int) -> float:
    """Probability of the two-propagation branch at step t."""
    _check_step(t, total_steps)
    p = schedule.probability(t, total_steps)
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"{schedule.canonical()} gave p={p} at t={t}")
    return p


def eta_of_step(schedule: Schedule, t: int, total_steps: int) -> float:
    """Expected propagation count of step t: 1 + p(t)."""
    _check_step(t, total_steps)
    return 1.0 + schedule.probability(t, total_steps)


def expected_eta_exact(schedule: Schedule, total_steps: int) -> float:
    """1 + mean of p(t) over t = 0 .. T-1, by direct summation."""
    schedule.validate(total_steps)
    return 1.0 + float(np.mean(schedule.probabilities(total_steps)))


def expected_eta_closed_form(schedule: Schedule, total_steps: int) -> float:
    """Analytic per-family value of the same average."""
    schedule.validate(total_steps)
    return float(schedule.closed_form_eta(total_steps))


def eta_report(schedule: Schedule, total_steps: int) -> EtaReport:
    return EtaReport(
        schedule=schedule.canonical(),
        family=schedule.family,
        total_steps=int(total_steps),
        exact=expected_eta_exact(schedule, total_steps),
        closed_form=expected_eta_closed_form(schedule, total_steps),
    )
