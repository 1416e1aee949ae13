"""Experiment harness: configs, multi-seed runs, aggregation, eta tables.

Config files are flat INI text with four sections (experiment,
objective, optimizer, schedule). A run executes one trajectory per seed,
writes per-seed JSON reports, per-step CSV traces, and schedule plot
data, then an aggregate JSON with mean and sample standard deviation
across seeds. All output is deterministic down to the byte for a given
config: floats are serialized as their shortest round-trip decimals, key
order is sorted, and nothing time- or host-dependent is recorded.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigError, DimensionError, DivergenceError
from .objective import (
    Dataset,
    MlpObjective,
    Objective,
    QuadraticObjective,
    TwoWellLandscape,
    WeightDecayObjective,
    make_dataset,
)
from .optimizer import LrSchedule, OptimizerConfig, RunReport, StepRecord, ss_sam_run
from .scheduler import Schedule, eval_schedule, expected_eta_closed_form, expected_eta_exact, parse_schedule

SCHEMA_VERSION = 1
ERRATUM_TOLERANCE = 0.01


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(value))


# ---------------------------------------------------------------------------
# Config parsing


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description."""

    name: str
    seeds: list[int]
    output_dir: str
    objective: dict
    schedule: Schedule
    rho: float
    lr: float
    lr_kind: str
    total_steps: int
    batch_size: int | None
    weight_decay: float
    grad_norm_floor: float

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        return OptimizerConfig(
            rho=self.rho,
            lr_schedule=LrSchedule(kind=self.lr_kind, base=self.lr),
            total_steps=self.total_steps,
            seed=seed,
            batch_size=self.batch_size,
            grad_norm_floor=self.grad_norm_floor,
        )

    def echo(self) -> dict:
        """JSON-safe resolved copy, embedded in every report."""
        return {
            "experiment": {
                "name": self.name,
                "seeds": list(self.seeds),
                "output_dir": self.output_dir,
            },
            "objective": dict(self.objective),
            "optimizer": {
                "rho": self.rho,
                "lr": self.lr,
                "lr_schedule": self.lr_kind,
                "total_steps": self.total_steps,
                "batch_size": self.batch_size,
                "weight_decay": self.weight_decay,
                "grad_norm_floor": self.grad_norm_floor,
            },
            "schedule": self.schedule.canonical(),
        }


class _Section:
    """One config section with typed, checked key access."""

    def __init__(self, name: str, items: dict[str, str]):
        self.name = name
        self._items = dict(items)
        self._seen: set[str] = set()

    def _raw(self, key, default):
        self._seen.add(key)
        if key in self._items:
            return self._items[key]
        if default is _REQUIRED:
            raise ConfigError(f"missing required key {self.name}.{key}")
        return default

    def get_str(self, key, default=None):
        value = self._raw(key, default)
        return value if value is None else str(value)

    def get_int(self, key, default=None):
        value = self._raw(key, default)
        if value is None or isinstance(value, int):
            return value
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be an integer, got {value!r}") from None

    def get_float(self, key, default=None):
        value = self._raw(key, default)
        if value is None or isinstance(value, float):
            return value
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be a number, got {value!r}") from None

    def get_int_list(self, key, default=None):
        value = self._raw(key, default)
        if value is None or isinstance(value, list):
            return value
        try:
            return [int(item) for item in str(value).split(",") if item.strip()]
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be comma-separated integers") from None

    def get_float_list(self, key, default=None):
        value = self._raw(key, default)
        if value is None or isinstance(value, list):
            return value
        try:
            return [float(item) for item in str(value).split(",") if item.strip()]
        except ValueError:
            raise ConfigError(f"{self.name}.{key} must be comma-separated numbers") from None

    def reject_unknown(self):
        unknown = set(self._items) - self._seen
        if unknown:
            raise ConfigError(
                f"unknown key(s) in [{self.name}]: {', '.join(sorted(unknown))}"
            )


_REQUIRED = object()


def _objective_spec(section: _Section) -> dict:
    kind = section.get_str("kind", _REQUIRED)
    if kind == "quadratic":
        spec = {
            "kind": kind,
            "curvatures": section.get_float_list("curvatures", _REQUIRED),
            "center": section.get_float_list("center", None),
        }
    elif kind == "two_well":
        spec = {
            "kind": kind,
            "flat_center": section.get_float("flat_center", -1.0),
            "sharp_center": section.get_float("sharp_center", 1.0),
            "flat_curvature": section.get_float("flat_curvature", 1.0),
            "sharp_curvature": section.get_float("sharp_curvature", 25.0),
            "depth": section.get_float("depth", 0.0),
            "dim": section.get_int("dim", 1),
            "barrier": section.get_float("barrier", None),
            "tail_curvature": section.get_float("tail_curvature", None),
        }
    elif kind == "dataset":
        size = section.get_int("size", _REQUIRED)
        spec = {
            "kind": kind,
            "generator": section.get_str("generator", _REQUIRED),
            "size": size,
            "noise": section.get_float("noise", 0.0),
            "data_seed": section.get_int("data_seed", 0),
            "eval_size": section.get_int("eval_size", size),
            "layers": section.get_int_list("layers", _REQUIRED),
            "activation": section.get_str("activation", "tanh"),
        }
    else:
        raise ConfigError(f"objective.kind must be quadratic, two_well or dataset, got {kind!r}")
    section.reject_unknown()
    return spec


def build_objective(spec: dict) -> tuple[Objective, Dataset | None]:
    """Instantiate the objective described by a spec dict.

    Returns the objective and, for dataset objectives, the held-out
    evaluation dataset (generated from data_seed + 1 so it never overlaps
    the training draw).
    """
    kind = spec.get("kind")
    if kind == "quadratic":
        return QuadraticObjective(np.asarray(spec["curvatures"]), center=spec.get("center")), None
    if kind == "two_well":
        kwargs = {k: v for k, v in spec.items() if k != "kind" and v is not None}
        return TwoWellLandscape(**kwargs), None
    if kind == "dataset":
        train = make_dataset(spec["generator"], spec["size"], spec["noise"], spec["data_seed"])
        held_out = make_dataset(
            spec["generator"], spec["eval_size"], spec["noise"], spec["data_seed"] + 1
        )
        obj = MlpObjective(spec["layers"], train, activation=spec["activation"])
        return obj, held_out
    raise ConfigError(f"unknown objective kind {kind!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse the INI experiment format; every error is a ConfigError."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"config syntax error: {err}") from None

    required = {"experiment", "objective", "optimizer", "schedule"}
    missing = required - set(parser.sections())
    if missing:
        raise ConfigError(f"missing config section(s): {', '.join(sorted(missing))}")
    extra = set(parser.sections()) - required
    if extra:
        raise ConfigError(f"unknown config section(s): {', '.join(sorted(extra))}")

    sections = {name: _Section(name, dict(parser.items(name))) for name in required}

    exp = sections["experiment"]
    name = exp.get_str("name", "experiment")
    seeds = exp.get_int_list("seeds", _REQUIRED)
    if not seeds:
        raise ConfigError("experiment.seeds must list at least one seed")
    output_dir = exp.get_str("output_dir", "out")
    exp.reject_unknown()

    objective = _objective_spec(sections["objective"])

    opt = sections["optimizer"]
    rho = opt.get_float("rho", 0.05)
    lr = opt.get_float("lr", _REQUIRED)
    lr_kind = opt.get_str("lr_schedule", "constant")
    total_steps = opt.get_int("total_steps", None)
    epochs = opt.get_int("epochs", None)
    batch_size = opt.get_int("batch_size", None)
    weight_decay = opt.get_float("weight_decay", 0.0)
    grad_norm_floor = opt.get_float("grad_norm_floor", 1e-12)
    opt.reject_unknown()

    if (total_steps is None) == (epochs is None):
        raise ConfigError("optimizer needs exactly one of total_steps or epochs")
    if epochs is not None:
        if objective["kind"] != "dataset":
            raise ConfigError("epochs requires a dataset objective (steps are per epoch)")
        if batch_size is None:
            raise ConfigError("epochs requires batch_size to derive the step count")
        if epochs < 1:
            raise ConfigError(f"epochs must be positive, got {epochs}")
        total_steps = epochs * math.ceil(objective["size"] / batch_size)
    if batch_size is not None and objective["kind"] != "dataset":
        raise ConfigError("batch_size only applies to dataset objectives")
    if weight_decay < 0:
        raise ConfigError(f"weight_decay must be nonnegative, got {weight_decay}")

    sched_section = sections["schedule"]
    schedule_text = sched_section.get_str("p", _REQUIRED)
    sched_section.reject_unknown()
    schedule = parse_schedule(schedule_text)
    schedule.validate(total_steps)

    config = ExperimentConfig(
        name=name,
        seeds=seeds,
        output_dir=output_dir,
        objective=objective,
        schedule=schedule,
        rho=rho,
        lr=lr,
        lr_kind=lr_kind,
        total_steps=total_steps,
        batch_size=batch_size,
        weight_decay=weight_decay,
        grad_norm_floor=grad_norm_floor,
    )
    # Surface invalid optimizer parameters (rho, lr, ...) at parse time.
    config.optimizer_config(seeds[0])
    return config


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text)


# ---------------------------------------------------------------------------
# Published-value registry and eta tables


def load_published_eta(path=None) -> dict[str, float]:
    """Registry of published eta-hat values keyed by canonical schedule.

    The shipped file transcribes the source tables verbatim, including
    the rows that disagree with the analytic formula, so that erratum
    detection is a computation over data rather than hard-coded cases.
    """
    if path is None:
        text = resources.files(__package__).joinpath("data/published_eta.csv").read_text()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    table: dict[str, float] = {}
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or rows[0] != ["schedule", "steps", "eta"]:
        raise ConfigError("published-eta file must start with a schedule,steps,eta header")
    for cells in rows[1:]:
        if len(cells) != 3:
            raise ConfigError(f"bad registry row: {cells!r}")
        table[cells[0]] = float(cells[2])
    return table


@dataclass(frozen=True)
class EtaTableRow:
    schedule: str
    exact: float
    closed_form: float
    published: float | None
    erratum: bool


def eta_table(
    schedules: list[Schedule], total_steps: int, published: dict[str, float] | None = None
) -> list[EtaTableRow]:
    """Expected-cost table with published values and erratum flags.

    A row is flagged as an erratum when a published value exists and
    differs from the direct summation by more than 0.01 (published
    values carry two decimals).
    """
    if published is None:
        published = load_published_eta()
    rows = []
    for schedule in schedules:
        exact = expected_eta_exact(schedule, total_steps)
        closed = expected_eta_closed_form(schedule, total_steps)
        pub = published.get(schedule.canonical())
        erratum = pub is not None and abs(exact - pub) > ERRATUM_TOLERANCE
        rows.append(
            EtaTableRow(
                schedule=schedule.canonical(),
                exact=exact,
                closed_form=closed,
                published=pub,
                erratum=erratum,
            )
        )
    return rows


def load_schedule_list(path) -> list[Schedule]:
    """Read one canonical schedule string per line; # starts a comment."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read schedule list {path}: {err}") from None
    schedules = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            schedules.append(parse_schedule(line))
    if not schedules:
        raise ConfigError(f"no schedules found in {path}")
    return schedules


# ---------------------------------------------------------------------------
# Evaluation and file emission


def evaluate(obj: Objective, theta: np.ndarray, eval_dataset: Dataset) -> float:
    """Misclassification rate of a classifier objective on held-out data."""
    predict = getattr(obj, "predict", None)
    if predict is None:
        raise ConfigError("objective has no classifier interface to evaluate")
    try:
        predictions = predict(theta, eval_dataset.inputs)
    except ValueError as err:
        raise DimensionError(str(err)) from None
    return float(np.mean(predictions != eval_dataset.labels))


def write_trace_csv(trace: list[StepRecord], path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,x_t,eta_t,loss,grad_norm\n")
        for r in trace:
            fh.write(f"{r.t},{r.x_t},{r.eta_t},{_fmt(r.loss)},{_fmt(r.grad_norm)}\n")


def read_trace_csv(path) -> list[StepRecord]:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "t,x_t,eta_t,loss,grad_norm":
            raise ConfigError(f"{path}: unexpected trace header {header!r}")
        trace = []
        for line in fh:
            t, x_t, eta_t, loss, grad_norm = line.strip().split(",")
            trace.append(
                StepRecord(
                    t=int(t),
                    x_t=int(x_t),
                    eta_t=int(eta_t),
                    loss=float(loss),
                    grad_norm=float(grad_norm),
                )
            )
    return trace


def emit_schedule_plot(schedule: Schedule, trace: list[StepRecord], path, total_steps=None) -> None:
    """Plot data pairing the probability line with the trial outcomes.

    Columns (t, p_t, x_t), one row per trace step, ready for any
    external plotting tool.
    """
    if not trace:
        raise ValueError("cannot emit schedule plot for an empty trace")
    if total_steps is None:
        total_steps = len(trace)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t,p_t,x_t\n")
        for r in trace:
            p = eval_schedule(schedule, r.t, total_steps)
            fh.write(f"{r.t},{_fmt(p)},{r.x_t}\n")


def _write_json(payload: dict, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2))
        fh.write("\n")


def read_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read report {path}: {err}") from None


# ---------------------------------------------------------------------------
# Experiment driver


@dataclass
class SeedResult:
    """Outcome of one seed: metrics on success, the error on failure."""

    seed: int
    failed: bool
    error: str | None
    steps_completed: int
    empirical_eta: float | None
    final_train_loss: float | None
    eval_error: float | None

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "failed": self.failed,
            "error": self.error,
            "steps_completed": self.steps_completed,
            "empirical_eta": self.empirical_eta,
            "final_train_loss": self.final_train_loss,
            "eval_error": self.eval_error,
        }


@dataclass
class AggregateReport:
    """Cross-seed summary plus the per-seed reports that produced it."""

    name: str
    schedule: str
    total_steps: int
    expected_eta: float
    published_eta: float | None
    erratum: bool
    results: list[SeedResult]
    mean: dict | None
    std: dict | None
    config: dict
    runs: dict[int, RunReport] = field(default_factory=dict)

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.results]

    @property
    def failed_seeds(self) -> list[int]:
        return [r.seed for r in self.results if r.failed]

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "aggregate",
            "name": self.name,
            "config": self.config,
            "schedule": self.schedule,
            "total_steps": self.total_steps,
            "expected_eta": self.expected_eta,
            "published_eta": self.published_eta,
            "erratum": self.erratum,
            "seeds": self.seeds,
            "failed_seeds": self.failed_seeds,
            "per_seed": [r.to_json_dict() for r in self.results],
            "mean": self.mean,
            "std": self.std,
        }


def _mean_std(values: list[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1 denominator; 0 for n=1)."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def run_experiment(config: ExperimentConfig) -> AggregateReport:
    """Execute one run per seed and write all report files.

    A diverging seed is recorded as failed (with its partial trace on
    disk) and the remaining seeds still run; the caller decides how to
    signal that. Output is byte-identical across repeated invocations.
    """
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    obj, eval_dataset = build_objective(config.objective)
    if config.weight_decay > 0:
        obj = WeightDecayObjective(obj, config.weight_decay)

    echo = config.echo()
    results: list[SeedResult] = []
    runs: dict[int, RunReport] = {}
    for seed in config.seeds:
        base = f"seed_{seed}"
        trace_name = f"{base}_trace.csv"
        plot_name = f"{base}_schedule.csv"
        payload = {
            "schema": SCHEMA_VERSION,
            "kind": "run",
            "name": config.name,
            "seed": seed,
            "schedule": config.schedule.canonical(),
            "total_steps": config.total_steps,
            "config": echo,
            "trace_file": trace_name,
            "schedule_plot_file": plot_name,
        }
        try:
            report = ss_sam_run(obj, config.optimizer_config(seed), config.schedule)
        except DivergenceError as err:
            result = SeedResult(
                seed=seed,
                failed=True,
                error=str(err),
                steps_completed=len(err.trace),
                empirical_eta=None,
                final_train_loss=None,
                eval_error=None,
            )
            write_trace_csv(err.trace, os.path.join(out, trace_name))
            if err.trace:
                emit_schedule_plot(
                    config.schedule, err.trace, os.path.join(out, plot_name), config.total_steps
                )
            payload.update(
                failed=True,
                error=str(err),
                steps_completed=len(err.trace),
                empirical_eta=None,
                expected_eta=expected_eta_exact(config.schedule, config.total_steps),
                final_train_loss=None,
                eval_error=None,
                final_theta=None,
            )
        else:
            final_train_loss = float(obj.value(report.final_theta))
            eval_error = (
                evaluate(obj, report.final_theta, eval_dataset)
                if eval_dataset is not None
                else None
            )
            result = SeedResult(
                seed=seed,
                failed=False,
                error=None,
                steps_completed=len(report.trace),
                empirical_eta=report.empirical_eta,
                final_train_loss=final_train_loss,
                eval_error=eval_error,
            )
            runs[seed] = report
            write_trace_csv(report.trace, os.path.join(out, trace_name))
            emit_schedule_plot(
                config.schedule, report.trace, os.path.join(out, plot_name), config.total_steps
            )
            payload.update(
                failed=False,
                error=None,
                steps_completed=len(report.trace),
                empirical_eta=report.empirical_eta,
                expected_eta=report.expected_eta,
                final_train_loss=final_train_loss,
                eval_error=eval_error,
                final_theta=[float(v) for v in report.final_theta],
            )
        _write_json(payload, os.path.join(out, f"{base}.json"))
        results.append(result)

    succeeded = [r for r in results if not r.failed]
    mean = std = None
    if succeeded:
        mean, std = {}, {}
        for key in ("empirical_eta", "final_train_loss", "eval_error"):
            values = [getattr(r, key) for r in succeeded]
            if any(v is None for v in values):
                mean[key] = None
                std[key] = None
            else:
                mean[key], std[key] = _mean_std(values)

    expected = expected_eta_exact(config.schedule, config.total_steps)
    published = load_published_eta().get(config.schedule.canonical())
    aggregate = AggregateReport(
        name=config.name,
        schedule=config.schedule.canonical(),
        total_steps=config.total_steps,
        expected_eta=expected,
        published_eta=published,
        erratum=published is not None and abs(expected - published) > ERRATUM_TOLERANCE,
        results=results,
        mean=mean,
        std=std,
        config=echo,
        runs=runs,
    )
    _write_json(aggregate.to_json_dict(), os.path.join(out, "aggregate.json"))
    return aggregate
