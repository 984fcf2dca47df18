"""Benchmark protocol: epochs of online updates over a shuffled training split,
repeated with fresh splits, validation-tuned step sizes for the tuned kinds,
and CSV output with a final averaged block."""

import time
from dataclasses import dataclass

import numpy as np

from . import baselines, data_io, losses

# Step-size grid used when the config does not override it: 13 log-spaced
# points covering 1e-4 .. 1e2.
DEFAULT_GRID = tuple(float(v) for v in np.logspace(-4.0, 2.0, 13))

CSV_HEADER = ("algorithm", "repetition", "epoch", "eta0",
              "train_loss", "val_loss", "test_loss", "wall_ms")


@dataclass
class ExperimentConfig:
    algorithm: str
    data_path: str = ""
    data_format: str = "libsvm"            # libsvm | csv
    task: str = "regression"               # classification | regression
    target_column: str = "target"
    epochs: int = 10
    repetitions: int = 3
    eta0_grid: tuple = None   # None: default grid for tuned kinds
    seed: int = 0
    out_path: str = ""
    check_bounds: bool = False
    trace_wealth_path: str = ""

    def __post_init__(self):
        if self.algorithm not in baselines.ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.data_format not in ("libsvm", "csv"):
            raise ValueError(f"unknown data format {self.data_format!r}")
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.eta0_grid is not None:
            self.eta0_grid = tuple(float(v) for v in self.eta0_grid)
        if baselines.is_parameter_free(self.algorithm) and self.eta0_grid:
            raise ValueError(
                f"{self.algorithm} is parameter-free; the eta0 grid must be empty")

    @property
    def effective_grid(self):
        """The grid actually swept: empty for parameter-free kinds, the
        default when a tuned kind has no override."""
        if baselines.is_parameter_free(self.algorithm):
            return ()
        return DEFAULT_GRID if self.eta0_grid is None else self.eta0_grid

    @property
    def loss_kind(self):
        return "hinge" if self.task == "classification" else "absolute"


@dataclass
class RunRecord:
    algorithm: str
    repetition: object           # int, or "mean" for the averaged block
    epoch: int
    eta0: float = None
    train_loss: float = 0.0
    val_loss: float = 0.0
    test_loss: float = 0.0
    wall_ms: float = 0.0


class RunAborted(RuntimeError):
    """A learner precondition failed; carries the offending round index."""

    def __init__(self, round_index, cause):
        super().__init__(f"round {round_index}: {cause}")
        self.round_index = round_index


def load_dataset(config: ExperimentConfig) -> data_io.Dataset:
    with open(config.data_path) as fh:
        if config.data_format == "libsvm":
            return data_io.parse_libsvm(fh, task=config.task, name=config.data_path)
        return data_io.parse_csv(fh, config.target_column, config.task,
                                 name=config.data_path)


def prepare_splits(config: ExperimentConfig, dataset, repetition):
    """Split, binarize classification targets when needed (median of the
    training targets), and run the preprocessing chain."""
    spec = data_io.SplitSpec(seed=config.seed, repetition=repetition)
    train, val, test = data_io.shuffle_split(dataset, spec)
    threshold = None
    if config.task == "classification" and not set(np.unique(train.y)) <= {-1.0, 1.0}:
        threshold = data_io.median_threshold(train.y)
        train, val, test = (data_io.binarize_by_threshold(d, threshold)
                            for d in (train, val, test))
    train, val, test, record = data_io.standardize_then_unit_normalize(train, val, test)
    record.seed = config.seed
    record.repetition = repetition
    record.binarize_threshold = threshold
    return train, val, test, record


def run_single(config: ExperimentConfig, repetition, eta0=None, dataset=None,
               loss_fn=None, trace_cb=None):
    """One repetition at one step size: epochs of sequential online updates in
    split order, evaluating validation and test loss after every epoch."""
    if dataset is None:
        dataset = load_dataset(config)
    train, val, test, _ = prepare_splits(config, dataset, repetition)
    kind = config.loss_kind
    loss_fn = loss_fn or losses.eval_grad_fn(kind)
    learner = baselines.make_algorithm(
        config.algorithm, train.n_features, eta0=eta0,
        loss_kind=kind, trace_cb=trace_cb)

    records = []
    w = learner.predict()
    round_index = 0
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        total = 0.0
        for i in range(len(train)):
            round_index += 1
            ex = losses.LabeledExample(train.X[i], train.y[i])
            loss_value, g = loss_fn(w, ex)
            total += loss_value
            try:
                w = learner.step(loss_value, g, ex)
            except ValueError as err:
                raise RunAborted(round_index, err) from err
        records.append(RunRecord(
            algorithm=config.algorithm, repetition=repetition, epoch=epoch,
            eta0=eta0,
            train_loss=total / len(train),
            val_loss=losses.mean_loss(kind, w, val.X, val.y),
            test_loss=losses.mean_loss(kind, w, test.X, test.y),
            wall_ms=(time.perf_counter() - t0) * 1e3))
    return records


def _mean_rows(per_rep_records, config):
    by_epoch = {}
    for rec in per_rep_records:
        by_epoch.setdefault(rec.epoch, []).append(rec)
    rows = []
    for epoch in sorted(by_epoch):
        group = by_epoch[epoch]
        etas = [r.eta0 for r in group]
        rows.append(RunRecord(
            algorithm=config.algorithm, repetition="mean", epoch=epoch,
            eta0=None if any(e is None for e in etas) else sum(etas) / len(etas),
            train_loss=sum(r.train_loss for r in group) / len(group),
            val_loss=sum(r.val_loss for r in group) / len(group),
            test_loss=sum(r.test_loss for r in group) / len(group),
            wall_ms=sum(r.wall_ms for r in group) / len(group)))
    return rows


def tune_and_run(config: ExperimentConfig, dataset=None, trace_cb=None):
    """Full protocol. Tuned kinds sweep the grid per repetition and keep the
    step size with the best final-epoch validation loss (ties go to the
    smaller eta0); parameter-free kinds run once per repetition. Averaged
    rows are appended last."""
    if dataset is None:
        dataset = load_dataset(config)
    tuned = not baselines.is_parameter_free(config.algorithm)
    if tuned:
        grid = config.effective_grid
        if not grid:
            raise ValueError(f"{config.algorithm} needs a non-empty eta0 grid")

    selected = []
    for rep in range(config.repetitions):
        if not tuned:
            selected.extend(run_single(config, rep, None, dataset,
                                       trace_cb=trace_cb))
            continue
        best = None
        for eta0 in sorted(grid):
            records = run_single(config, rep, eta0, dataset)
            final_val = records[-1].val_loss
            if best is None or final_val < best[0]:
                best = (final_val, records)  # ascending grid: ties keep smaller
        selected.extend(best[1])
    return selected + _mean_rows(selected, config)


def _fmt(value):
    if value is None:
        return ""
    return f"{value:.10g}"


def emit_csv(records, path, extra_lines=()):
    """Write records (header + one row each); optional trailing comment lines
    carry the diagnostics block."""
    if not records:
        raise ValueError("no records to write")
    with open(path, "w") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for r in records:
            fh.write(",".join([
                r.algorithm, str(r.repetition), str(r.epoch), _fmt(r.eta0),
                _fmt(r.train_loss), _fmt(r.val_loss), _fmt(r.test_loss),
                _fmt(r.wall_ms)]) + "\n")
        for line in extra_lines:
            fh.write(line.rstrip("\n") + "\n")


def read_csv(path):
    """Parse a file written by emit_csv back into dict rows (comments skipped)."""
    rows = []
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header != list(CSV_HEADER):
            raise ValueError(f"unexpected header {header}")
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            vals = line.split(",")
            row = dict(zip(header, vals))
            for key in ("eta0", "train_loss", "val_loss", "test_loss", "wall_ms"):
                row[key] = float(row[key]) if row[key] else None
            row["epoch"] = int(row["epoch"])
            rows.append(row)
    return rows


def write_metadata(config: ExperimentConfig, path, dataset=None):
    """Record the protocol substitutions that the benchmark leaves open:
    the grid actually used, the split PRNG, and any binarization thresholds."""
    if dataset is None:
        dataset = load_dataset(config)
    with open(path, "w") as fh:
        fh.write(f"algorithm={config.algorithm}\n")
        fh.write(f"task={config.task}\n")
        fh.write(f"loss={config.loss_kind}\n")
        fh.write(f"epochs={config.epochs}\n")
        fh.write(f"repetitions={config.repetitions}\n")
        fh.write(f"seed={config.seed}\n")
        fh.write(f"split_prng={data_io.SPLIT_PRNG}\n")
        fh.write("selection=final-epoch validation loss, ties to smaller eta0\n")
        fh.write("eta0_grid=" + ",".join(f"{v:.10g}" for v in sorted(config.effective_grid)) + "\n")
        for rep in range(config.repetitions):
            _, _, _, record = prepare_splits(config, dataset, rep)
            if record.binarize_threshold is not None:
                fh.write(f"binarize_threshold_rep{rep}={record.binarize_threshold!r}\n")
