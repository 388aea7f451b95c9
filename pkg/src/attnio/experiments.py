"""Parameter sweeps, scaling-exponent fits, and bound-consistency checks.

A sweep runs the chosen kernels over an (N, d, M) grid on seeded random
instances and records exact I/O counts, epoch counts, and the largest
number of Q K^T entries completed in any single epoch (B_max).  Records
serialize to a stable CSV schema; fits and bound checks consume them.

All numeric thresholds live in bound_config.json next to this module so
the acceptance constants are auditable in one place.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .compression import epoch_progress_bound, max_entries_per_epoch
from .errors import ConfigurationError, RegimeError
from .kernels import (
    dispatch_attention,
    reference_attention,
    square_tiling_attention,
    streaming_attention,
)
from .matrices import random_instance
from .memory import MemoryHierarchy

_KERNELS = {
    "tiling": square_tiling_attention,
    "streaming": streaming_attention,
    "dispatch": dispatch_attention,
}

CSV_COLUMNS = ["algorithm", "N", "d", "M", "status", "reads", "writes",
               "epochs", "bmax"]


def load_bound_config() -> dict:
    with resources.files(__package__).joinpath("bound_config.json").open() as fh:
        return json.load(fh)


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification; the seed fully determines all inputs."""

    n_grid: tuple
    d_grid: tuple
    m_grid: tuple
    algorithms: tuple = ("tiling", "streaming")
    seed: int = 0
    magnitude: float = 1.0

    def __post_init__(self):
        for alg in self.algorithms:
            if alg not in _KERNELS:
                raise ConfigurationError(f"unknown algorithm {alg!r}")
        if not (self.n_grid and self.d_grid and self.m_grid):
            raise ConfigurationError("grids must be non-empty")

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls(
            n_grid=tuple(raw["N"]), d_grid=tuple(raw["d"]), m_grid=tuple(raw["M"]),
            algorithms=tuple(raw.get("algorithms", ("tiling", "streaming"))),
            seed=int(raw.get("seed", 0)),
            magnitude=float(raw.get("magnitude", 1.0)),
        )


@dataclass(frozen=True)
class SweepRecord:
    algorithm: str
    N: int
    d: int
    M: int
    status: str            # "ok" or "regime_error"
    reads: int
    writes: int
    epochs: int
    bmax: int

    @property
    def io(self) -> int:
        return self.reads + self.writes


def _point_seed(base: int, alg: str, n: int, d: int, m: int) -> np.random.SeedSequence:
    alg_id = sorted(_KERNELS).index(alg)
    return np.random.SeedSequence([base, alg_id, n, d, m])


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """One record per (algorithm, N, d, M) grid point, in grid order.

    A kernel raising a regime error yields a record with status
    "regime_error" and zeroed counters; the sweep continues.
    """
    records = []
    for alg in config.algorithms:
        kernel = _KERNELS[alg]
        for n in config.n_grid:
            for d in config.d_grid:
                for m in config.m_grid:
                    seed = _point_seed(config.seed, alg, n, d, m)
                    inst = random_instance(n, d, seed, config.magnitude)
                    h = MemoryHierarchy(m)
                    try:
                        res = kernel(h, inst)
                    except RegimeError:
                        records.append(SweepRecord(alg, n, d, m, "regime_error",
                                                   0, 0, 0, 0))
                        continue
                    bmax = max_entries_per_epoch(res.entry_completions, res.epochs)
                    records.append(SweepRecord(
                        alg, n, d, m, "ok", res.io.reads, res.io.writes,
                        len(res.epochs), bmax))
    return records


def records_to_csv(records) -> str:
    """Stable CSV text: header then one record per line in input order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.algorithm, r.N, r.d, r.M, r.status,
                         r.reads, r.writes, r.epochs, r.bmax])
    return buf.getvalue()


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def read_records_csv(path) -> list[SweepRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(SweepRecord(
                row["algorithm"], int(row["N"]), int(row["d"]), int(row["M"]),
                row["status"], int(row["reads"]), int(row["writes"]),
                int(row["epochs"]), int(row["bmax"])))
    return records


def fit_scaling_exponent(records, vary: str = "M") -> tuple[float, float]:
    """Least-squares slope of log(I/O) against log(axis).

    Returns (slope, residual) where residual is the root-mean-square
    log deviation from the fitted line.  Needs at least 3 records that
    differ only along the chosen axis.
    """
    axis_of = {"M": lambda r: r.M, "N": lambda r: r.N, "d": lambda r: r.d}
    if vary not in axis_of:
        raise ConfigurationError(f"vary must be one of {sorted(axis_of)}")
    usable = [r for r in records if r.status == "ok"]
    if len(usable) < 3:
        raise ConfigurationError("need at least 3 ok records to fit")
    fixed = {"M", "N", "d"} - {vary}
    for name in fixed:
        values = {axis_of[name](r) for r in usable}
        if len(values) != 1:
            raise ConfigurationError(f"records vary along {name}, expected only {vary}")
    xs = np.log([axis_of[vary](r) for r in usable])
    if len(set(xs)) < 2:
        raise ConfigurationError("degenerate grid: axis values all equal")
    ys = np.log([r.io for r in usable])
    (slope, intercept), *_ = np.polyfit(xs, ys, 1, full=True)
    residual = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return float(slope), residual


@dataclass(frozen=True)
class BoundFlags:
    record: SweepRecord
    upper_ok: bool
    lower_ok: bool
    epoch_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.upper_ok and self.lower_ok and self.epoch_ok


@dataclass(frozen=True)
class BoundReport:
    flags: list

    @property
    def ok(self) -> bool:
        return all(f.all_ok for f in self.flags)

    def failures(self) -> list:
        return [f for f in self.flags if not f.all_ok]


def upper_bound_formula(algorithm: str, n: int, d: int, m: int) -> float:
    """The regime formula each kernel is held to (constant excluded)."""
    if algorithm == "tiling":
        return n * n * d / np.sqrt(m) + n * n
    if algorithm == "streaming":
        return n * n * d * d / m + n * d
    # dispatch inherits the better of the two regimes
    return min(n * n * d / np.sqrt(m) + n * n, n * n * d * d / m + n * d)


def check_bounds(records, config: dict | None = None) -> BoundReport:
    """Flag each ok record against three inequalities.

    (i) upper: I/O <= C_up * regime formula; (ii) lower-consistency:
    I/O >= C_lo * min(N^2 d^2 / M, N^2) and I/O >= 3Nd; (iii) epoch
    progress: B_max <= C_ep * epoch_progress_bound(2M, d).
    """
    cfg = config or load_bound_config()
    c_up = cfg["upper_constant"]
    c_lo = cfg["lower_constant"]
    c_ep = cfg["epoch_progress_constant"]
    factor = cfg["epoch_cache_factor"]
    flags = []
    for r in records:
        if r.status != "ok":
            continue
        upper = r.io <= c_up * upper_bound_formula(r.algorithm, r.N, r.d, r.M)
        lower = (r.io >= c_lo * min(r.N ** 2 * r.d ** 2 / r.M, r.N ** 2)
                 and r.io >= 3 * r.N * r.d)
        epoch = r.bmax <= c_ep * epoch_progress_bound(factor * r.M, r.d)
        flags.append(BoundFlags(r, upper, lower, epoch))
    return BoundReport(flags)


def dispatch_matches_argmin(n: int, d: int, m: int) -> bool:
    """True iff the dispatcher's choice equals the formula argmin
    (ties to streaming) wherever both regimes are available."""
    tiling_f = n * n * d / np.sqrt(m)
    streaming_f = n * n * d * d / m
    prefers_streaming = streaming_f <= tiling_f
    picks_streaming = m >= d * d and m >= 8 * d
    if m < 8 * d:
        return not picks_streaming
    return picks_streaming == prefers_streaming
