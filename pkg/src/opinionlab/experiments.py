"""Experiment grids: many simulation cells, one CSV, reproducible by seed.

A cell is (dynamics, n, init); each runs a fixed number of trials. Cell seeds
are derived by hashing the master seed with the cell coordinates, so adding
or removing cells never shifts the randomness of the others.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from typing import Callable, Iterable

from .dynamics import DynamicsKind, Trend, Voter
from .simulator import Engine, InitKind, TrialConfig, run_trials

__all__ = [
    "ExperimentSpec",
    "ExperimentRow",
    "ExperimentTable",
    "CsvFormatError",
    "figure1_spec",
    "cell_seed",
    "run_cell",
    "run_experiment",
    "single_cell_rows",
    "rows_to_csv",
    "parse_csv",
    "CSV_HEADER",
]

CSV_HEADER = "dynamics,n,init,trial,seed,rounds,parallel_rounds,converged"

VOTER_EXPONENTS = range(3, 11)
TREND_EXPONENTS_DESK = range(3, 14)
TREND_EXPONENTS_FULL = range(3, 18)
DEFAULT_TRIALS = 100
DEFAULT_MASTER_SEED = 12
DEFAULT_MAX_PARALLEL_ROUNDS = 1_000_000


@dataclass(frozen=True)
class ExperimentSpec:
    """A grid of simulation cells: each dynamics owns its list of n values;
    every (dynamics, n, init) cell runs `trials` trials."""

    grids: tuple[tuple[DynamicsKind, tuple[int, ...]], ...]
    z: int = 1
    inits: tuple[InitKind, ...] = (InitKind.UNIFORM, InitKind.ADVERSARIAL)
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_MASTER_SEED
    max_parallel_rounds: int = DEFAULT_MAX_PARALLEL_ROUNDS

    def __post_init__(self) -> None:
        if not self.grids or any(not ns for _, ns in self.grids):
            raise ValueError("grids must be non-empty")
        if not self.inits:
            raise ValueError("need at least one init kind")
        if self.trials < 1:
            raise ValueError("need trials >= 1")
        if self.z < 1:
            raise ValueError("need z >= 1")
        if self.max_parallel_rounds < 1:
            raise ValueError("need max_parallel_rounds >= 1")

    def cells(self) -> Iterable[tuple[DynamicsKind, int, InitKind]]:
        for dynamics, ns in self.grids:
            for n in ns:
                for init in self.inits:
                    yield dynamics, n, init


@dataclass(frozen=True)
class ExperimentRow:
    dynamics: str
    n: int
    init: str
    trial: int
    seed: int
    rounds: int
    parallel_rounds: float
    converged: bool

    def to_csv(self) -> str:
        return (
            f"{self.dynamics},{self.n},{self.init},{self.trial},{self.seed},"
            f"{self.rounds},{self.parallel_rounds:.6g},"
            f"{'true' if self.converged else 'false'}"
        )


@dataclass(frozen=True)
class ExperimentTable:
    rows: tuple[ExperimentRow, ...]

    def cell_rows(self, dynamics: str, n: int, init: str) -> tuple[ExperimentRow, ...]:
        return tuple(
            r
            for r in self.rows
            if r.dynamics == dynamics and r.n == n and r.init == init
        )

    def mean_parallel_rounds(self, dynamics: str, n: int, init: str) -> float:
        rows = self.cell_rows(dynamics, n, init)
        if not rows:
            raise KeyError(f"no rows for ({dynamics}, {n}, {init})")
        return sum(r.parallel_rounds for r in rows) / len(rows)

    def all_converged(self, dynamics: str, n: int, init: str) -> bool:
        rows = self.cell_rows(dynamics, n, init)
        if not rows:
            raise KeyError(f"no rows for ({dynamics}, {n}, {init})")
        return all(r.converged for r in rows)


def figure1_spec(
    *,
    full: bool = False,
    trials: int = DEFAULT_TRIALS,
    master_seed: int = DEFAULT_MASTER_SEED,
    max_parallel_rounds: int = DEFAULT_MAX_PARALLEL_ROUNDS,
    trend_ell: int | None = None,
    z: int = 1,
) -> ExperimentSpec:
    """The default comparison grid: voter at n = 2^3..2^10 and the trend rule
    at n = 2^3..2^13 (2^17 when full=True), both inits, 100 trials per cell."""
    trend_exponents = TREND_EXPONENTS_FULL if full else TREND_EXPONENTS_DESK
    grids = (
        (Voter(), tuple(2**i for i in VOTER_EXPONENTS)),
        (Trend(trend_ell), tuple(2**i for i in trend_exponents)),
    )
    return ExperimentSpec(
        grids=grids,
        z=z,
        trials=trials,
        master_seed=master_seed,
        max_parallel_rounds=max_parallel_rounds,
    )


def cell_seed(master_seed: int, dynamics: DynamicsKind, n: int, init: InitKind) -> int:
    """Stable 64-bit seed for one cell, independent of the rest of the grid."""
    key = f"{master_seed}:{dynamics.label()}:{n}:{init.value}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def run_cell(
    spec: ExperimentSpec,
    dynamics: DynamicsKind,
    n: int,
    init: InitKind,
    *,
    engine: Engine = "numba",
) -> list[ExperimentRow]:
    config = TrialConfig(
        n=n,
        z=spec.z,
        dynamics=dynamics,
        init=init,
        max_rounds=spec.max_parallel_rounds * n,
        engine=engine,
    )
    seed = cell_seed(spec.master_seed, dynamics, n, init)
    label = dynamics.label()
    return [
        ExperimentRow(
            dynamics=label,
            n=n,
            init=init.value,
            trial=t,
            seed=result.seed,
            rounds=result.rounds,
            parallel_rounds=result.parallel_rounds,
            converged=result.converged,
        )
        for t, result in enumerate(run_trials(config, spec.trials, seed))
    ]


def run_experiment(
    spec: ExperimentSpec,
    *,
    engine: Engine = "numba",
    progress: Callable[[str], None] | None = None,
) -> ExperimentTable:
    """Run every cell of the grid; row order follows the grid order and is
    independent of how cells are scheduled."""
    rows: list[ExperimentRow] = []
    for dynamics, n, init in spec.cells():
        if progress is not None:
            progress(f"{dynamics.label()} n={n} init={init.value}")
        rows.extend(run_cell(spec, dynamics, n, init, engine=engine))
    return ExperimentTable(tuple(rows))


def rows_to_csv(rows: Iterable[ExperimentRow]) -> str:
    lines = [CSV_HEADER]
    lines.extend(row.to_csv() for row in rows)
    return "\n".join(lines) + "\n"


class CsvFormatError(ValueError):
    """Raised with the 1-based line number of the offending CSV line."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def parse_csv(text: str) -> ExperimentTable:
    """Parse result rows, validating the header and every field."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError(1, "missing header") from None
    if header != CSV_HEADER.split(","):
        raise CsvFormatError(1, f"unexpected header {','.join(header)!r}")
    rows = []
    for record in reader:
        line = reader.line_num
        if not record:
            continue
        if len(record) != 8:
            raise CsvFormatError(line, f"expected 8 fields, got {len(record)}")
        try:
            rows.append(
                ExperimentRow(
                    dynamics=record[0],
                    n=int(record[1]),
                    init=record[2],
                    trial=int(record[3]),
                    seed=int(record[4]),
                    rounds=int(record[5]),
                    parallel_rounds=float(record[6]),
                    converged=_parse_bool(record[7]),
                )
            )
        except ValueError as exc:
            raise CsvFormatError(line, str(exc)) from None
    return ExperimentTable(tuple(rows))


def single_cell_rows(
    dynamics: DynamicsKind,
    n: int,
    z: int,
    init: InitKind,
    trials: int,
    master_seed: int,
    *,
    max_parallel_rounds: int = DEFAULT_MAX_PARALLEL_ROUNDS,
    engine: Engine = "numba",
) -> list[ExperimentRow]:
    """One cell outside any grid, seeded exactly like a grid cell would be."""
    spec = ExperimentSpec(
        grids=((dynamics, (n,)),),
        z=z,
        inits=(init,),
        trials=trials,
        master_seed=master_seed,
        max_parallel_rounds=max_parallel_rounds,
    )
    return run_cell(spec, dynamics, n, init, engine=engine)
