"""Command line front end.

Subcommands: analyze (exact chain and hitting-time report), lowerbound
(certificate CSV for random full-knowledge rules), simulate (one Monte Carlo
cell), experiment figure1 (the comparison grid plus SVG), and plot (SVG from
a result CSV). Exit codes: 0 success, 1 usage error, 2 precondition or
certificate failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .chains import Boundary, FullKnowledgeRule, sample_chain_from_rule
from .dynamics import Trend, Voter, memoryless_tables, parse_dynamics
from .experiments import (
    DEFAULT_MASTER_SEED,
    DEFAULT_MAX_PARALLEL_ROUNDS,
    DEFAULT_TRIALS,
    CsvFormatError,
    ExperimentSpec,
    figure1_spec,
    parse_csv,
    rows_to_csv,
    run_experiment,
    single_cell_rows,
)
from .hitting import (
    UnreachableConsensusError,
    harmonic,
    hitting_time_oracle,
    step_expectations_detailed_balance,
    step_expectations_recurrence,
    voter_main_sum,
)
from .lowerbound import (
    CERTIFICATE_CSV_HEADER,
    CertificateFailureError,
    CertificatePreconditionError,
    certificate_csv_row,
    full_knowledge_certificate,
    random_full_knowledge_rule,
)
from .plotting import render_svg
from .simulator import InitKind

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message: str) -> "argparse.NoReturn":  # type: ignore[name-defined]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _write_text(path: str | None, text: str) -> int:
    if path is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {path}: {exc}")
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        kind = parse_dynamics(args.dynamics)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    if isinstance(kind, Trend):
        return _fail(EXIT_USAGE, "no chain representation for stateful dynamics")
    rule = memoryless_tables(kind)
    try:
        chain = sample_chain_from_rule(rule, args.n, args.z, Boundary.ABSORBING)
        recurrence = step_expectations_recurrence(chain)
        balance = step_expectations_detailed_balance(chain)
        oracle = hitting_time_oracle(chain, args.z)
    except UnreachableConsensusError as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    n, z = args.n, args.z
    lines = [
        f"dynamics         {kind.label()}",
        f"population       n = {n}, z = {z} source(s), states {z}..{n}",
        "",
        "state table: i, p_i, q_i",
    ]
    for i in range(z, n + 1):
        lines.append(f"  {i:6d}  {chain.p(i):.10g}  {chain.q(i):.10g}")
    lines += ["", "per-step expectations: k, recurrence, detailed-balance"]
    for k in range(z + 1, n + 1):
        lines.append(
            f"  {k:6d}  {recurrence.step(k):.10g}  {balance.step(k):.10g}"
        )
    lines += [
        "",
        f"total expected consensus time from state {z}:",
        f"  recurrence        {recurrence.total:.10g}",
        f"  detailed-balance  {balance.total:.10g}",
        f"  linear-solve      {float(oracle):.10g}",
    ]
    if isinstance(kind, Voter) and n >= 3:
        reference = 2.0 * n * n * harmonic(n - 1)
        lines += [
            "",
            f"voter main sum    {voter_main_sum(n):.10g}",
            f"ratio to 2 n^2 H(n-1)  {recurrence.total / reference:.10g}",
        ]
    print("\n".join(lines))
    return EXIT_OK


def _voter_like_rule(n: int) -> FullKnowledgeRule:
    g = np.arange(n + 1) / n
    return FullKnowledgeRule(n, g, g)


def _cmd_lowerbound(args: argparse.Namespace) -> int:
    lines = [CERTIFICATE_CSV_HEADER]
    try:
        lines.append(
            certificate_csv_row(
                full_knowledge_certificate(_voter_like_rule(args.n), args.z, seed=-1)
            )
        )
        for t in range(args.rules):
            rule_seed = int(
                np.random.SeedSequence((args.seed, t)).generate_state(1, np.uint64)[0]
            )
            rng = np.random.Generator(np.random.PCG64(rule_seed))
            rule = random_full_knowledge_rule(args.n, rng)
            cert = full_knowledge_certificate(rule, args.z, seed=rule_seed)
            lines.append(certificate_csv_row(cert))
    except (CertificatePreconditionError, CertificateFailureError) as exc:
        return _fail(EXIT_PRECONDITION, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    return _write_text(args.out, "\n".join(lines) + "\n")


def _resolve_dynamics(args: argparse.Namespace):
    kind = parse_dynamics(args.dynamics)
    if args.ell is not None:
        if not isinstance(kind, Trend):
            raise ValueError("--ell overrides the sample size of trend only")
        kind = Trend(args.ell)
    return kind


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        kind = _resolve_dynamics(args)
        rows = single_cell_rows(
            kind,
            args.n,
            args.z,
            InitKind(args.init),
            args.trials,
            args.seed,
            max_parallel_rounds=args.max_parallel_rounds,
        )
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    return _write_text(args.out, rows_to_csv(rows))


_CONFIG_KEYS = {
    "dynamics",
    "n",
    "z",
    "init",
    "trials",
    "seed",
    "max_parallel_rounds",
    "out",
    "svg",
    "full",
}


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            config = json.load(handle)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid config {path}: {exc}") from exc
    if not isinstance(config, dict):
        raise ValueError(f"invalid config {path}: expected a JSON object")
    unknown = sorted(set(config) - _CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config field(s): {', '.join(unknown)}")
    return config


def _grids_from_config(config: dict, default: ExperimentSpec):
    dynamics = config.get("dynamics")
    shared_n = config.get("n")
    if shared_n is not None:
        shared_n = tuple(int(v) for v in shared_n)
    if dynamics is None:
        if shared_n is None:
            return default.grids
        return tuple((kind, shared_n) for kind, _ in default.grids)
    if isinstance(dynamics, dict):
        return tuple(
            (parse_dynamics(label), tuple(int(v) for v in ns))
            for label, ns in dynamics.items()
        )
    if shared_n is None:
        raise ValueError("config lists dynamics but no n grid")
    return tuple((parse_dynamics(label), shared_n) for label in dynamics)


def _cmd_figure1(args: argparse.Namespace) -> int:
    try:
        config = _load_config(args.config) if args.config else {}
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))

    def pick(flag, key, fallback):
        if flag is not None:
            return flag
        return config.get(key, fallback)

    try:
        full = bool(pick(args.full or None, "full", False))
        spec = figure1_spec(
            full=full,
            trials=int(pick(args.trials, "trials", DEFAULT_TRIALS)),
            master_seed=int(pick(args.seed, "seed", DEFAULT_MASTER_SEED)),
            max_parallel_rounds=int(
                pick(
                    args.max_parallel_rounds,
                    "max_parallel_rounds",
                    DEFAULT_MAX_PARALLEL_ROUNDS,
                )
            ),
            trend_ell=args.ell,
            z=int(pick(args.z, "z", 1)),
        )
        grids = _grids_from_config(config, spec)
        inits = tuple(InitKind(name) for name in config.get("init", ["uniform", "adversarial"]))
        spec = ExperimentSpec(
            grids=grids,
            z=spec.z,
            inits=inits,
            trials=spec.trials,
            master_seed=spec.master_seed,
            max_parallel_rounds=spec.max_parallel_rounds,
        )
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))

    out_path = pick(args.out, "out", "figure1.csv")
    svg_path = pick(args.svg, "svg", "figure1.svg")
    table = run_experiment(
        spec, progress=lambda cell: print(f"running {cell}", file=sys.stderr)
    )
    code = _write_text(out_path, rows_to_csv(table.rows))
    if code != EXIT_OK:
        return code
    return _write_text(svg_path, render_svg(table))


def _cmd_plot(args: argparse.Namespace) -> int:
    try:
        with open(args.csv, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.csv}: {exc}")
    try:
        table = parse_csv(text)
    except CsvFormatError as exc:
        return _fail(EXIT_PRECONDITION, f"malformed CSV in {args.csv}: {exc}")
    svg_path = args.svg
    if svg_path is None:
        stem = args.csv[:-4] if args.csv.endswith(".csv") else args.csv
        svg_path = stem + ".svg"
    return _write_text(svg_path, render_svg(table))


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="opinionlab",
        description=(
            "Exact analysis and Monte Carlo simulation of source-driven "
            "opinion dissemination in fully-connected populations."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    analyze = commands.add_parser(
        "analyze", help="exact chain report for a memoryless dynamics"
    )
    analyze.add_argument("--dynamics", required=True)
    analyze.add_argument("--n", type=int, required=True)
    analyze.add_argument("--z", type=int, default=1)
    analyze.set_defaults(func=_cmd_analyze)

    lowerbound = commands.add_parser(
        "lowerbound", help="slowness certificates for full-knowledge rules"
    )
    lowerbound.add_argument("--n", type=int, required=True)
    lowerbound.add_argument("--z", type=int, default=1)
    lowerbound.add_argument("--rules", type=int, default=100)
    lowerbound.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    lowerbound.add_argument("--out", default=None)
    lowerbound.set_defaults(func=_cmd_lowerbound)

    simulate = commands.add_parser("simulate", help="Monte Carlo trials of one cell")
    simulate.add_argument("--dynamics", required=True)
    simulate.add_argument("--n", type=int, required=True)
    simulate.add_argument("--z", type=int, default=1)
    simulate.add_argument("--init", choices=["uniform", "adversarial"], default="uniform")
    simulate.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    simulate.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    simulate.add_argument("--ell", type=int, default=None)
    simulate.add_argument(
        "--max-parallel-rounds", type=int, default=DEFAULT_MAX_PARALLEL_ROUNDS
    )
    simulate.add_argument("--out", default=None)
    simulate.set_defaults(func=_cmd_simulate)

    experiment = commands.add_parser("experiment", help="multi-cell experiment grids")
    grids = experiment.add_subparsers(
        dest="experiment_command", required=True, parser_class=_Parser
    )
    figure1 = grids.add_parser(
        "figure1", help="the voter versus trend comparison grid"
    )
    figure1.add_argument("--full", action="store_true")
    figure1.add_argument("--trials", type=int, default=None)
    figure1.add_argument("--seed", type=int, default=None)
    figure1.add_argument("--z", type=int, default=None)
    figure1.add_argument("--max-parallel-rounds", type=int, default=None)
    figure1.add_argument("--ell", type=int, default=None)
    figure1.add_argument("--out", default=None)
    figure1.add_argument("--svg", default=None)
    figure1.add_argument("--config", default=None)
    figure1.set_defaults(func=_cmd_figure1)

    plot = commands.add_parser("plot", help="render an SVG chart from a result CSV")
    plot.add_argument("csv")
    plot.add_argument("--svg", default=None)
    plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
