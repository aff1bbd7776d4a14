"""Source-driven opinion dissemination in fully-connected populations.

Exact birth-death-chain analysis of memoryless opinion dynamics (hitting
times and lower-bound certificates), a Monte Carlo simulator for the
sequential activation model including the memory-augmented trend rule, and
an experiment harness with CSV and SVG output.
"""

from .chains import (
    BirthDeathChain,
    Boundary,
    FullKnowledgeRule,
    MemorylessRule,
    binomial_expectation,
    chi_window,
    full_knowledge_chain,
    mirror_chain,
    sample_chain_from_rule,
    voter_chain,
)
from .dynamics import (
    DynamicsKind,
    Majority,
    Mean,
    Table,
    Trend,
    TrendMemory,
    Voter,
    default_trend_ell,
    majority_rule,
    mean_rule,
    memoryless_tables,
    parse_dynamics,
    trend_step,
    voter_rule,
)
from .experiments import (
    ExperimentRow,
    ExperimentSpec,
    ExperimentTable,
    cell_seed,
    figure1_spec,
    parse_csv,
    rows_to_csv,
    run_experiment,
    single_cell_rows,
)
from .hitting import (
    HittingReport,
    Method,
    UnreachableConsensusError,
    double_harmonic_sum,
    harmonic,
    hitting_time_oracle,
    rational_hitting_time,
    step_expectations_detailed_balance,
    step_expectations_recurrence,
    voter_main_sum,
)
from .lowerbound import (
    Branch,
    Dichotomy,
    LowerBoundCertificate,
    a_coefficients,
    amgm_dichotomy,
    full_knowledge_certificate,
    hitting_lower_bound,
    interval_product_sum,
    pair_products,
    random_full_knowledge_rule,
)
from .plotting import render_svg, write_svg
from .simulator import (
    InitKind,
    Population,
    TrialConfig,
    TrialResult,
    activation_step,
    attach_trend_memories,
    collapse_opinions,
    draw_sample_ones,
    init_adversarial,
    init_uniform,
    run_trial,
    run_trials,
)

__version__ = "0.1.0"

__all__ = [
    "BirthDeathChain",
    "Boundary",
    "FullKnowledgeRule",
    "MemorylessRule",
    "binomial_expectation",
    "chi_window",
    "full_knowledge_chain",
    "mirror_chain",
    "sample_chain_from_rule",
    "voter_chain",
    "DynamicsKind",
    "Majority",
    "Mean",
    "Table",
    "Trend",
    "TrendMemory",
    "Voter",
    "default_trend_ell",
    "majority_rule",
    "mean_rule",
    "memoryless_tables",
    "parse_dynamics",
    "trend_step",
    "voter_rule",
    "ExperimentRow",
    "ExperimentSpec",
    "ExperimentTable",
    "cell_seed",
    "figure1_spec",
    "parse_csv",
    "rows_to_csv",
    "run_experiment",
    "single_cell_rows",
    "HittingReport",
    "Method",
    "UnreachableConsensusError",
    "double_harmonic_sum",
    "harmonic",
    "hitting_time_oracle",
    "rational_hitting_time",
    "step_expectations_detailed_balance",
    "step_expectations_recurrence",
    "voter_main_sum",
    "Branch",
    "Dichotomy",
    "LowerBoundCertificate",
    "a_coefficients",
    "amgm_dichotomy",
    "full_knowledge_certificate",
    "hitting_lower_bound",
    "interval_product_sum",
    "pair_products",
    "random_full_knowledge_rule",
    "render_svg",
    "write_svg",
    "InitKind",
    "Population",
    "TrialConfig",
    "TrialResult",
    "activation_step",
    "attach_trend_memories",
    "collapse_opinions",
    "draw_sample_ones",
    "init_adversarial",
    "init_uniform",
    "run_trial",
    "run_trials",
    "__version__",
]
