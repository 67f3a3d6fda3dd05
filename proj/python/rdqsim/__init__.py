"""Single-server deadline queue simulator (C++ core)."""

from ._core import (
    ConfigError,
    ContractViolation,
    Job,
    ScenarioSpec,
    adversarial_stream,
    compare_policies,
    compute_queue_potential,
    generate_stream,
    mmb_preset,
    mmm_preset,
    optimal_offline,
    optimal_topclass_count,
    parse_config,
    policy_names,
    queue_length_bound,
    run_simulation,
    run_suite,
    suite_names,
    verify_lemma1,
    verify_theorem4,
    verify_theorem5,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "Job",
    "ScenarioSpec",
    "adversarial_stream",
    "compare_policies",
    "compute_queue_potential",
    "generate_stream",
    "mmb_preset",
    "mmm_preset",
    "optimal_offline",
    "optimal_topclass_count",
    "parse_config",
    "policy_names",
    "queue_length_bound",
    "run_simulation",
    "run_suite",
    "suite_names",
    "verify_lemma1",
    "verify_theorem4",
    "verify_theorem5",
]
