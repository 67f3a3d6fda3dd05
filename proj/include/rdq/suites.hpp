#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdq/workload.hpp"

namespace rdq {

/// Unset fields take the suite's own default.
struct SuiteParams {
    std::optional<std::size_t> instances;  // t4, t5, oracle
    std::optional<std::size_t> jobs;       // jobs per stream or instance
    std::optional<std::size_t> runs;       // lemma1, asgood, bounds
    std::optional<std::size_t> repeats;    // better
    std::uint64_t seed = 1;
};

struct SuiteReport {
    std::string suite;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t contract_violations = 0;
    std::vector<std::string> failures;  // first few, for diagnostics
    std::vector<std::pair<std::string, double>> metrics;
    double seconds = 0.0;

    bool ok() const noexcept { return failed == 0; }
    std::optional<double> metric(const std::string& name) const;
};

/// lemma1 | asgood | better | t4 | t5 | bounds | oracle
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const std::string& name, const SuiteParams& params = {});

// Instance families used by the suites.

/// Deterministic service b = 1, exponential inter-arrivals (rate 1.5) and
/// deadlines (rate 0.2); rewards 4/10 when `dual_reward`, else 1.
ScenarioSpec unit_deadline_spec(std::size_t n_jobs, std::uint64_t seed, bool dual_reward);
/// b = 1, arrivals rate 2, d ~ U[2.5, 6], w in {4, 10}.
ScenarioSpec unit_service_spec(std::size_t n_jobs, std::uint64_t seed);
/// b in {1, 3}, arrivals rate 1, d ~ U[6.5, 12], w = 1.
ScenarioSpec two_service_spec(std::size_t n_jobs, std::uint64_t seed);
/// Mixed instances for oracle self-checks: b ~ U[0.5, 2], d ~ U[0.5, 5],
/// w in {4, 10}, arrivals rate 1.5.
ScenarioSpec oracle_spec(std::size_t n_jobs, std::uint64_t seed);
/// b = 2, d = 4, w in {4, 10}; with delta = 1 each repeat has four fillers.
ScenarioBounds adversarial_bounds();

}  // namespace rdq
