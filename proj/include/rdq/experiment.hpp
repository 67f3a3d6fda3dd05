#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdq/workload.hpp"

namespace rdq {

struct ExperimentConfig {
    std::string study = "mmb";  // mmb | mmm
    std::vector<double> lambdas{0.9, 1.2, 1.5, 1.8, 2.1};
    std::vector<std::string> policies{"edf", "mud", "medf", "cmutheta", "cmutheta_edf", "greedy"};
    std::size_t seeds = 10;
    std::uint64_t base_seed = 1;
    std::size_t n_jobs = 100000;
};

/// Scenario of one cell. Throws ConfigError for an unknown study.
ScenarioSpec study_spec(const std::string& study, double lambda_a, std::size_t n_jobs, std::uint64_t seed);

struct CellResult {
    double lambda_a = 0.0;
    std::string policy;
    std::uint64_t seed = 0;
    std::size_t served = 0;
    std::size_t dropped = 0;
    double reward = 0.0;
    double rel_reward = 0.0;  // against EDF on the same stream
    double rel_jobs = 0.0;
    std::uint64_t stream_checksum = 0;

    bool operator==(const CellResult&) const = default;
};

/// Every (lambda, seed) stream is generated once and run under each policy;
/// EDF is always run as the baseline even when not listed. Seeds are shared
/// across lambdas, so neighbouring lambdas see common random numbers.
std::vector<CellResult> run_experiment(const ExperimentConfig& config,
                                       const std::function<void(const CellResult&)>& progress = {});

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;  // two-sided 95% Student t; 0 with fewer than two values
};

MeanCi mean_ci(const std::vector<double>& values, double confidence = 0.95);
/// One-sided lower / upper confidence bounds on the mean (Student t).
double lower_bound(const std::vector<double>& values, double confidence = 0.95);
double upper_bound(const std::vector<double>& values, double confidence = 0.95);

struct SummaryRow {
    double lambda_a = 0.0;
    std::string policy;
    std::size_t seeds = 0;
    MeanCi rel_reward;
    MeanCi rel_jobs;
};

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells);

struct OrderingCheck {
    std::string what;
    bool pass = false;
    double bound = 0.0;  // the confidence bound the decision used
};

/// At each lambda: mud's relative reward exceeds each other policy's and its
/// relative job count is at least one (one-sided 95% lower bound of the
/// paired difference >= 0); across lambdas: mud's advantage over EDF shows
/// no significant decrease between neighbours.
std::vector<OrderingCheck> qualitative_checks(const std::vector<CellResult>& cells);

/// `lambda_a,policy,seed,served,dropped,reward,rel_reward,rel_jobs`
void write_cells_csv(std::ostream& out, const std::vector<CellResult>& cells);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// `lambda_a,seed,stream_checksum`: one row per stream, shared by all policies.
void write_streams_csv(std::ostream& out, const std::vector<CellResult>& cells);
std::string experiment_json(const std::vector<CellResult>& cells, const std::vector<SummaryRow>& rows);

}  // namespace rdq
