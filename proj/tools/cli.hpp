#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "rdq/policies.hpp"
#include "rdq/suites.hpp"

namespace rdq::cli {

enum ExitCode : int { ok = 0, check_failed = 1, bad_input = 2, contract_violation = 3 };

using PolicyFactory =
    std::function<std::unique_ptr<Policy>(std::string_view, const std::optional<RewardClassMap>&)>;

struct RunOptions {
    std::string config;
    std::string policy = "edf";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string out_dir = ".";
    std::string format = "csv";
};

/// Writes trace.{csv,json} and metrics.json into out_dir.
int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err, const PolicyFactory& factory = {});

struct ReproduceOptions {
    std::string study = "mmb";
    std::string out_dir = ".";
    std::size_t seeds = 10;
    std::uint64_t seed = 1;
    std::size_t jobs = 100000;
    std::string format = "csv";
};

/// Writes table, summary and streams files plus the ordering checks.
int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out, std::ostream& err);

int cmd_verify(const std::string& suite, const SuiteParams& params, std::ostream& out, std::ostream& err);

struct OracleCliOptions {
    std::string instance;
    std::optional<std::string> policy;
    bool memoize = true;
    std::size_t max_jobs = 14;
};

int cmd_oracle(const OracleCliOptions& opt, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; returns the process exit code.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rdq::cli
