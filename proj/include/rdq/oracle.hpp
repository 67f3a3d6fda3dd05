#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdq/core.hpp"
#include "rdq/engine.hpp"

namespace rdq {

class InstanceTooLarge : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct OracleOptions {
    std::size_t max_jobs = 14;
    bool memoize = true;
};

struct OracleResult {
    Reward max_total_reward = 0.0;
    /// Most jobs carrying the instance's largest reward that any admissible
    /// schedule serves (not necessarily the reward-optimal one).
    std::size_t max_topclass_count = 0;
    /// Top-class count of the witness (lexicographic secondary objective).
    std::size_t witness_topclass_count = 0;
    std::vector<ServiceStart> witness;
    std::size_t states_visited = 0;
};

/// Best total reward over every non-idling, non-preemptive schedule.
///
/// Decision points follow the engine's timing: when the server frees at T,
/// any unserved job with arrival < T and expiry >= T may be started; with
/// none available the server waits for the next arrival and starts the
/// lowest-id job arriving then. Ties on reward are broken towards more
/// top-reward jobs. Throws InstanceTooLarge beyond `options.max_jobs`.
OracleResult optimal_offline(std::span<const Job> jobs, const OracleOptions& options = {});

/// Most jobs with reward == w_max servable by an admissible schedule.
std::size_t optimal_topclass_count(std::span<const Job> jobs, Reward w_max, const OracleOptions& options = {});

/// Static feasibility of a schedule: known ids served once, start within
/// [arrival, expiry], no overlap, and no idle stretch while an unexpired job
/// waits. Returns a description of the first problem, or nullopt.
std::optional<std::string> check_schedule(std::span<const Job> jobs, std::span<const ServiceStart> schedule);

/// Feeds the schedule to the engine through a scripted policy. Returns a
/// description of the first disagreement (engine contract violation or a
/// different realised schedule), or nullopt when the replay matches.
std::optional<std::string> replay_schedule(std::span<const Job> jobs, std::span<const ServiceStart> schedule);

enum class VerifyStatus { pass, fail, skipped };

std::string_view to_string(VerifyStatus status) noexcept;

struct VerifyOutcome {
    VerifyStatus status = VerifyStatus::pass;
    std::string reason;

    bool ok() const noexcept { return status != VerifyStatus::fail; }
};

/// MUD against the oracle on a deterministic-service instance with at most
/// two reward levels and d_min > 2 b_max: equal total reward and equal count
/// of top-reward jobs. Instances outside that regime are skipped.
VerifyOutcome verify_theorem4(std::span<const Job> jobs, const OracleOptions& options = {});

/// MUD against the oracle with at most two service times, constant reward and
/// d_min > 2 b_max: equal served count.
VerifyOutcome verify_theorem5(std::span<const Job> jobs, const OracleOptions& options = {});

/// State of one run after all events at a timestamp.
struct TimestampState {
    Seconds time = 0.0;
    std::size_t potential = 0;
    std::size_t served = 0;
};

/// Needs a trace recorded with potentials.
std::vector<TimestampState> timestamp_states(const SimulationTrace& trace);

/// MUD and EDF on the same deterministic-service stream: equal queue
/// potential size after every timestamp and identical service-begin times.
VerifyOutcome verify_lemma1(std::span<const Job> jobs);

struct MonotonicityReport {
    std::size_t checked = 0;             // timestamps where the premise still held
    std::optional<Seconds> premise_broken;
    std::vector<Seconds> violations;     // |served_a| < |served_b| while the premise held
};

/// Along two runs of one stream, while |Q_a| >= |Q_b| has held at every
/// common timestamp so far, expects |served_a| >= |served_b|.
MonotonicityReport monitor_monotonicity(const SimulationTrace& a, const SimulationTrace& b);

}  // namespace rdq
