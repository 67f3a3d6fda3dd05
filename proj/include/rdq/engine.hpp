#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rdq/core.hpp"
#include "rdq/policies.hpp"

namespace rdq {

/// A policy broke the simulation contract (forced idle, serving an unknown or
/// expired job, queue bound, job conservation).
class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EngineOptions {
    bool record_trace = true;
    /// Recompute the queue potential at every event. Needed for QE3/QE4
    /// classification and for cumulative reward that counts the potential; costs one
    /// pass over the waiting room per event.
    bool track_potential = true;
};

/// Instant at which the queue is empty and the server idle.
struct Epoch {
    Seconds time = 0.0;
    Reward reward = 0.0;        // served reward at the epoch
    std::size_t served = 0;
    std::size_t next_arrival = 0;  // index of the next arrival (== n after the last one)

    bool operator==(const Epoch&) const = default;
};

struct ServiceStart {
    JobId id = 0;
    Seconds start = 0.0;

    bool operator==(const ServiceStart&) const = default;
};

struct SimulationTrace {
    std::vector<EventRecord> events;  // empty unless record_trace
    std::vector<Epoch> epochs;
    std::vector<ServiceStart> schedule;
    std::size_t arrivals = 0;
    std::size_t served_count = 0;
    std::size_t dropped_count = 0;
    std::size_t topclass_served = 0;  // served jobs with the stream's largest reward
    Reward total_reward = 0.0;
    std::size_t max_potential = 0;    // tracked potentials only
    std::size_t queue_bound = 0;      // ceil(realized d_max / realized b_min)
    std::uint64_t stream_checksum = 0;
    bool deterministic_service = false;

    bool operator==(const SimulationTrace&) const = default;
};

/// Jobs that would all begin on time if nothing else arrived: scanning in
/// policy order from now + residual, a job is kept iff its simulated start is
/// no later than its expiry; kept jobs advance the simulated clock.
std::vector<JobId> compute_queue_potential(std::span<const Job> ordered_waiting, Seconds now, Seconds residual);

/// Runs the whole stream to drain. At one timestamp a service completion is
/// handled first (with the policy's decision at that instant), then arrivals in
/// id order. Throws ContractViolation when the policy misbehaves and
/// std::invalid_argument for an unordered stream.
SimulationTrace run_simulation(std::span<const Job> jobs, Policy& policy, const EngineOptions& options = {});

std::vector<Seconds> empty_queue_epochs(const SimulationTrace& trace);

struct ComparisonReport {
    std::vector<Seconds> epoch_times;  // common epochs
    std::vector<Reward> delta;         // U_a - U_b per common epoch
    Reward min_delta = 0.0;
    Reward mean_delta = 0.0;
    Reward final_delta = 0.0;
    double trend_slope = 0.0;  // least-squares slope of delta against epoch index
    bool equivalent = false;
    bool as_good_as = false;
    bool better = false;  // evidence only: positive final delta and positive trend
};

/// Compares two runs of the same stream at the epochs where both systems are
/// empty. Throws std::invalid_argument when the stream checksums differ.
ComparisonReport compare_traces(const SimulationTrace& a, const SimulationTrace& b, Reward tolerance = 0.0);

}  // namespace rdq
