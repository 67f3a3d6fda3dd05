#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "rdq/core.hpp"

namespace rdq {

struct ScenarioSpec;

enum class QueueOrder {
    earliest_expiry,              // (expiry, id)
    earliest_expiry_high_reward,  // (expiry, -reward, id)
    arrival,                      // id
    highest_reward,               // (-reward, expiry, id)
};

/// Waiting jobs kept sorted by one of the policy orders. Storage is a sorted
/// vector: queues are short (bounded by d_max / b_min in the potential) and
/// rank arithmetic dominates.
class OrderedQueue {
public:
    explicit OrderedQueue(QueueOrder order = QueueOrder::earliest_expiry) : order_(order) {}

    QueueOrder order() const noexcept { return order_; }
    std::size_t size() const noexcept { return jobs_.size(); }
    bool empty() const noexcept { return jobs_.empty(); }
    bool contains(JobId id) const { return members_.contains(id); }

    /// Returns the 0-based rank the job was placed at.
    std::size_t insert(const Job& job);
    bool erase(JobId id);
    Job erase_at(std::size_t rank);

    const Job& operator[](std::size_t rank) const { return jobs_[rank]; }
    const Job& front() const { return jobs_.front(); }
    auto begin() const noexcept { return jobs_.begin(); }
    auto end() const noexcept { return jobs_.end(); }
    std::span<const Job> jobs() const noexcept { return jobs_; }

    /// Some queued job with expiry < now (the earliest such), if any.
    std::optional<Job> peek_expired(Seconds now) const;

private:
    bool before(const Job& a, const Job& b) const noexcept;

    QueueOrder order_;
    std::vector<Job> jobs_;
    std::unordered_set<JobId> members_;
    // Lazy min-heap on (expiry, id); stale entries are skipped on peek.
    using HeapEntry = std::pair<Seconds, JobId>;
    mutable std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> expiry_heap_;
};

/// 1-based rank and the service time queued ahead of the job.
struct QueueOffset {
    JobId id = 0;
    std::size_t rank = 0;
    Seconds wait = 0.0;
};

std::vector<QueueOffset> queue_offsets(const OrderedQueue& queue);

struct ArrivalDecision {
    enum class Kind { serve_now, accepted, rejected };
    Kind kind = Kind::accepted;
    std::size_t position = 0;       // 0-based rank after admission (accepted only)
    std::vector<JobId> dropped;     // jobs removed by the admission, in drop order

    static ArrivalDecision serve_now() { return {Kind::serve_now, 0, {}}; }
};

struct ServiceDecision {
    enum class Kind { serve, drop, idle };
    Kind kind = Kind::idle;
    JobId job = 0;

    static ServiceDecision serve(JobId id) { return {Kind::serve, id}; }
    static ServiceDecision drop(JobId id) { return {Kind::drop, id}; }
    static ServiceDecision idle() { return {Kind::idle, 0}; }
    bool operator==(const ServiceDecision&) const = default;
};

// Decision procedures on a single ordered queue. Each call yields one decision
// and removes the decided job (served or dropped) from the queue; callers loop
// until they get serve or idle.

/// Min-expiry job: dropped if expired, otherwise served.
ServiceDecision edf_select(OrderedQueue& queue, Seconds now);
/// EDF plus a swap of the two heads when it saves the second job without
/// losing the first: serve the second iff e_1 >= now + b_2 and e_2 < now + b_1.
ServiceDecision medf_select(OrderedQueue& queue, Seconds now);
/// Two-head rule on the throughput ratio: serve the second iff
/// e_1 >= now + b_2 and w_1/b_1 < w_2/b_2.
ServiceDecision mud_select(OrderedQueue& queue, Seconds now);
/// Highest reward among unexpired jobs; expired jobs are dropped first.
ServiceDecision greedy_select(OrderedQueue& queue, Seconds now);
/// Lowest id among unexpired jobs; expired jobs are dropped first.
ServiceDecision fcfs_select(OrderedQueue& queue, Seconds now);

/// Arrival handling of MUD on an (expiry, -reward) ordered queue.
///
/// The job is inserted; while some queued job J would start after its expiry
/// (e_J < now + residual + wait(J)), the job with the smallest w/b among those
/// ranked up to the first such J is dropped (ties: earlier expiry, then rank).
/// On return every queued job is feasible. Does not handle the idle-server
/// case; see Policy::on_arrival.
ArrivalDecision mud_admit(OrderedQueue& queue, const Job& job, Seconds now, Seconds residual);

/// Per-class coefficients of the c mu / theta rule.
struct RewardClass {
    double c = 1.0;
    double mu = 1.0;
    double theta = 1.0;
    double index() const noexcept { return c * mu / theta; }
};

/// Maps rewards to classes: either exact values (discrete rewards) or
/// half-open buckets [lower_k, lower_{k+1}) for continuous rewards.
class RewardClassMap {
public:
    static RewardClassMap exact(std::vector<double> values, std::vector<RewardClass> classes);
    static RewardClassMap buckets(std::vector<double> lowers, std::vector<RewardClass> classes);
    /// Classes for a scenario: one per support point of a discrete reward law
    /// (c = reward) or `spec.cmu_classes` equal-mass buckets of a continuous
    /// law (c = bucket mean). mu = 1/E[B], theta = 1/E[D].
    static RewardClassMap for_scenario(const ScenarioSpec& spec);
    /// One class per distinct reward of a concrete job list (c = reward); mu
    /// and theta from the list's mean service time and deadline.
    static RewardClassMap for_jobs(std::span<const Job> jobs);

    std::size_t size() const noexcept { return classes_.size(); }
    const RewardClass& coefficients(std::size_t k) const { return classes_.at(k); }
    /// Throws std::out_of_range when no class has coefficients for `reward`.
    std::size_t class_of(Reward reward) const;

private:
    bool exact_ = true;
    std::vector<double> keys_;
    std::vector<RewardClass> classes_;
};

/// Picks the non-empty class with the largest c mu / theta (ties: larger c,
/// then lower k) and decides on its head. Expired jobs anywhere are dropped
/// first. Throws std::invalid_argument when `coefficients` is shorter than
/// `class_queues`.
ServiceDecision cmu_theta_select(std::vector<OrderedQueue>& class_queues, const std::vector<RewardClass>& coefficients,
                                 Seconds now);

/// A scheduling policy owns the waiting room and its order. The engine owns
/// the clock and the server and validates every decision.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string_view name() const = 0;

    /// An arrival to an idle server with an empty queue is served at once;
    /// otherwise the policy admits the job into its queue.
    ArrivalDecision on_arrival(const Job& job, Seconds now, Seconds residual, bool server_idle);

    /// Called when the server is free. Removes the returned job from the queue.
    virtual ServiceDecision select(Seconds now) = 0;

    virtual std::size_t size() const = 0;

    /// Visits waiting jobs in the policy's service order.
    virtual void for_each_waiting(const std::function<void(const Job&)>& visit) const = 0;

    /// A new instance with the same configuration and an empty queue.
    virtual std::unique_ptr<Policy> fresh() const = 0;

protected:
    virtual ArrivalDecision admit(const Job& job, Seconds now, Seconds residual) = 0;
};

/// Policy over a single ordered queue with a pluggable select procedure.
class SingleQueuePolicy : public Policy {
public:
    using Selector = ServiceDecision (*)(OrderedQueue&, Seconds);

    SingleQueuePolicy(std::string name, QueueOrder order, Selector selector)
        : name_(std::move(name)), queue_(order), selector_(selector) {}

    std::string_view name() const override { return name_; }
    ServiceDecision select(Seconds now) override { return selector_(queue_, now); }
    std::size_t size() const override { return queue_.size(); }
    void for_each_waiting(const std::function<void(const Job&)>& visit) const override;
    std::unique_ptr<Policy> fresh() const override;

    const OrderedQueue& queue() const noexcept { return queue_; }

protected:
    ArrivalDecision admit(const Job& job, Seconds now, Seconds residual) override;

    std::string name_;
    OrderedQueue queue_;
    Selector selector_;
};

class MudPolicy final : public SingleQueuePolicy {
public:
    MudPolicy() : SingleQueuePolicy("mud", QueueOrder::earliest_expiry_high_reward, &mud_select) {}
    std::unique_ptr<Policy> fresh() const override { return std::make_unique<MudPolicy>(); }

protected:
    ArrivalDecision admit(const Job& job, Seconds now, Seconds residual) override {
        return mud_admit(queue_, job, now, residual);
    }
};

class CmuThetaPolicy final : public Policy {
public:
    /// `intra` is QueueOrder::arrival for c mu / theta and
    /// QueueOrder::earliest_expiry for the EDF-ordered variant.
    CmuThetaPolicy(RewardClassMap classes, QueueOrder intra);

    std::string_view name() const override;
    ServiceDecision select(Seconds now) override;
    std::size_t size() const override { return total_; }
    void for_each_waiting(const std::function<void(const Job&)>& visit) const override;
    std::unique_ptr<Policy> fresh() const override;

protected:
    ArrivalDecision admit(const Job& job, Seconds now, Seconds residual) override;

private:
    RewardClassMap classes_;
    QueueOrder intra_;
    std::vector<OrderedQueue> queues_;
    std::vector<RewardClass> coefficients_;
    std::vector<std::size_t> visit_order_;  // classes by decreasing priority
    std::size_t total_ = 0;
};

class UnknownPolicy : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// edf | medf | mud | cmutheta | cmutheta_edf | greedy | fcfs
const std::vector<std::string>& policy_names();

/// `classes` is required for the two c mu / theta policies.
std::unique_ptr<Policy> make_policy(std::string_view name, const std::optional<RewardClassMap>& classes = std::nullopt);

}  // namespace rdq
