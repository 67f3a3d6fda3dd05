#include "rdq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <unordered_map>

namespace rdq {

std::vector<JobId> compute_queue_potential(std::span<const Job> ordered_waiting, Seconds now, Seconds residual) {
    std::vector<JobId> kept;
    Seconds start = now + residual;
    for (const Job& j : ordered_waiting) {
        if (start <= j.expiry) {
            kept.push_back(j.id);
            start += j.service;
        }
    }
    return kept;
}

namespace {

struct Potential {
    std::size_t size = 0;
    Reward reward = 0.0;
};

class Simulator {
public:
    Simulator(std::span<const Job> jobs, Policy& policy, const EngineOptions& options)
        : jobs_(jobs), policy_(policy), opt_(options) {}

    SimulationTrace run();

private:
    Seconds residual() const { return busy() ? completion_ - clock_ : 0.0; }
    bool busy() const { return in_service_.has_value(); }

    Potential potential() {
        ordered_.clear();
        policy_.for_each_waiting([this](const Job& j) { ordered_.push_back(j); });
        Potential p;
        Seconds start = clock_ + residual();
        for (const Job& j : ordered_) {
            if (start <= j.expiry) {
                ++p.size;
                p.reward += j.reward;
                start += j.service;
            }
        }
        out_.max_potential = std::max(out_.max_potential, p.size);
        return p;
    }

    QueueSnapshot snapshot(std::optional<std::size_t> pot) const {
        return {clock_, busy(), waiting_.size(), pot};
    }

    void record(EventKind kind, JobId id, const QueueSnapshot& before, const QueueSnapshot& after,
                const Potential& pot) {
        if (!opt_.record_trace) return;
        EventRecord r;
        r.time = clock_;
        r.kind = kind;
        r.job_id = id;
        r.qe_class = classify_event(before, kind, after, out_.deterministic_service);
        r.queue_potential = pot.size;
        r.cumulative_reward = served_reward_ + pot.reward;
        out_.events.push_back(r);
    }

    std::optional<Potential> maybe_potential() {
        if (opt_.track_potential) return potential();
        return std::nullopt;
    }

    static std::optional<std::size_t> size_of(const std::optional<Potential>& p) {
        return p ? std::optional<std::size_t>(p->size) : std::nullopt;
    }

    [[noreturn]] void violation(const std::string& what) const {
        throw ContractViolation("policy '" + std::string(policy_.name()) + "' at t=" + std::to_string(clock_) +
                                ": " + what);
    }

    void check_policy_size() const {
        if (policy_.size() != waiting_.size())
            violation("policy holds " + std::to_string(policy_.size()) + " jobs, engine expects " +
                      std::to_string(waiting_.size()));
    }

    void begin_service(const Job& job) {
        in_service_ = job;
        completion_ = clock_ + job.service;
        ++out_.served_count;
        served_reward_ += job.reward;
        if (job.reward == top_reward_) ++out_.topclass_served;
        out_.schedule.push_back({job.id, clock_});
    }

    void report_expiries();
    void complete_service();
    void decide();
    void arrive(const Job& job);
    void end_of_timestamp();

    std::span<const Job> jobs_;
    Policy& policy_;
    EngineOptions opt_;
    SimulationTrace out_;

    Seconds clock_ = -std::numeric_limits<Seconds>::infinity();
    std::optional<Job> in_service_;
    Seconds completion_ = 0.0;
    std::unordered_map<JobId, Job> waiting_;
    std::set<std::pair<Seconds, JobId>> unexpired_;  // waiting jobs not yet reported expired
    std::vector<Job> ordered_;
    Reward served_reward_ = 0.0;
    Reward top_reward_ = 0.0;
    std::size_t next_ = 0;
    bool in_epoch_ = true;
};

void Simulator::report_expiries() {
    while (!unexpired_.empty() && unexpired_.begin()->first < clock_) {
        const JobId id = unexpired_.begin()->second;
        unexpired_.erase(unexpired_.begin());
        const auto pot = maybe_potential();
        const QueueSnapshot s = snapshot(size_of(pot));
        record(EventKind::expiry_passed, id, s, s, pot.value_or(Potential{}));
    }
}

void Simulator::complete_service() {
    const QueueSnapshot before = snapshot(std::nullopt);
    const JobId id = in_service_->id;
    in_service_.reset();
    const auto pot = maybe_potential();
    record(EventKind::service_complete, id, before, snapshot(size_of(pot)), pot.value_or(Potential{}));
}

void Simulator::decide() {
    while (!busy()) {
        const ServiceDecision d = policy_.select(clock_);
        if (d.kind == ServiceDecision::Kind::idle) {
            if (!waiting_.empty())
                violation("idle decision with " + std::to_string(waiting_.size()) + " waiting jobs");
            check_policy_size();
            return;
        }
        auto it = waiting_.find(d.job);
        if (it == waiting_.end()) violation("decision on job " + std::to_string(d.job) + " which is not waiting");
        const Job job = it->second;
        const QueueSnapshot before = snapshot(std::nullopt);
        waiting_.erase(it);
        if (opt_.record_trace) unexpired_.erase({job.expiry, job.id});
        check_policy_size();

        if (d.kind == ServiceDecision::Kind::serve) {
            if (is_expired(job, clock_)) violation("serving job " + std::to_string(job.id) + " after its expiry");
            begin_service(job);
            const auto pot = maybe_potential();
            record(EventKind::service_begin, job.id, before, snapshot(size_of(pot)), pot.value_or(Potential{}));
        } else {
            ++out_.dropped_count;
            const auto pot = maybe_potential();
            record(EventKind::drop, job.id, before, snapshot(size_of(pot)), pot.value_or(Potential{}));
        }
    }
}

void Simulator::arrive(const Job& job) {
    ++next_;
    in_epoch_ = false;
    ++out_.arrivals;
    const bool idle = !busy();
    const auto pot_before = (idle && waiting_.empty()) ? std::nullopt : maybe_potential();
    const QueueSnapshot before = snapshot(size_of(pot_before));

    ArrivalDecision d = policy_.on_arrival(job, clock_, residual(), idle);
    if (d.kind == ArrivalDecision::Kind::serve_now) {
        if (!(idle && waiting_.empty())) violation("immediate service requested while the system is occupied");
        begin_service(job);
        const auto pot = maybe_potential();
        const QueueSnapshot after = snapshot(size_of(pot));
        record(EventKind::arrival, job.id, before, after, pot.value_or(Potential{}));
        record(EventKind::service_begin, job.id, before, after, pot.value_or(Potential{}));
        return;
    }

    waiting_.emplace(job.id, job);
    if (opt_.record_trace) unexpired_.insert({job.expiry, job.id});
    for (JobId id : d.dropped) {
        auto it = waiting_.find(id);
        if (it == waiting_.end()) violation("admission dropped job " + std::to_string(id) + " which is not waiting");
        if (opt_.record_trace) unexpired_.erase({it->second.expiry, id});
        waiting_.erase(it);
        ++out_.dropped_count;
    }
    check_policy_size();

    const auto pot = maybe_potential();
    record(EventKind::arrival, job.id, before, snapshot(size_of(pot)), pot.value_or(Potential{}));
    std::size_t pending = d.dropped.size();
    for (JobId id : d.dropped) {
        QueueSnapshot b = snapshot(size_of(pot));
        QueueSnapshot a = b;
        b.waiting += pending;
        a.waiting += pending - 1;
        --pending;
        record(EventKind::drop, id, b, a, pot.value_or(Potential{}));
    }
}

void Simulator::end_of_timestamp() {
    if (out_.arrivals != out_.served_count + out_.dropped_count + waiting_.size())
        violation("job conservation broken");
    if (!busy() && !waiting_.empty()) violation("server idle with waiting jobs");
    if (waiting_.size() > out_.queue_bound) {
        const Potential p = potential();
        if (p.size > out_.queue_bound)
            violation("queue potential " + std::to_string(p.size) + " exceeds bound " +
                      std::to_string(out_.queue_bound));
    }
    if (!busy() && waiting_.empty() && !in_epoch_) {
        in_epoch_ = true;
        out_.epochs.push_back({clock_, served_reward_, out_.served_count, next_});
    }
}

SimulationTrace Simulator::run() {
    validate_stream(jobs_);
    out_.stream_checksum = stream_checksum(jobs_);
    if (!jobs_.empty()) {
        const ScenarioBounds b = realized_bounds(jobs_);
        out_.queue_bound = queue_length_bound(b);
        out_.deterministic_service = b.b_min == b.b_max;
        top_reward_ = b.w_max;
    }

    constexpr Seconds inf = std::numeric_limits<Seconds>::infinity();
    while (next_ < jobs_.size() || busy()) {
        const Seconds t_done = busy() ? completion_ : inf;
        const Seconds t_arrive = next_ < jobs_.size() ? jobs_[next_].arrival : inf;
        clock_ = std::min(t_done, t_arrive);

        if (opt_.record_trace) report_expiries();
        if (busy() && completion_ == clock_) {
            complete_service();
            decide();
        }
        while (next_ < jobs_.size() && jobs_[next_].arrival == clock_) arrive(jobs_[next_]);
        end_of_timestamp();
    }
    out_.total_reward = served_reward_;
    return std::move(out_);
}

}  // namespace

SimulationTrace run_simulation(std::span<const Job> jobs, Policy& policy, const EngineOptions& options) {
    if (policy.size() != 0) throw std::invalid_argument("run_simulation: policy must start empty");
    Simulator sim(jobs, policy, options);
    return sim.run();
}

std::vector<Seconds> empty_queue_epochs(const SimulationTrace& trace) {
    std::vector<Seconds> out;
    out.reserve(trace.epochs.size());
    for (const Epoch& e : trace.epochs) out.push_back(e.time);
    return out;
}

ComparisonReport compare_traces(const SimulationTrace& a, const SimulationTrace& b, Reward tolerance) {
    if (a.stream_checksum != b.stream_checksum || a.arrivals != b.arrivals)
        throw std::invalid_argument("compare_traces: traces come from different job streams");

    ComparisonReport r;
    std::size_t i = 0, j = 0;
    while (i < a.epochs.size() && j < b.epochs.size()) {
        const Epoch& ea = a.epochs[i];
        const Epoch& eb = b.epochs[j];
        if (ea.next_arrival < eb.next_arrival) {
            ++i;
        } else if (eb.next_arrival < ea.next_arrival) {
            ++j;
        } else {
            r.epoch_times.push_back(std::max(ea.time, eb.time));
            r.delta.push_back(ea.reward - eb.reward);
            ++i;
            ++j;
        }
    }

    r.equivalent = true;
    r.as_good_as = true;
    if (r.delta.empty()) return r;

    r.min_delta = *std::min_element(r.delta.begin(), r.delta.end());
    double sum = 0.0;
    for (Reward d : r.delta) {
        sum += d;
        if (std::abs(d) > tolerance) r.equivalent = false;
        if (d < -tolerance) r.as_good_as = false;
    }
    const auto n = static_cast<double>(r.delta.size());
    r.mean_delta = sum / n;
    r.final_delta = r.delta.back();

    if (r.delta.size() >= 2) {
        const double x_mean = (n - 1.0) / 2.0;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t k = 0; k < r.delta.size(); ++k) {
            const double dx = static_cast<double>(k) - x_mean;
            sxy += dx * (r.delta[k] - r.mean_delta);
            sxx += dx * dx;
        }
        r.trend_slope = sxy / sxx;
    }
    r.better = r.final_delta > tolerance && r.trend_slope > 0.0;
    return r;
}

}  // namespace rdq
