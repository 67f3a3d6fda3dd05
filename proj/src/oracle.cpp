#include "rdq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace rdq {

namespace {

constexpr double time_tol = 1e-9;

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Value {
    double primary = 0.0;
    std::size_t secondary = 0;
};

bool better(const Value& a, const Value& b) {
    if (!nearly_equal(a.primary, b.primary)) return a.primary > b.primary;
    return a.secondary > b.secondary;
}

enum class Objective { reward_then_top, top_only };

struct StateKey {
    long long time;
    std::uint32_t mask;
    bool operator==(const StateKey&) const = default;
};

struct StateKeyHash {
    std::size_t operator()(const StateKey& k) const noexcept {
        return std::hash<long long>{}(k.time) ^ (std::hash<std::uint32_t>{}(k.mask) * 0x9e3779b97f4a7c15ULL);
    }
};

class Search {
public:
    Search(std::span<const Job> jobs, Reward w_max, Objective objective, bool memoize)
        : jobs_(jobs), w_max_(w_max), objective_(objective), memoize_(memoize) {}

    /// Jobs that may start when the server frees at `free_at`, and their start.
    std::vector<std::size_t> candidates(Seconds free_at, std::uint32_t mask, Seconds& start) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            if (mask & (1u << i)) continue;
            const Job& j = jobs_[i];
            if (j.arrival < free_at && j.expiry >= free_at) out.push_back(i);
        }
        if (!out.empty()) {
            start = free_at;
            return out;
        }
        // Idle until the next arrival; the lowest id arriving then is served.
        for (std::size_t i = 0; i < jobs_.size(); ++i) {
            if (mask & (1u << i)) continue;
            if (jobs_[i].arrival >= free_at) {
                start = jobs_[i].arrival;
                out.push_back(i);
                break;
            }
        }
        return out;
    }

    Value gain(std::size_t i) const {
        const bool top = jobs_[i].reward == w_max_;
        if (objective_ == Objective::top_only) return {top ? 1.0 : 0.0, 0};
        return {jobs_[i].reward, top ? 1u : 0u};
    }

    Value child(std::size_t i, Seconds start, std::uint32_t mask) {
        Value g = gain(i);
        const Value rest = solve(start + jobs_[i].service, mask | (1u << i));
        g.primary += rest.primary;
        g.secondary += rest.secondary;
        return g;
    }

    Value solve(Seconds free_at, std::uint32_t mask) {
        ++visited;
        StateKey key{0, mask};
        const bool use_memo = memoize_ && std::isfinite(free_at);
        if (use_memo) {
            key.time = std::llround(free_at * 1e9);
            if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        }
        Seconds start = 0.0;
        const auto cands = candidates(free_at, mask, start);
        Value best;
        bool first = true;
        for (std::size_t i : cands) {
            const Value v = child(i, start, mask);
            if (first || better(v, best)) best = v;
            first = false;
        }
        if (use_memo) memo_.emplace(key, best);
        return best;
    }

    Value solve_all() {
        if (jobs_.empty()) return {};
        return solve(-std::numeric_limits<Seconds>::infinity(), 0);
    }

    std::vector<ServiceStart> witness() {
        std::vector<ServiceStart> out;
        Seconds free_at = -std::numeric_limits<Seconds>::infinity();
        std::uint32_t mask = 0;
        for (;;) {
            Seconds start = 0.0;
            const auto cands = candidates(free_at, mask, start);
            if (cands.empty()) break;
            const Value target = solve(free_at, mask);
            std::size_t pick = cands.front();
            for (std::size_t i : cands) {
                const Value v = child(i, start, mask);
                if (!better(target, v) && !better(v, target)) {
                    pick = i;
                    break;
                }
            }
            out.push_back({jobs_[pick].id, start});
            mask |= 1u << pick;
            free_at = start + jobs_[pick].service;
        }
        return out;
    }

    std::size_t visited = 0;

private:
    std::span<const Job> jobs_;
    Reward w_max_;
    Objective objective_;
    bool memoize_;
    std::unordered_map<StateKey, Value, StateKeyHash> memo_;
};

void check_size(std::span<const Job> jobs, const OracleOptions& options) {
    const std::size_t limit = std::min<std::size_t>(options.max_jobs, 31);
    if (jobs.size() > limit)
        throw InstanceTooLarge("oracle: " + std::to_string(jobs.size()) + " jobs exceed the limit of " +
                               std::to_string(limit));
    validate_stream(jobs);
}

Reward top_reward(std::span<const Job> jobs) {
    Reward w = 0.0;
    for (const Job& j : jobs) w = std::max(w, j.reward);
    return w;
}

template <class F>
std::size_t distinct_count(std::span<const Job> jobs, F attr) {
    std::set<double> seen;
    for (const Job& j : jobs) seen.insert(attr(j));
    return seen.size();
}

}  // namespace

OracleResult optimal_offline(std::span<const Job> jobs, const OracleOptions& options) {
    check_size(jobs, options);
    OracleResult r;
    if (jobs.empty()) return r;
    const Reward w_max = top_reward(jobs);
    Search s(jobs, w_max, Objective::reward_then_top, options.memoize);
    const Value best = s.solve_all();
    r.max_total_reward = best.primary;
    r.witness_topclass_count = best.secondary;
    r.witness = s.witness();
    r.states_visited = s.visited;
    r.max_topclass_count = optimal_topclass_count(jobs, w_max, options);
    return r;
}

std::size_t optimal_topclass_count(std::span<const Job> jobs, Reward w_max, const OracleOptions& options) {
    check_size(jobs, options);
    Search s(jobs, w_max, Objective::top_only, options.memoize);
    return static_cast<std::size_t>(std::llround(s.solve_all().primary));
}

std::optional<std::string> check_schedule(std::span<const Job> jobs, std::span<const ServiceStart> schedule) {
    std::unordered_map<JobId, std::size_t> index;
    for (std::size_t i = 0; i < jobs.size(); ++i) index.emplace(jobs[i].id, i);
    std::vector<bool> served(jobs.size(), false);

    Seconds free_at = -std::numeric_limits<Seconds>::infinity();
    auto available = [&](Seconds t) {
        for (std::size_t i = 0; i < jobs.size(); ++i)
            if (!served[i] && jobs[i].arrival < t && jobs[i].expiry >= t) return true;
        return false;
    };
    auto next_arrival = [&](Seconds t) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < jobs.size(); ++i)
            if (!served[i] && jobs[i].arrival >= t) return i;
        return std::nullopt;
    };

    for (const ServiceStart& s : schedule) {
        auto it = index.find(s.id);
        if (it == index.end()) return "unknown job " + std::to_string(s.id);
        const std::size_t i = it->second;
        const Job& j = jobs[i];
        if (served[i]) return "job " + std::to_string(s.id) + " served twice";
        if (s.start < j.arrival - time_tol) return "job " + std::to_string(s.id) + " starts before it arrives";
        if (s.start > j.expiry + time_tol) return "job " + std::to_string(s.id) + " starts after its expiry";
        if (s.start < free_at - time_tol) return "job " + std::to_string(s.id) + " overlaps the previous service";
        if (available(free_at)) {
            if (std::abs(s.start - free_at) > time_tol)
                return "server idles at " + std::to_string(free_at) + " while a job waits";
        } else {
            const auto k = next_arrival(free_at);
            if (!k || *k != i || std::abs(s.start - jobs[*k].arrival) > time_tol)
                return "job " + std::to_string(s.id) + " is not the arrival an idle server must take";
        }
        served[i] = true;
        free_at = s.start + j.service;
    }
    if (available(free_at)) return "schedule ends while a job waits";
    if (next_arrival(free_at)) return "schedule ends before later arrivals are handled";
    return std::nullopt;
}

namespace {

class ScriptedPolicy final : public Policy {
public:
    explicit ScriptedPolicy(std::vector<ServiceStart> script) : script_(std::move(script)), queue_(QueueOrder::arrival) {}

    std::string_view name() const override { return "scripted"; }

    ServiceDecision select(Seconds now) override {
        if (auto e = queue_.peek_expired(now)) {
            queue_.erase(e->id);
            return ServiceDecision::drop(e->id);
        }
        // Entries started straight from arrival never reach the queue.
        while (cursor_ < script_.size() && !queue_.contains(script_[cursor_].id) &&
               script_[cursor_].start < now - time_tol)
            ++cursor_;
        if (cursor_ < script_.size() && queue_.contains(script_[cursor_].id)) {
            const JobId id = script_[cursor_++].id;
            queue_.erase(id);
            return ServiceDecision::serve(id);
        }
        return ServiceDecision::idle();
    }

    std::size_t size() const override { return queue_.size(); }
    void for_each_waiting(const std::function<void(const Job&)>& visit) const override {
        for (const Job& j : queue_) visit(j);
    }
    std::unique_ptr<Policy> fresh() const override { return std::make_unique<ScriptedPolicy>(script_); }

protected:
    ArrivalDecision admit(const Job& job, Seconds, Seconds) override {
        return {ArrivalDecision::Kind::accepted, queue_.insert(job), {}};
    }

private:
    std::vector<ServiceStart> script_;
    std::size_t cursor_ = 0;
    OrderedQueue queue_;
};

}  // namespace

std::optional<std::string> replay_schedule(std::span<const Job> jobs, std::span<const ServiceStart> schedule) {
    ScriptedPolicy policy({schedule.begin(), schedule.end()});
    SimulationTrace trace;
    try {
        trace = run_simulation(jobs, policy, {.record_trace = false, .track_potential = false});
    } catch (const ContractViolation& e) {
        return std::string("engine rejected the replay: ") + e.what();
    }
    if (trace.schedule.size() != schedule.size())
        return "replay served " + std::to_string(trace.schedule.size()) + " jobs, schedule has " +
               std::to_string(schedule.size());
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (trace.schedule[k].id != schedule[k].id || std::abs(trace.schedule[k].start - schedule[k].start) > time_tol)
            return "replay diverges at position " + std::to_string(k);
    }
    return std::nullopt;
}

std::string_view to_string(VerifyStatus status) noexcept {
    switch (status) {
        case VerifyStatus::pass: return "pass";
        case VerifyStatus::fail: return "fail";
        case VerifyStatus::skipped: return "skipped";
    }
    return "?";
}

namespace {

VerifyOutcome skipped(std::string why) { return {VerifyStatus::skipped, std::move(why)}; }
VerifyOutcome failed(std::string why) { return {VerifyStatus::fail, std::move(why)}; }

SimulationTrace run_named(std::span<const Job> jobs, std::string_view policy, const EngineOptions& opt) {
    auto p = make_policy(policy);
    return run_simulation(jobs, *p, opt);
}

}  // namespace

VerifyOutcome verify_theorem4(std::span<const Job> jobs, const OracleOptions& options) {
    if (jobs.empty()) return {};
    if (jobs.size() > options.max_jobs) return skipped("instance larger than the oracle limit");
    const ScenarioBounds b = realized_bounds(jobs);
    if (b.b_min != b.b_max) return skipped("service times are not deterministic");
    if (distinct_count(jobs, [](const Job& j) { return j.reward; }) > 2) return skipped("more than two reward levels");
    if (!b.guards_priority_inversion()) return skipped("d_min <= 2 b_max");

    const SimulationTrace mud = run_named(jobs, "mud", {.record_trace = false, .track_potential = false});
    const OracleResult opt = optimal_offline(jobs, options);
    if (!nearly_equal(mud.total_reward, opt.max_total_reward))
        return failed("mud reward " + std::to_string(mud.total_reward) + " < optimum " +
                      std::to_string(opt.max_total_reward));
    if (mud.topclass_served != opt.max_topclass_count)
        return failed("mud serves " + std::to_string(mud.topclass_served) + " top-reward jobs, optimum " +
                      std::to_string(opt.max_topclass_count));
    return {};
}

VerifyOutcome verify_theorem5(std::span<const Job> jobs, const OracleOptions& options) {
    if (jobs.empty()) return {};
    if (jobs.size() > options.max_jobs) return skipped("instance larger than the oracle limit");
    const ScenarioBounds b = realized_bounds(jobs);
    if (distinct_count(jobs, [](const Job& j) { return j.service; }) > 2) return skipped("more than two service times");
    if (b.w_min != b.w_max) return skipped("rewards are not constant");
    if (!b.guards_priority_inversion()) return skipped("d_min <= 2 b_max");

    const SimulationTrace mud = run_named(jobs, "mud", {.record_trace = false, .track_potential = false});
    const OracleResult opt = optimal_offline(jobs, options);
    if (mud.served_count != opt.witness.size())
        return failed("mud serves " + std::to_string(mud.served_count) + " jobs, optimum " +
                      std::to_string(opt.witness.size()));
    return {};
}

std::vector<TimestampState> timestamp_states(const SimulationTrace& trace) {
    std::vector<TimestampState> out;
    std::size_t served = 0;
    for (const EventRecord& e : trace.events) {
        if (e.kind == EventKind::service_begin) ++served;
        if (out.empty() || out.back().time != e.time) out.push_back({e.time, 0, 0});
        out.back().potential = e.queue_potential;
        out.back().served = served;
    }
    return out;
}

VerifyOutcome verify_lemma1(std::span<const Job> jobs) {
    if (jobs.empty()) return {};
    const ScenarioBounds b = realized_bounds(jobs);
    if (b.b_min != b.b_max) return skipped("service times are not deterministic");

    const SimulationTrace mud = run_named(jobs, "mud", {});
    const SimulationTrace edf = run_named(jobs, "edf", {});
    const auto sm = timestamp_states(mud);
    const auto se = timestamp_states(edf);
    if (sm.size() != se.size()) return failed("runs visit different numbers of timestamps");
    for (std::size_t k = 0; k < sm.size(); ++k) {
        if (sm[k].time != se[k].time) return failed("timestamps differ at step " + std::to_string(k));
        if (sm[k].potential != se[k].potential)
            return failed("queue sizes differ at t=" + std::to_string(sm[k].time) + ": mud " +
                          std::to_string(sm[k].potential) + ", edf " + std::to_string(se[k].potential));
    }
    if (mud.schedule.size() != edf.schedule.size()) return failed("served counts differ");
    for (std::size_t k = 0; k < mud.schedule.size(); ++k)
        if (mud.schedule[k].start != edf.schedule[k].start)
            return failed("service-begin times differ at service " + std::to_string(k));
    return {};
}

MonotonicityReport monitor_monotonicity(const SimulationTrace& a, const SimulationTrace& b) {
    const auto sa = timestamp_states(a);
    const auto sb = timestamp_states(b);
    MonotonicityReport r;
    TimestampState cur_a, cur_b;
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
        Seconds t;
        if (j >= sb.size() || (i < sa.size() && sa[i].time <= sb[j].time)) {
            t = sa[i].time;
        } else {
            t = sb[j].time;
        }
        if (i < sa.size() && sa[i].time == t) cur_a = sa[i++];
        if (j < sb.size() && sb[j].time == t) cur_b = sb[j++];
        if (cur_a.potential < cur_b.potential) {
            r.premise_broken = t;
            break;
        }
        ++r.checked;
        if (cur_a.served < cur_b.served) r.violations.push_back(t);
    }
    return r;
}

}  // namespace rdq
