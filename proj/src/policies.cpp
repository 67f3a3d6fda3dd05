#include "rdq/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <variant>

#include "rdq/workload.hpp"

namespace rdq {

// ---------------------------------------------------------------------------
// OrderedQueue

bool OrderedQueue::before(const Job& a, const Job& b) const noexcept {
    switch (order_) {
        case QueueOrder::earliest_expiry:
            return std::tie(a.expiry, a.id) < std::tie(b.expiry, b.id);
        case QueueOrder::earliest_expiry_high_reward:
            if (a.expiry != b.expiry) return a.expiry < b.expiry;
            if (a.reward != b.reward) return a.reward > b.reward;
            return a.id < b.id;
        case QueueOrder::arrival:
            return a.id < b.id;
        case QueueOrder::highest_reward:
            if (a.reward != b.reward) return a.reward > b.reward;
            return std::tie(a.expiry, a.id) < std::tie(b.expiry, b.id);
    }
    return false;
}

std::size_t OrderedQueue::insert(const Job& job) {
    if (!members_.insert(job.id).second) throw std::invalid_argument("job already queued");
    auto it = std::upper_bound(jobs_.begin(), jobs_.end(), job,
                               [this](const Job& a, const Job& b) { return before(a, b); });
    const auto rank = static_cast<std::size_t>(it - jobs_.begin());
    jobs_.insert(it, job);
    expiry_heap_.emplace(job.expiry, job.id);
    return rank;
}

bool OrderedQueue::erase(JobId id) {
    if (!members_.contains(id)) return false;
    auto it = std::find_if(jobs_.begin(), jobs_.end(), [id](const Job& j) { return j.id == id; });
    jobs_.erase(it);
    members_.erase(id);
    return true;
}

Job OrderedQueue::erase_at(std::size_t rank) {
    Job job = jobs_.at(rank);
    jobs_.erase(jobs_.begin() + static_cast<std::ptrdiff_t>(rank));
    members_.erase(job.id);
    return job;
}

std::optional<Job> OrderedQueue::peek_expired(Seconds now) const {
    while (!expiry_heap_.empty() && !members_.contains(expiry_heap_.top().second)) expiry_heap_.pop();
    if (expiry_heap_.empty() || !(expiry_heap_.top().first < now)) return std::nullopt;
    const JobId id = expiry_heap_.top().second;
    auto it = std::find_if(jobs_.begin(), jobs_.end(), [id](const Job& j) { return j.id == id; });
    return *it;
}

std::vector<QueueOffset> queue_offsets(const OrderedQueue& queue) {
    std::vector<QueueOffset> out;
    out.reserve(queue.size());
    Seconds wait = 0.0;
    std::size_t rank = 1;
    for (const Job& j : queue) {
        out.push_back({j.id, rank++, wait});
        wait += j.service;
    }
    return out;
}

// ---------------------------------------------------------------------------
// select procedures

namespace {

ServiceDecision take(OrderedQueue& q, std::size_t rank, ServiceDecision::Kind kind) {
    const Job j = q.erase_at(rank);
    return {kind, j.id};
}

// Two-head rule shared by MEDF and MUD: `prefer_second(head, second)` decides
// whether the second job goes first.
template <class Pred>
ServiceDecision two_head_select(OrderedQueue& q, Seconds now, Pred prefer_second) {
    if (q.empty()) return ServiceDecision::idle();
    const Job& head = q[0];
    if (is_expired(head, now)) return take(q, 0, ServiceDecision::Kind::drop);
    if (q.size() >= 2) {
        const Job& second = q[1];
        if (head.expiry >= now + second.service && prefer_second(head, second))
            return take(q, 1, ServiceDecision::Kind::serve);
    }
    return take(q, 0, ServiceDecision::Kind::serve);
}

ServiceDecision drop_expired_or_serve_front(OrderedQueue& q, Seconds now) {
    if (q.empty()) return ServiceDecision::idle();
    if (auto expired = q.peek_expired(now)) {
        q.erase(expired->id);
        return ServiceDecision::drop(expired->id);
    }
    return take(q, 0, ServiceDecision::Kind::serve);
}

}  // namespace

ServiceDecision edf_select(OrderedQueue& queue, Seconds now) {
    if (queue.empty()) return ServiceDecision::idle();
    if (is_expired(queue.front(), now)) return take(queue, 0, ServiceDecision::Kind::drop);
    return take(queue, 0, ServiceDecision::Kind::serve);
}

ServiceDecision medf_select(OrderedQueue& queue, Seconds now) {
    return two_head_select(queue, now, [now](const Job& head, const Job& second) {
        return second.expiry < now + head.service;
    });
}

ServiceDecision mud_select(OrderedQueue& queue, Seconds now) {
    return two_head_select(queue, now,
                           [](const Job& head, const Job& second) { return head.ratio() < second.ratio(); });
}

ServiceDecision greedy_select(OrderedQueue& queue, Seconds now) { return drop_expired_or_serve_front(queue, now); }

ServiceDecision fcfs_select(OrderedQueue& queue, Seconds now) { return drop_expired_or_serve_front(queue, now); }

ArrivalDecision mud_admit(OrderedQueue& queue, const Job& job, Seconds now, Seconds residual) {
    ArrivalDecision decision;
    queue.insert(job);
    for (;;) {
        // First rank whose simulated start passes its expiry.
        Seconds start = now + residual;
        std::size_t first_late = queue.size();
        for (std::size_t r = 0; r < queue.size(); ++r) {
            if (queue[r].expiry < start) {
                first_late = r;
                break;
            }
            start += queue[r].service;
        }
        if (first_late == queue.size()) break;

        std::size_t victim = 0;
        for (std::size_t r = 1; r <= first_late; ++r) {
            const Job& cand = queue[r];
            const Job& best = queue[victim];
            if (cand.ratio() < best.ratio() || (cand.ratio() == best.ratio() && cand.expiry < best.expiry))
                victim = r;
        }
        decision.dropped.push_back(queue.erase_at(victim).id);
    }

    const bool kept = queue.contains(job.id);
    decision.kind = kept ? ArrivalDecision::Kind::accepted : ArrivalDecision::Kind::rejected;
    if (kept) {
        auto it = std::find_if(queue.begin(), queue.end(), [&](const Job& j) { return j.id == job.id; });
        decision.position = static_cast<std::size_t>(it - queue.begin());
    }
    return decision;
}

// ---------------------------------------------------------------------------
// c mu / theta

RewardClassMap RewardClassMap::exact(std::vector<double> values, std::vector<RewardClass> classes) {
    if (values.empty() || values.size() != classes.size())
        throw std::invalid_argument("reward classes: values and coefficients must match");
    RewardClassMap m;
    m.exact_ = true;
    m.keys_ = std::move(values);
    m.classes_ = std::move(classes);
    return m;
}

RewardClassMap RewardClassMap::buckets(std::vector<double> lowers, std::vector<RewardClass> classes) {
    if (lowers.empty() || lowers.size() != classes.size())
        throw std::invalid_argument("reward classes: bucket bounds and coefficients must match");
    if (!std::is_sorted(lowers.begin(), lowers.end()))
        throw std::invalid_argument("reward classes: bucket bounds must be ascending");
    RewardClassMap m;
    m.exact_ = false;
    m.keys_ = std::move(lowers);
    m.classes_ = std::move(classes);
    return m;
}

RewardClassMap RewardClassMap::for_jobs(std::span<const Job> jobs) {
    if (jobs.empty()) return exact({1.0}, {RewardClass{}});
    std::set<double> rewards;
    double b = 0.0, d = 0.0;
    for (const Job& j : jobs) {
        rewards.insert(j.reward);
        b += j.service;
        d += j.deadline;
    }
    const double n = static_cast<double>(jobs.size());
    std::vector<double> values(rewards.begin(), rewards.end());
    std::vector<RewardClass> classes;
    for (double w : values) classes.push_back({w, n / b, n / d});
    return exact(std::move(values), std::move(classes));
}

RewardClassMap RewardClassMap::for_scenario(const ScenarioSpec& spec) {
    const double mu = 1.0 / mean(spec.service);
    const double theta = 1.0 / mean(spec.deadline);

    if (auto pts = support_points(spec.reward)) {
        std::vector<RewardClass> classes;
        for (double v : *pts) classes.push_back({v, mu, theta});
        return exact(*pts, std::move(classes));
    }

    const std::size_t k = spec.cmu_classes;
    std::vector<double> lowers;
    std::vector<RewardClass> classes;
    if (const auto* e = std::get_if<Exponential>(&spec.reward)) {
        const double rate = e->rate;
        auto quantile = [&](std::size_t i) {
            return i == k ? std::numeric_limits<double>::infinity()
                          : -std::log1p(-static_cast<double>(i) / static_cast<double>(k)) / rate;
        };
        for (std::size_t i = 0; i < k; ++i) {
            const double a = quantile(i);
            const double b = quantile(i + 1);
            double m = a + 1.0 / rate;  // memoryless tail
            if (std::isfinite(b)) {
                const double ea = std::exp(-rate * a);
                const double eb = std::exp(-rate * b);
                m = (a * ea - b * eb) / (ea - eb) + 1.0 / rate;
            }
            lowers.push_back(i == 0 ? 0.0 : a);
            classes.push_back({m, mu, theta});
        }
    } else if (const auto* u = std::get_if<Uniform>(&spec.reward)) {
        const double width = (u->hi - u->lo) / static_cast<double>(k);
        for (std::size_t i = 0; i < k; ++i) {
            lowers.push_back(i == 0 ? 0.0 : u->lo + width * static_cast<double>(i));
            classes.push_back({u->lo + width * (static_cast<double>(i) + 0.5), mu, theta});
        }
    } else {
        throw std::invalid_argument("reward classes: unsupported reward law");
    }
    return buckets(std::move(lowers), std::move(classes));
}

std::size_t RewardClassMap::class_of(Reward reward) const {
    if (exact_) {
        auto it = std::find(keys_.begin(), keys_.end(), reward);
        if (it == keys_.end()) throw std::out_of_range("no c-mu-theta class for reward " + std::to_string(reward));
        return static_cast<std::size_t>(it - keys_.begin());
    }
    auto it = std::upper_bound(keys_.begin(), keys_.end(), reward);
    if (it == keys_.begin()) throw std::out_of_range("no c-mu-theta class for reward " + std::to_string(reward));
    return static_cast<std::size_t>(it - keys_.begin()) - 1;
}

namespace {

// Classes in service priority: larger index, then larger c, then lower k.
std::vector<std::size_t> priority_order(const std::vector<RewardClass>& coefficients, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const RewardClass& ca = coefficients[a];
        const RewardClass& cb = coefficients[b];
        if (ca.index() != cb.index()) return ca.index() > cb.index();
        if (ca.c != cb.c) return ca.c > cb.c;
        return a < b;
    });
    return order;
}

}  // namespace

ServiceDecision cmu_theta_select(std::vector<OrderedQueue>& class_queues, const std::vector<RewardClass>& coefficients,
                                 Seconds now) {
    if (coefficients.size() < class_queues.size())
        throw std::invalid_argument("cmu_theta_select: missing coefficients for a class");
    for (OrderedQueue& q : class_queues) {
        if (auto expired = q.peek_expired(now)) {
            q.erase(expired->id);
            return ServiceDecision::drop(expired->id);
        }
    }
    for (std::size_t k : priority_order(coefficients, class_queues.size())) {
        OrderedQueue& q = class_queues[k];
        if (q.empty()) continue;
        return take(q, 0, ServiceDecision::Kind::serve);
    }
    return ServiceDecision::idle();
}

CmuThetaPolicy::CmuThetaPolicy(RewardClassMap classes, QueueOrder intra)
    : classes_(std::move(classes)), intra_(intra) {
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        queues_.emplace_back(intra_);
        coefficients_.push_back(classes_.coefficients(k));
    }
    visit_order_ = priority_order(coefficients_, queues_.size());
}

std::string_view CmuThetaPolicy::name() const {
    return intra_ == QueueOrder::arrival ? "cmutheta" : "cmutheta_edf";
}

ServiceDecision CmuThetaPolicy::select(Seconds now) {
    ServiceDecision d = cmu_theta_select(queues_, coefficients_, now);
    if (d.kind != ServiceDecision::Kind::idle) --total_;
    return d;
}

void CmuThetaPolicy::for_each_waiting(const std::function<void(const Job&)>& visit) const {
    for (std::size_t k : visit_order_)
        for (const Job& j : queues_[k]) visit(j);
}

std::unique_ptr<Policy> CmuThetaPolicy::fresh() const { return std::make_unique<CmuThetaPolicy>(classes_, intra_); }

ArrivalDecision CmuThetaPolicy::admit(const Job& job, Seconds, Seconds) {
    const std::size_t k = classes_.class_of(job.reward);
    queues_[k].insert(job);
    ++total_;
    return {ArrivalDecision::Kind::accepted, 0, {}};
}

// ---------------------------------------------------------------------------
// Policy plumbing

ArrivalDecision Policy::on_arrival(const Job& job, Seconds now, Seconds residual, bool server_idle) {
    if (server_idle && size() == 0) return ArrivalDecision::serve_now();
    return admit(job, now, residual);
}

void SingleQueuePolicy::for_each_waiting(const std::function<void(const Job&)>& visit) const {
    for (const Job& j : queue_) visit(j);
}

std::unique_ptr<Policy> SingleQueuePolicy::fresh() const {
    return std::make_unique<SingleQueuePolicy>(name_, queue_.order(), selector_);
}

ArrivalDecision SingleQueuePolicy::admit(const Job& job, Seconds, Seconds) {
    return {ArrivalDecision::Kind::accepted, queue_.insert(job), {}};
}

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{"edf", "medf", "mud", "cmutheta", "cmutheta_edf", "greedy", "fcfs"};
    return names;
}

std::unique_ptr<Policy> make_policy(std::string_view name, const std::optional<RewardClassMap>& classes) {
    if (name == "edf") return std::make_unique<SingleQueuePolicy>("edf", QueueOrder::earliest_expiry, &edf_select);
    if (name == "medf") return std::make_unique<SingleQueuePolicy>("medf", QueueOrder::earliest_expiry, &medf_select);
    if (name == "mud") return std::make_unique<MudPolicy>();
    if (name == "greedy")
        return std::make_unique<SingleQueuePolicy>("greedy", QueueOrder::highest_reward, &greedy_select);
    if (name == "fcfs") return std::make_unique<SingleQueuePolicy>("fcfs", QueueOrder::arrival, &fcfs_select);
    if (name == "cmutheta" || name == "cmutheta_edf") {
        if (!classes) throw std::invalid_argument("c-mu-theta policies need reward classes");
        return std::make_unique<CmuThetaPolicy>(*classes, name == "cmutheta" ? QueueOrder::arrival
                                                                             : QueueOrder::earliest_expiry);
    }
    std::string valid;
    for (const auto& n : policy_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw UnknownPolicy("unknown policy '" + std::string(name) + "' (valid: " + valid + ")");
}

}  // namespace rdq
