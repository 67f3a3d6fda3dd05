#include "rdq/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace rdq {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

Job make_job(JobId id, Seconds arrival, Seconds service, Seconds deadline, Reward reward) {
    if (!std::isfinite(arrival)) throw std::invalid_argument("job arrival must be finite");
    if (!positive_finite(service)) throw std::invalid_argument("job service time must be > 0");
    if (!positive_finite(deadline)) throw std::invalid_argument("job deadline must be > 0");
    if (!positive_finite(reward)) throw std::invalid_argument("job reward must be > 0");
    Job job{id, arrival, service, deadline, reward, 0.0};
    job.expiry = expiry(job);
    return job;
}

void validate_stream(std::span<const Job> jobs) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& j = jobs[i];
        if (!positive_finite(j.service) || !positive_finite(j.deadline) || !positive_finite(j.reward))
            throw std::invalid_argument("job " + std::to_string(j.id) + " has a non-positive attribute");
        if (j.expiry != expiry(j))
            throw std::invalid_argument("job " + std::to_string(j.id) + " expiry != arrival + deadline");
        if (i > 0) {
            if (j.id <= jobs[i - 1].id) throw std::invalid_argument("job ids must strictly increase");
            if (j.arrival < jobs[i - 1].arrival)
                throw std::invalid_argument("job arrivals must be non-decreasing");
        }
    }
}

std::uint64_t stream_checksum(std::span<const Job> jobs) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const Job& j : jobs) {
        mix(j.id);
        mix(std::bit_cast<std::uint64_t>(j.arrival));
        mix(std::bit_cast<std::uint64_t>(j.service));
        mix(std::bit_cast<std::uint64_t>(j.deadline));
        mix(std::bit_cast<std::uint64_t>(j.reward));
    }
    return h;
}

void ScenarioBounds::validate() const {
    if (!(b_min > 0.0 && b_min <= b_max)) throw std::invalid_argument("bounds: need 0 < b_min <= b_max");
    if (!(d_min > 0.0 && d_min <= d_max)) throw std::invalid_argument("bounds: need 0 < d_min <= d_max");
    if (!(w_min > 0.0 && w_min <= w_max)) throw std::invalid_argument("bounds: need 0 < w_min <= w_max");
    if (delta_w && !(*delta_w > 0.0)) throw std::invalid_argument("bounds: delta_w must be > 0");
    if (a_delta && !(*a_delta < b_min)) throw std::invalid_argument("bounds: a_delta must be < b_min");
}

ScenarioBounds realized_bounds(std::span<const Job> jobs) {
    if (jobs.empty()) throw std::invalid_argument("realized_bounds: empty stream");
    ScenarioBounds b;
    constexpr double inf = std::numeric_limits<double>::infinity();
    b.b_min = b.d_min = b.w_min = inf;
    b.b_max = b.d_max = b.w_max = -inf;
    std::set<Reward> rewards;
    for (const Job& j : jobs) {
        b.b_min = std::min(b.b_min, j.service);
        b.b_max = std::max(b.b_max, j.service);
        b.d_min = std::min(b.d_min, j.deadline);
        b.d_max = std::max(b.d_max, j.deadline);
        b.w_min = std::min(b.w_min, j.reward);
        b.w_max = std::max(b.w_max, j.reward);
        rewards.insert(j.reward);
    }
    if (rewards.size() >= 2) {
        Reward gap = inf;
        for (auto it = std::next(rewards.begin()); it != rewards.end(); ++it)
            gap = std::min(gap, *it - *std::prev(it));
        b.delta_w = gap;
    }
    return b;
}

std::size_t queue_length_bound(Seconds d_max, Seconds b_min) {
    if (!(b_min > 0.0)) throw std::invalid_argument("queue_length_bound: b_min must be > 0");
    if (!std::isfinite(d_max) || d_max < 0.0)
        throw std::invalid_argument("queue_length_bound: d_max must be finite and >= 0");
    return static_cast<std::size_t>(std::ceil(d_max / b_min));
}

std::size_t queue_length_bound(const ScenarioBounds& bounds) {
    return queue_length_bound(bounds.d_max, bounds.b_min);
}

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::arrival: return "arrival";
        case EventKind::service_begin: return "service_begin";
        case EventKind::service_complete: return "service_complete";
        case EventKind::drop: return "drop";
        case EventKind::expiry_passed: return "expiry_passed";
    }
    return "?";
}

std::string_view to_string(QeClass qe) noexcept {
    switch (qe) {
        case QeClass::none: return "";
        case QeClass::qe1: return "QE1";
        case QeClass::qe2: return "QE2";
        case QeClass::qe3: return "QE3";
        case QeClass::qe4: return "QE4";
        case QeClass::qe5: return "QE5";
        case QeClass::qe6: return "QE6";
        case QeClass::qe7: return "QE7";
    }
    return "?";
}

QeClass classify_event(const QueueSnapshot& before, EventKind kind, const QueueSnapshot& after,
                       bool deterministic_service) {
    if (after.clock < before.clock) throw ClassificationError("event moves the clock backwards");

    switch (kind) {
        case EventKind::arrival: {
            if (!before.server_busy && before.waiting == 0) {
                if (!after.server_busy)
                    throw ClassificationError("arrival to an idle empty system was not served");
                return QeClass::qe1;
            }
            if (!before.potential || !after.potential) return QeClass::qe2;
            const auto grown = static_cast<long long>(*after.potential) -
                               static_cast<long long>(*before.potential);
            if (grown == 0) return QeClass::qe4;
            if (grown == 1) return QeClass::qe3;
            // With equal service times the scan after the new job realigns as
            // soon as one job drops out, so only 0 or +1 is possible.
            if (deterministic_service)
                throw ClassificationError("queue potential changed by " + std::to_string(grown) +
                                          " on one arrival under deterministic service");
            return grown > 0 ? QeClass::qe3 : QeClass::qe4;
        }
        case EventKind::service_begin:
            if (!after.server_busy) throw ClassificationError("service began but the server is idle");
            return QeClass::qe5;
        case EventKind::service_complete:
            if (!before.server_busy) throw ClassificationError("completion on an idle server");
            return QeClass::none;
        case EventKind::drop:
            if (after.waiting + 1 != before.waiting)
                throw ClassificationError("drop must remove exactly one waiting job");
            return QeClass::qe7;
        case EventKind::expiry_passed:
            if (after.waiting != before.waiting)
                throw ClassificationError("an expiry does not change the waiting set");
            return QeClass::qe6;
    }
    throw ClassificationError("unknown event kind");
}

}  // namespace rdq
