#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

namespace rdq {

using JobId = std::uint64_t;
using Seconds = double;
using Reward = double;

/// One unit of work. Deadlines are relative and measured to the *beginning*
/// of service: a job may start exactly at its expiry but not after it.
struct Job {
    JobId id = 0;
    Seconds arrival = 0.0;
    Seconds service = 0.0;
    Seconds deadline = 0.0;
    Reward reward = 0.0;
    Seconds expiry = 0.0;

    /// Reward per unit of service time.
    double ratio() const noexcept { return reward / service; }

    bool operator==(const Job&) const = default;
};

/// Builds a job and derives its expiry. Throws std::invalid_argument unless
/// service, deadline and reward are strictly positive and finite.
Job make_job(JobId id, Seconds arrival, Seconds service, Seconds deadline, Reward reward);

inline Seconds expiry(const Job& job) noexcept { return job.arrival + job.deadline; }

/// Strict: a job whose expiry equals `now` can still begin service.
inline bool is_expired(const Job& job, Seconds now) noexcept { return job.expiry < now; }

/// Checks ids strictly increase, arrivals are non-decreasing, and every job
/// is well formed. Throws std::invalid_argument on the first offence.
void validate_stream(std::span<const Job> jobs);

/// FNV-1a over ids and the bit patterns of every attribute.
std::uint64_t stream_checksum(std::span<const Job> jobs) noexcept;

struct ScenarioBounds {
    Seconds b_min = 1.0;
    Seconds b_max = 1.0;
    Seconds d_min = 1.0;
    Seconds d_max = 1.0;
    Reward w_min = 1.0;
    Reward w_max = 1.0;
    std::optional<Reward> delta_w;   // minimal gap between distinct rewards
    std::optional<Seconds> a_delta;  // b_min - delta of the adversarial stream

    void validate() const;
    /// d_min > 2 b_max: the head swap can never cascade into later misses.
    bool guards_priority_inversion() const noexcept { return d_min > 2.0 * b_max; }
};

/// Bounds realised by a concrete stream. delta_w is set when there are at
/// least two distinct rewards. Throws on an empty stream.
ScenarioBounds realized_bounds(std::span<const Job> jobs);

/// ceil(d_max / b_min): no queue potential can hold more jobs than this.
std::size_t queue_length_bound(Seconds d_max, Seconds b_min);
std::size_t queue_length_bound(const ScenarioBounds& bounds);

enum class EventKind { arrival, service_begin, service_complete, drop, expiry_passed };

enum class QeClass { none, qe1, qe2, qe3, qe4, qe5, qe6, qe7 };

std::string_view to_string(EventKind kind) noexcept;
std::string_view to_string(QeClass qe) noexcept;

struct EventRecord {
    Seconds time = 0.0;
    EventKind kind = EventKind::arrival;
    JobId job_id = 0;
    QeClass qe_class = QeClass::none;
    std::size_t queue_potential = 0;
    Reward cumulative_reward = 0.0;

    bool operator==(const EventRecord&) const = default;
};

/// What the classifier needs to know about the system on either side of an
/// event. `potential` is empty when the engine is not tracking it.
struct QueueSnapshot {
    Seconds clock = 0.0;
    bool server_busy = false;
    std::size_t waiting = 0;
    std::optional<std::size_t> potential;
};

class ClassificationError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Assigns the queue-event class of one engine event.
///
/// Arrivals to an idle, empty system are QE1. Other arrivals are QE3 when the
/// queue potential grows by one and QE4 when it keeps its size (the new job,
/// or another one, is displaced). Without potential information the union tag
/// QE2 is returned. With deterministic service any other change is impossible
/// and raises ClassificationError; with variable service a larger gain is
/// tagged QE3 and a loss QE4.
QeClass classify_event(const QueueSnapshot& before, EventKind kind, const QueueSnapshot& after,
                       bool deterministic_service);

}  // namespace rdq
