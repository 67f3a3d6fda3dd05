#include "doctest.h"

#include <algorithm>
#include <vector>

#include "rdq/engine.hpp"
#include "rdq/suites.hpp"
#include "rdq/workload.hpp"

using namespace rdq;

namespace {

SimulationTrace run(std::span<const Job> jobs, std::string_view policy, const EngineOptions& opt = {}) {
    auto p = make_policy(policy, RewardClassMap::for_jobs(jobs));
    return run_simulation(jobs, *p, opt);
}

std::vector<JobId> served_ids(const SimulationTrace& t) {
    std::vector<JobId> out;
    for (const ServiceStart& s : t.schedule) out.push_back(s.id);
    return out;
}

// A short blocker occupies the server so that the long job (expiry 11,
// service 30) and the short job (expiry 21, service 5) meet in the queue at
// t = 1.
std::vector<Job> swap_pair() {
    return {make_job(1, 0.0, 1.0, 5.0, 1.0), make_job(2, 0.1, 30.0, 10.9, 4.0), make_job(3, 0.2, 5.0, 20.8, 10.0)};
}

}  // namespace

TEST_CASE("single job") {
    const std::vector<Job> jobs{make_job(1, 2.0, 1.5, 3.0, 7.0)};
    const SimulationTrace t = run(jobs, "edf");
    CHECK(t.served_count == 1);
    CHECK(t.dropped_count == 0);
    CHECK(t.total_reward == 7.0);
    REQUIRE(t.epochs.size() == 1);
    CHECK(t.epochs[0].time == 3.5);
    CHECK(t.epochs[0].reward == 7.0);
    REQUIRE(t.events.size() == 3);
    CHECK(t.events[0].kind == EventKind::arrival);
    CHECK(t.events[0].qe_class == QeClass::qe1);
    CHECK(t.events[1].kind == EventKind::service_begin);
    CHECK(t.events[2].kind == EventKind::service_complete);
    CHECK(t.events[2].time == 3.5);
}

TEST_CASE("empty stream") {
    const SimulationTrace t = run(std::vector<Job>{}, "edf");
    CHECK(t.arrivals == 0);
    CHECK(t.epochs.empty());
    CHECK(t.total_reward == 0.0);
}

TEST_CASE("edf loses the short job, medf serves both") {
    const auto jobs = swap_pair();
    const SimulationTrace edf = run(jobs, "edf");
    CHECK(served_ids(edf) == std::vector<JobId>{1, 2});
    CHECK(edf.dropped_count == 1);
    CHECK(edf.total_reward == 5.0);

    const SimulationTrace medf = run(jobs, "medf");
    CHECK(served_ids(medf) == std::vector<JobId>{1, 3, 2});
    CHECK(medf.schedule[2].start == 6.0);
    CHECK(medf.total_reward == 15.0);
}

TEST_CASE("queue potential") {
    std::vector<Job> q{make_job(1, 0, 1, 1, 1), make_job(2, 0, 1, 2, 1), make_job(3, 0, 1, 3, 1)};
    CHECK(compute_queue_potential(q, 0.0, 0.0) == std::vector<JobId>{1, 2, 3});

    // Long job first in expiry order: the short one no longer fits.
    std::vector<Job> pair{make_job(1, 0, 30, 10, 4), make_job(2, 0, 5, 20, 10)};
    CHECK(compute_queue_potential(pair, 0.0, 0.0) == std::vector<JobId>{1});
    // Excluded jobs do not advance the simulated clock.
    std::vector<Job> skip{make_job(1, 0, 2, 0.5, 1), make_job(2, 0, 1, 1.5, 1)};
    CHECK(compute_queue_potential(skip, 0.0, 1.0) == std::vector<JobId>{2});
    CHECK(compute_queue_potential(std::vector<Job>{}, 0.0, 0.0).empty());
}

TEST_CASE("mud never holds an infeasible job") {
    const auto jobs = generate_stream(unit_service_spec(400, 11));
    const SimulationTrace t = run(jobs, "mud");
    // MUD keeps its waiting room feasible, so every drop happens at an
    // admission: right after an arrival (or another admission drop).
    std::size_t drops = 0;
    for (std::size_t k = 0; k < t.events.size(); ++k) {
        if (t.events[k].kind != EventKind::drop) continue;
        ++drops;
        REQUIRE(k > 0);
        const EventRecord& prev = t.events[k - 1];
        CHECK((prev.kind == EventKind::arrival || prev.kind == EventKind::drop));
        CHECK(prev.time == t.events[k].time);
        CHECK(t.events[k].qe_class == QeClass::qe7);
    }
    CHECK(drops > 0);
}

TEST_CASE("trace records") {
    const auto jobs = generate_stream(mmb_preset(1.8, 2000, 4));
    for (const auto& name : policy_names()) {
        CAPTURE(name);
        const SimulationTrace t = run(jobs, name);
        CHECK(t.arrivals == jobs.size());
        CHECK(t.arrivals == t.served_count + t.dropped_count);
        CHECK(std::is_sorted(t.events.begin(), t.events.end(),
                             [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; }));

        // Recount from the event log.
        std::size_t arrivals = 0, begins = 0, drops = 0;
        double reward = 0.0;
        for (const EventRecord& e : t.events) {
            if (e.kind == EventKind::arrival) ++arrivals;
            if (e.kind == EventKind::service_begin) ++begins;
            if (e.kind == EventKind::drop) ++drops;
            if (e.kind == EventKind::arrival || e.kind == EventKind::service_begin || e.kind == EventKind::drop)
                CHECK(e.qe_class != QeClass::none);
        }
        for (JobId id : served_ids(t)) reward += jobs[id - 1].reward;
        CHECK(arrivals == t.arrivals);
        CHECK(begins == t.served_count);
        CHECK(drops == t.dropped_count);
        CHECK(reward == doctest::Approx(t.total_reward));
        CHECK(t.max_potential <= t.queue_bound);
        CHECK(t.events.back().cumulative_reward == doctest::Approx(t.total_reward));

        for (std::size_t k = 1; k < t.epochs.size(); ++k) CHECK(t.epochs[k].time > t.epochs[k - 1].time);
        CHECK(t == run(jobs, name));
    }
}

TEST_CASE("metrics-only runs agree with traced runs") {
    const auto jobs = generate_stream(mmb_preset(2.1, 3000, 8));
    for (const auto& name : policy_names()) {
        const SimulationTrace full = run(jobs, name);
        const SimulationTrace lean = run(jobs, name, {.record_trace = false, .track_potential = false});
        CHECK(lean.events.empty());
        CHECK(lean.schedule == full.schedule);
        CHECK(lean.epochs == full.epochs);
        CHECK(lean.total_reward == full.total_reward);
    }
}

TEST_CASE("epochs") {
    const auto one = generate_stream(mmb_preset(2.1, 5000, 2));
    CHECK_FALSE(run(one, "edf").epochs.empty());
    CHECK(empty_queue_epochs(run(one, "edf")).size() == run(one, "edf").epochs.size());

    const auto adv = adversarial_mud_stream(adversarial_bounds(), 1.0, 7);
    CHECK(run(adv, "edf").epochs.size() == 7);
    CHECK(run(adv, "mud").epochs.size() == 7);
}

TEST_CASE("comparisons") {
    SUBCASE("a policy against itself") {
        const auto jobs = generate_stream(mmb_preset(1.5, 2000, 3));
        const auto r = compare_traces(run(jobs, "greedy"), run(jobs, "greedy"));
        CHECK(r.equivalent);
        CHECK(r.as_good_as);
        CHECK_FALSE(r.better);
    }
    SUBCASE("mud and edf coincide with unit service and constant reward") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto jobs = generate_stream(unit_deadline_spec(1000, seed, false));
            const auto r = compare_traces(run(jobs, "mud"), run(jobs, "edf"));
            CHECK(r.equivalent);
        }
    }
    SUBCASE("adversarial stream: one exchange per repeat") {
        const auto jobs = adversarial_mud_stream(adversarial_bounds(), 1.0, 50);
        const auto r = compare_traces(run(jobs, "mud"), run(jobs, "edf"));
        CHECK(r.final_delta == 300.0);
        CHECK(r.min_delta == 6.0);
        CHECK(r.as_good_as);
        CHECK(r.better);
        CHECK(r.trend_slope == doctest::Approx(6.0));
    }
    SUBCASE("one repeat already separates the two") {
        const auto jobs = adversarial_mud_stream(adversarial_bounds(), 1.0, 1);
        const auto r = compare_traces(run(jobs, "mud"), run(jobs, "edf"));
        CHECK(r.final_delta >= 6.0);
    }
    SUBCASE("different streams cannot be compared") {
        const auto a = generate_stream(mmb_preset(1.5, 100, 1));
        const auto b = generate_stream(mmb_preset(1.5, 100, 2));
        CHECK_THROWS_AS(compare_traces(run(a, "edf"), run(b, "edf")), std::invalid_argument);
    }
}

TEST_CASE("with a short-deadline low-value job, mud can trail edf") {
    // The head swap serves the 10-reward job first; a later tight arrival
    // then forces a drop that EDF avoids.
    const std::vector<Job> jobs{make_job(1, 0.0, 1, 100, 4), make_job(2, 0.1, 1, 2.4, 4),
                                make_job(3, 0.2, 1, 4.8, 10), make_job(4, 1.5, 1, 0.7, 4)};
    const SimulationTrace mud = run(jobs, "mud");
    const SimulationTrace edf = run(jobs, "edf");
    CHECK(mud.total_reward == 18.0);
    CHECK(edf.total_reward == 22.0);
    const auto r = compare_traces(mud, edf);
    CHECK_FALSE(r.as_good_as);
    CHECK(r.final_delta == -4.0);
}

namespace {

class FaultyPolicy final : public SingleQueuePolicy {
public:
    enum class Fault { idle, unknown_job, expired_job };
    explicit FaultyPolicy(Fault f) : SingleQueuePolicy("faulty", QueueOrder::earliest_expiry, &edf_select), f_(f) {}
    ServiceDecision select(Seconds now) override {
        if (queue_.empty()) return ServiceDecision::idle();
        switch (f_) {
            case Fault::idle: return ServiceDecision::idle();
            case Fault::unknown_job: return ServiceDecision::serve(999);
            case Fault::expired_job: return ServiceDecision::serve(queue_.erase_at(0).id);
        }
        return edf_select(queue_, now);
    }

private:
    Fault f_;
};

}  // namespace

TEST_CASE("contract violations") {
    const std::vector<Job> jobs{make_job(1, 0, 2, 5, 1), make_job(2, 0.5, 1, 0.5, 1), make_job(3, 1.0, 1, 5, 1)};
    FaultyPolicy idle(FaultyPolicy::Fault::idle);
    CHECK_THROWS_AS(run_simulation(jobs, idle), ContractViolation);
    FaultyPolicy unknown(FaultyPolicy::Fault::unknown_job);
    CHECK_THROWS_AS(run_simulation(jobs, unknown), ContractViolation);
    FaultyPolicy expired(FaultyPolicy::Fault::expired_job);
    CHECK_THROWS_AS(run_simulation(jobs, expired), ContractViolation);

    std::vector<Job> unordered{make_job(2, 0, 1, 1, 1), make_job(1, 1, 1, 1, 1)};
    auto edf = make_policy("edf");
    CHECK_THROWS_AS(run_simulation(unordered, *edf), std::invalid_argument);
}
