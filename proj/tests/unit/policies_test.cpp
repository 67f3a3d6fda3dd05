#include "doctest.h"

#include <vector>

#include "rdq/policies.hpp"
#include "rdq/workload.hpp"

using namespace rdq;

namespace {

Job job(JobId id, Seconds expiry, Seconds service, Reward reward = 1.0, Seconds arrival = 0.0) {
    return make_job(id, arrival, service, expiry - arrival, reward);
}

OrderedQueue queue_of(QueueOrder order, std::initializer_list<Job> jobs) {
    OrderedQueue q(order);
    for (const Job& j : jobs) q.insert(j);
    return q;
}

std::vector<JobId> ids(const OrderedQueue& q) {
    std::vector<JobId> out;
    for (const Job& j : q) out.push_back(j.id);
    return out;
}

}  // namespace

TEST_CASE("queue orders") {
    SUBCASE("expiry, then higher reward") {
        auto q = queue_of(QueueOrder::earliest_expiry_high_reward,
                          {job(1, 5, 1, 4), job(2, 3, 1, 4), job(3, 5, 1, 10), job(4, 9, 1, 1)});
        CHECK(ids(q) == std::vector<JobId>{2, 3, 1, 4});
    }
    SUBCASE("plain expiry keeps id order on ties") {
        auto q = queue_of(QueueOrder::earliest_expiry, {job(1, 5, 1, 4), job(2, 5, 1, 10), job(3, 1, 1)});
        CHECK(ids(q) == std::vector<JobId>{3, 1, 2});
    }
    SUBCASE("highest reward, then expiry") {
        auto q = queue_of(QueueOrder::highest_reward, {job(1, 5, 1, 4), job(2, 9, 1, 10), job(3, 7, 1, 10)});
        CHECK(ids(q) == std::vector<JobId>{3, 2, 1});
    }
    SUBCASE("arrival") {
        auto q = queue_of(QueueOrder::arrival, {job(3, 1, 1), job(1, 9, 1), job(2, 5, 1)});
        CHECK(ids(q) == std::vector<JobId>{1, 2, 3});
    }
}

TEST_CASE("ordered queue bookkeeping") {
    OrderedQueue q(QueueOrder::earliest_expiry);
    CHECK(q.insert(job(1, 5, 1)) == 0);
    CHECK(q.insert(job(2, 3, 1)) == 0);
    CHECK(q.insert(job(3, 4, 1)) == 1);
    CHECK(q.contains(3));
    CHECK(q.erase(3));
    CHECK_FALSE(q.erase(3));
    CHECK_FALSE(q.contains(3));
    CHECK(q.peek_expired(3.0) == std::nullopt);
    REQUIRE(q.peek_expired(3.5));
    CHECK(q.peek_expired(3.5)->id == 2);
    q.erase(2);
    CHECK_FALSE(q.peek_expired(3.5));  // stale heap entry skipped
    CHECK(q.size() == 1);
}

TEST_CASE("queue offsets") {
    CHECK(queue_offsets(OrderedQueue{}).empty());

    auto single = queue_of(QueueOrder::earliest_expiry, {job(1, 5, 4)});
    const auto one = queue_offsets(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0].rank == 1);
    CHECK(one[0].wait == 0.0);

    auto q = queue_of(QueueOrder::earliest_expiry, {job(1, 10, 2), job(2, 20, 3), job(3, 30, 5)});
    const auto off = queue_offsets(q);
    REQUIRE(off.size() == 3);
    CHECK(off[0].wait == 0.0);
    CHECK(off[1].wait == 2.0);
    CHECK(off[2].wait == 5.0);
    CHECK(off[2].rank == 3);
    CHECK(off[2].id == 3);
}

TEST_CASE("edf decisions") {
    auto q = queue_of(QueueOrder::earliest_expiry, {job(1, 5, 1), job(2, 3, 1)});
    CHECK(edf_select(q, 0.0) == ServiceDecision::serve(2));

    q = queue_of(QueueOrder::earliest_expiry, {job(1, 1, 1)});
    CHECK(edf_select(q, 2.0) == ServiceDecision::drop(1));
    CHECK(edf_select(q, 2.0) == ServiceDecision::idle());

    q = queue_of(QueueOrder::earliest_expiry, {job(1, 1, 1), job(2, 9, 1)});
    CHECK(edf_select(q, 2.0) == ServiceDecision::drop(1));
    CHECK(edf_select(q, 2.0) == ServiceDecision::serve(2));
}

TEST_CASE("medf swaps when it saves the second job") {
    // Long head expiring at 10, short second job expiring at 20.
    auto q = queue_of(QueueOrder::earliest_expiry, {job(1, 10, 30), job(2, 20, 5)});
    CHECK(medf_select(q, 0.0) == ServiceDecision::serve(2));
    CHECK(medf_select(q, 5.0) == ServiceDecision::serve(1));  // 5 <= 10: still on time

    q = queue_of(QueueOrder::earliest_expiry, {job(1, 4, 1)});
    CHECK(medf_select(q, 0.0) == ServiceDecision::serve(1));

    // Serving the head first already saves both.
    q = queue_of(QueueOrder::earliest_expiry, {job(1, 10, 2), job(2, 11, 2)});
    CHECK(medf_select(q, 0.0) == ServiceDecision::serve(1));

    // Swap would lose the head.
    q = queue_of(QueueOrder::earliest_expiry, {job(1, 3, 30), job(2, 20, 5)});
    CHECK(medf_select(q, 0.0) == ServiceDecision::serve(1));
}

TEST_CASE("mud service rule") {
    auto q = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 5, 2, 4), job(2, 6, 3, 9)});
    CHECK(mud_select(q, 0.0) == ServiceDecision::serve(2));  // 5 >= 3 and 2 < 3

    q = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 1, 1, 4), job(2, 6, 1, 9)});
    CHECK(mud_select(q, 2.0) == ServiceDecision::drop(1));

    q = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 5, 2, 4), job(2, 6, 1, 2)});
    CHECK(mud_select(q, 0.0) == ServiceDecision::serve(1));  // equal ratios

    q = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 2, 2, 4), job(2, 6, 3, 9)});
    CHECK(mud_select(q, 0.0) == ServiceDecision::serve(1));  // swap would lose the head

    q = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 5, 2, 4)});
    CHECK(mud_select(q, 0.0) == ServiceDecision::serve(1));
}

TEST_CASE("mud admission drops the lowest ratio up to the first late job") {
    auto q = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 2.0, 1, 4), job(2, 2.8, 1, 10)});
    const ArrivalDecision d = mud_admit(q, job(3, 2.5, 1, 10), 0.0, 1.0);
    CHECK(d.kind == ArrivalDecision::Kind::accepted);
    CHECK(d.dropped == std::vector<JobId>{1});
    CHECK(ids(q) == std::vector<JobId>{3, 2});
    CHECK(d.position == 0);

    SUBCASE("all feasible: plain insertion") {
        auto r = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 5, 1, 4)});
        const ArrivalDecision e = mud_admit(r, job(2, 9, 1, 4), 0.0, 1.0);
        CHECK(e.kind == ArrivalDecision::Kind::accepted);
        CHECK(e.dropped.empty());
        CHECK(r.size() == 2);
        CHECK(e.position == 1);
    }
    SUBCASE("the arrival itself can be the victim") {
        auto r = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 2, 1, 10)});
        const ArrivalDecision e = mud_admit(r, job(2, 2, 1, 4), 0.0, 1.5);
        CHECK(e.kind == ArrivalDecision::Kind::rejected);
        CHECK(e.dropped == std::vector<JobId>{2});
        CHECK(ids(r) == std::vector<JobId>{1});
    }
    SUBCASE("ratio ties go to the earlier expiry") {
        auto r = queue_of(QueueOrder::earliest_expiry_high_reward, {job(1, 1.5, 1, 4), job(2, 2, 1, 4)});
        const ArrivalDecision e = mud_admit(r, job(3, 2.2, 1, 4), 0.0, 0.5);
        CHECK(e.dropped == std::vector<JobId>{1});
    }
}

TEST_CASE("mud admission leaves a feasible queue (random queues)") {
    Rng rng(2024);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform_open(); };
    for (int trial = 0; trial < 2000; ++trial) {
        OrderedQueue q(QueueOrder::earliest_expiry_high_reward);
        const Seconds now = u(0, 10), residual = u(0, 3);
        const int n = 1 + static_cast<int>(u(0, 8));
        std::size_t inserted = 0, dropped = 0;
        for (int k = 0; k < n; ++k) {
            const Job j = make_job(static_cast<JobId>(k + 1), now, u(0.2, 3), u(0.1, 12), u(0.5, 10) < 5 ? 4.0 : 10.0);
            const auto d = mud_admit(q, j, now, residual);
            ++inserted;
            dropped += d.dropped.size();

            Seconds start = now + residual;
            for (const Job& w : q) {
                REQUIRE(w.expiry >= start);
                start += w.service;
            }
            for (std::size_t r = 1; r < q.size(); ++r) REQUIRE(q[r - 1].expiry <= q[r].expiry);
        }
        CHECK(q.size() + dropped == inserted);
    }
}

TEST_CASE("cmu/theta picks the class with the largest index") {
    const std::vector<RewardClass> coeff{{4.0, 1.0, 0.005}, {10.0, 1.0, 0.005}};
    CHECK(coeff[0].index() == doctest::Approx(800.0));
    CHECK(coeff[1].index() == doctest::Approx(2000.0));

    std::vector<OrderedQueue> qs(2, OrderedQueue(QueueOrder::arrival));
    qs[0].insert(job(1, 50, 1, 4));
    qs[1].insert(job(2, 50, 1, 10));
    CHECK(cmu_theta_select(qs, coeff, 0.0) == ServiceDecision::serve(2));
    CHECK(cmu_theta_select(qs, coeff, 0.0) == ServiceDecision::serve(1));
    CHECK(cmu_theta_select(qs, coeff, 0.0) == ServiceDecision::idle());

    qs[0].insert(job(3, 50, 1, 4));
    qs[1].insert(job(4, 1, 1, 10));
    CHECK(cmu_theta_select(qs, coeff, 2.0) == ServiceDecision::drop(4));
    CHECK(cmu_theta_select(qs, coeff, 2.0) == ServiceDecision::serve(3));

    std::vector<RewardClass> short_coeff{coeff[0]};
    CHECK_THROWS_AS(cmu_theta_select(qs, short_coeff, 0.0), std::invalid_argument);
}

TEST_CASE("greedy and fcfs") {
    auto g = queue_of(QueueOrder::highest_reward, {job(1, 5, 1, 4), job(2, 9, 1, 10)});
    CHECK(greedy_select(g, 0.0) == ServiceDecision::serve(2));

    g = queue_of(QueueOrder::highest_reward, {job(1, 1, 1, 4), job(2, 1.5, 1, 10)});
    CHECK(greedy_select(g, 2.0).kind == ServiceDecision::Kind::drop);
    CHECK(greedy_select(g, 2.0).kind == ServiceDecision::Kind::drop);
    CHECK(greedy_select(g, 2.0) == ServiceDecision::idle());

    g = queue_of(QueueOrder::highest_reward, {job(1, 9, 1, 4), job(2, 5, 1, 4)});
    CHECK(greedy_select(g, 0.0) == ServiceDecision::serve(2));

    auto f = queue_of(QueueOrder::arrival, {job(2, 3, 1), job(1, 9, 1), job(3, 1, 1)});
    CHECK(fcfs_select(f, 0.0) == ServiceDecision::serve(1));
    CHECK(fcfs_select(f, 2.0) == ServiceDecision::drop(3));
    CHECK(fcfs_select(f, 2.0) == ServiceDecision::serve(2));
}

TEST_CASE("reward classes") {
    const auto m = RewardClassMap::for_scenario(mmb_preset(1.5, 10, 1));
    REQUIRE(m.size() == 2);
    const auto& lo = m.coefficients(m.class_of(4.0));
    const auto& hi = m.coefficients(m.class_of(10.0));
    CHECK(lo.c == 4.0);
    CHECK(hi.c == 10.0);
    CHECK(hi.mu == doctest::Approx(1.0));
    CHECK(hi.theta == doctest::Approx(0.005));
    CHECK_THROWS_AS(m.class_of(7.0), std::out_of_range);

    const auto cont = RewardClassMap::for_scenario(mmm_preset(1.5, 10, 1));
    CHECK(cont.size() == 16);
    CHECK(cont.class_of(0.01) == 0);
    CHECK(cont.class_of(1000.0) == 15);
    for (std::size_t k = 1; k < cont.size(); ++k) CHECK(cont.coefficients(k).c > cont.coefficients(k - 1).c);

    std::vector<Job> jobs{make_job(1, 0, 1, 2, 4), make_job(2, 1, 3, 6, 10), make_job(3, 2, 2, 4, 4)};
    const auto inst = RewardClassMap::for_jobs(jobs);
    CHECK(inst.size() == 2);
    CHECK(inst.coefficients(inst.class_of(10.0)).c == 10.0);
    CHECK(inst.coefficients(0).mu == doctest::Approx(0.5));
    CHECK(inst.coefficients(0).theta == doctest::Approx(0.25));
}

TEST_CASE("policy factory") {
    for (const auto& name : policy_names()) {
        auto p = make_policy(name, RewardClassMap::for_scenario(mmb_preset(1.0, 10, 1)));
        CHECK(p->name() == name);
        CHECK(p->fresh()->name() == name);
        CHECK(p->size() == 0);
    }
    CHECK_THROWS_AS(make_policy("lifo"), UnknownPolicy);
    CHECK_THROWS(make_policy("cmutheta"));
}

TEST_CASE("arrival to an idle empty system is served at once") {
    auto p = make_policy("mud");
    CHECK(p->on_arrival(job(1, 5, 1), 0.0, 0.0, true).kind == ArrivalDecision::Kind::serve_now);
    CHECK(p->on_arrival(job(2, 5, 1), 0.0, 1.0, false).kind == ArrivalDecision::Kind::accepted);
    CHECK(p->size() == 1);
}
