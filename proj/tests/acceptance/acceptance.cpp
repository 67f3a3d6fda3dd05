// Acceptance run: one PASS/FAIL line per criterion.
//
//   rdq_acceptance            all eight criteria
//   rdq_acceptance --only 4   a single criterion
//
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdq/engine.hpp"
#include "rdq/experiment.hpp"
#include "rdq/io.hpp"
#include "rdq/oracle.hpp"
#include "rdq/suites.hpp"

using namespace rdq;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Contract violations seen by any criterion, reported by criterion 7.
std::size_t g_violations = 0;
std::vector<std::string> g_violation_notes;

void note_violations(const SuiteReport& r) {
    g_violations += r.contract_violations;
    for (const auto& f : r.failures)
        if (g_violation_notes.size() < 5 && f.find("policy '") != std::string::npos) g_violation_notes.push_back(f);
}

std::string first_failures(const SuiteReport& r, std::size_t n = 3) {
    std::string s;
    for (std::size_t k = 0; k < r.failures.size() && k < n; ++k) s += "; " + r.failures[k];
    return s;
}

std::string fmt(double x, int prec = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, x);
    return buf;
}

Outcome queue_sizes() {
    const SuiteReport r = run_suite("lemma1", {.jobs = 1000, .runs = 100});
    note_violations(r);
    const bool fast = r.seconds < 10.0;
    return {r.ok() && r.passed == 100 && fast,
            std::to_string(r.passed) + "/100 streams with equal queue sizes and start times, " + fmt(r.seconds) +
                " s (limit 10 s)" + first_failures(r)};
}

Outcome as_good_as() {
    const SuiteReport r = run_suite("asgood", {.jobs = 1000, .runs = 100});
    note_violations(r);
    const double strict = r.metric("strict_streams").value_or(0);
    const double min_delta = r.metric("min_delta").value_or(-1);
    return {r.ok() && min_delta >= 0.0 && strict >= 1,
            "min delta " + format_number(min_delta) + " over " +
                format_number(r.metric("common_epochs").value_or(0)) + " common epochs, " + format_number(strict) +
                " streams strictly ahead" + first_failures(r)};
}

Outcome adversarial_gain() {
    const SuiteReport r = run_suite("better", {.repeats = 50});
    note_violations(r);
    const double final_delta = r.metric("final_delta").value_or(-1);
    return {r.ok() && final_delta == 300.0,
            "final delta " + format_number(final_delta) + " (expected exactly 300)" + first_failures(r)};
}

// Criteria 4 and 5 count the two kinds of agreement separately.
Outcome unit_service_optimum() {
    const auto t0 = Clock::now();
    std::size_t reward_match = 0, top_match = 0, gated = 0;
    std::vector<std::string> misses;
    for (std::uint64_t k = 0; k < 500; ++k) {
        const auto jobs = generate_stream(unit_service_spec(10, 1 + k));
        const ScenarioBounds b = realized_bounds(jobs);
        if (b.b_min == b.b_max && b.guards_priority_inversion()) ++gated;
        try {
            auto mud = make_policy("mud");
            const SimulationTrace t = run_simulation(jobs, *mud, {.record_trace = false, .track_potential = false});
            const OracleResult opt = optimal_offline(jobs);
            const std::size_t top = optimal_topclass_count(jobs, b.w_max);
            const bool rw = std::abs(t.total_reward - opt.max_total_reward) <= 1e-9;
            const bool tc = t.topclass_served == top;
            reward_match += rw;
            top_match += tc;
            if ((!rw || !tc) && misses.size() < 3)
                misses.push_back("seed " + std::to_string(1 + k) + ": reward " + format_number(t.total_reward) + "/" +
                                 format_number(opt.max_total_reward) + ", top " + std::to_string(t.topclass_served) +
                                 "/" + std::to_string(top));
        } catch (const ContractViolation& e) {
            ++g_violations;
            if (g_violation_notes.size() < 5) g_violation_notes.push_back(e.what());
        }
    }
    const double secs = seconds_since(t0);
    std::string detail = "reward equal " + std::to_string(reward_match) + "/500, top-reward count equal " +
                         std::to_string(top_match) + "/500, instances in regime " + std::to_string(gated) +
                         "/500, " + fmt(secs) + " s (limit 60 s)";
    for (const auto& m : misses) detail += "; " + m;
    return {reward_match == 500 && top_match == 500 && gated == 500 && secs < 60.0, detail};
}

Outcome two_service_optimum() {
    const auto t0 = Clock::now();
    std::size_t match = 0, gated = 0;
    std::vector<std::string> misses;
    for (std::uint64_t k = 0; k < 500; ++k) {
        const auto jobs = generate_stream(two_service_spec(10, 1 + k));
        if (realized_bounds(jobs).d_min > 6.0) ++gated;
        try {
            auto mud = make_policy("mud");
            const SimulationTrace t = run_simulation(jobs, *mud, {.record_trace = false, .track_potential = false});
            const OracleResult opt = optimal_offline(jobs);
            if (t.served_count == opt.witness.size())
                ++match;
            else if (misses.size() < 3)
                misses.push_back("seed " + std::to_string(1 + k) + ": served " + std::to_string(t.served_count) +
                                 "/" + std::to_string(opt.witness.size()));
        } catch (const ContractViolation& e) {
            ++g_violations;
            if (g_violation_notes.size() < 5) g_violation_notes.push_back(e.what());
        }
    }
    std::string detail = "served count equal " + std::to_string(match) + "/500, instances with d_min > 6 " +
                         std::to_string(gated) + "/500, " + fmt(seconds_since(t0)) + " s";
    for (const auto& m : misses) detail += "; " + m;
    return {match == 500 && gated == 500, detail};
}

Outcome overload_ordering() {
    const auto t0 = Clock::now();
    ExperimentConfig cfg;  // mmb, five arrival rates, 10 seeds, 100000 arrivals
    std::vector<CellResult> cells;
    try {
        cells = run_experiment(cfg);
    } catch (const ContractViolation& e) {
        ++g_violations;
        if (g_violation_notes.size() < 5) g_violation_notes.push_back(e.what());
        return {false, std::string("contract violation: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const auto checks = qualitative_checks(cells);
    std::size_t ok = 0;
    std::string misses;
    for (const OrderingCheck& c : checks) {
        if (c.pass)
            ++ok;
        else
            misses += "; MISS " + c.what + " (bound " + format_number(c.bound) + ")";
    }
    std::string means;
    for (const SummaryRow& row : summarize(cells))
        if (row.policy == "mud") means += " " + format_number(row.lambda_a) + ":" + fmt(row.rel_reward.mean, 4);
    return {ok == checks.size() && !checks.empty() && secs < 300.0,
            std::to_string(ok) + "/" + std::to_string(checks.size()) + " one-sided 95% checks, mud rel_reward" +
                means + ", " + fmt(secs, 1) + " s (limit 300 s)" + misses};
}

Outcome engine_contracts(bool standalone) {
    // Run alone, the cheaper suites are replayed so their engine runs count too.
    if (standalone) {
        for (const char* name : {"lemma1", "asgood", "better", "t4", "t5", "oracle"}) note_violations(run_suite(name));
    }
    const SuiteReport r = run_suite("bounds");
    note_violations(r);
    std::string detail = "bounds/conservation/determinism " + std::to_string(r.passed) + "/" +
                         std::to_string(r.passed + r.failed) + " runs, max potential " +
                         format_number(r.metric("max_potential").value_or(0)) + ", contract violations " +
                         std::to_string(g_violations) + (standalone ? " (suites replayed)" : " (all criteria)") +
                         first_failures(r);
    for (const auto& n : g_violation_notes) detail += "; " + n;
    return {r.ok() && g_violations == 0, detail};
}

Outcome oracle_consistency() {
    const SuiteReport r = run_suite("oracle", {.instances = 100, .jobs = 8});
    note_violations(r);
    return {r.ok() && r.passed == 100,
            std::to_string(r.passed) + "/100 instances: memoized == plain, witness admissible and replayed, " +
                "mean states " + format_number(r.metric("mean_states_memoized").value_or(0)) + " vs " +
                format_number(r.metric("mean_states_plain").value_or(0)) + first_failures(r)};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only.insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: rdq_acceptance [--only N]...\n";
            return 2;
        }
    }
    const bool standalone_contracts = !only.empty();

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "queue sizes: mud == edf, unit service, one reward", queue_sizes},
        {2, "mud never behind edf at common empty epochs, two rewards", as_good_as},
        {3, "adversarial stream: gain of 50 x 6", adversarial_gain},
        {4, "unit service, two rewards: mud == exhaustive optimum", unit_service_optimum},
        {5, "two service times, one reward: mud == exhaustive optimum", two_service_optimum},
        {6, "overload study ordering (mmb, 100000 arrivals, 10 seeds)", overload_ordering},
        {7, "engine contracts", [&] { return engine_contracts(standalone_contracts); }},
        {8, "oracle self-consistency", oracle_consistency},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.contains(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << "  " << c.name << " | " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
