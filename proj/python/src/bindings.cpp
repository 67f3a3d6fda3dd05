#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdq/engine.hpp"
#include "rdq/oracle.hpp"
#include "rdq/policies.hpp"
#include "rdq/suites.hpp"
#include "rdq/workload.hpp"

namespace py = pybind11;
using namespace rdq;

namespace {

py::dict trace_dict(const SimulationTrace& t) {
    py::list events;
    for (const EventRecord& e : t.events)
        events.append(py::dict(py::arg("time") = e.time, py::arg("kind") = std::string(to_string(e.kind)),
                               py::arg("job_id") = e.job_id, py::arg("qe_class") = std::string(to_string(e.qe_class)),
                               py::arg("queue_potential") = e.queue_potential,
                               py::arg("cum_reward") = e.cumulative_reward));
    py::list epochs;
    for (const Epoch& e : t.epochs)
        epochs.append(py::dict(py::arg("time") = e.time, py::arg("reward") = e.reward, py::arg("served") = e.served));
    py::list schedule;
    for (const ServiceStart& s : t.schedule) schedule.append(py::make_tuple(s.id, s.start));
    py::dict d;
    d["arrivals"] = t.arrivals;
    d["served"] = t.served_count;
    d["dropped"] = t.dropped_count;
    d["topclass_served"] = t.topclass_served;
    d["U"] = t.total_reward;
    d["max_potential"] = t.max_potential;
    d["queue_bound"] = t.queue_bound;
    d["stream_checksum"] = t.stream_checksum;
    d["events"] = events;
    d["epochs"] = epochs;
    d["schedule"] = schedule;
    return d;
}

SimulationTrace simulate(const std::vector<Job>& jobs, const std::string& policy, bool record_trace,
                         bool track_potential) {
    auto p = make_policy(policy, RewardClassMap::for_jobs(jobs));
    return run_simulation(jobs, *p, {.record_trace = record_trace, .track_potential = track_potential});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Single-server deadline queue simulator: policies, engine and exact oracle";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Job>(m, "Job")
        .def(py::init(&make_job), py::arg("id"), py::arg("arrival"), py::arg("service"), py::arg("deadline"),
             py::arg("reward"))
        .def_readonly("id", &Job::id)
        .def_readonly("arrival", &Job::arrival)
        .def_readonly("service", &Job::service)
        .def_readonly("deadline", &Job::deadline)
        .def_readonly("reward", &Job::reward)
        .def_readonly("expiry", &Job::expiry)
        .def("__eq__", [](const Job& a, const Job& b) { return a == b; })
        .def("__repr__", [](const Job& j) {
            return "Job(id=" + std::to_string(j.id) + ", t=" + std::to_string(j.arrival) +
                   ", b=" + std::to_string(j.service) + ", d=" + std::to_string(j.deadline) +
                   ", w=" + std::to_string(j.reward) + ")";
        });

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def_readwrite("n_jobs", &ScenarioSpec::n_jobs)
        .def_readwrite("seed", &ScenarioSpec::seed)
        .def("to_config", [](const ScenarioSpec& s) { return write_config(s); });

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("mmb_preset", &mmb_preset, py::arg("lambda_a"), py::arg("n_jobs"), py::arg("seed"));
    m.def("mmm_preset", &mmm_preset, py::arg("lambda_a"), py::arg("n_jobs"), py::arg("seed"));
    m.def("generate_stream", &generate_stream, py::arg("spec"));
    m.def(
        "adversarial_stream",
        [](double b, double d_max, double w_min, double w_max, double delta, std::size_t repeats) {
            ScenarioBounds bounds;
            bounds.b_min = bounds.b_max = b;
            bounds.d_min = bounds.d_max = d_max;
            bounds.w_min = w_min;
            bounds.w_max = w_max;
            return adversarial_mud_stream(bounds, delta, repeats);
        },
        py::arg("b"), py::arg("d_max"), py::arg("w_min"), py::arg("w_max"), py::arg("delta"), py::arg("repeats"));
    m.def("queue_length_bound", py::overload_cast<Seconds, Seconds>(&queue_length_bound), py::arg("d_max"),
          py::arg("b_min"));

    m.def("policy_names", &policy_names);
    m.def(
        "run_simulation",
        [](const std::vector<Job>& jobs, const std::string& policy, bool record_trace, bool track_potential) {
            return trace_dict(simulate(jobs, policy, record_trace, track_potential));
        },
        py::arg("jobs"), py::arg("policy"), py::arg("record_trace") = true, py::arg("track_potential") = true);
    m.def(
        "compute_queue_potential",
        [](const std::vector<Job>& ordered_waiting, Seconds now, Seconds residual) {
            return compute_queue_potential(ordered_waiting, now, residual);
        },
        py::arg("ordered_waiting"), py::arg("now"), py::arg("residual"));
    m.def(
        "compare_policies",
        [](const std::vector<Job>& jobs, const std::string& a, const std::string& b) {
            const ComparisonReport r = compare_traces(simulate(jobs, a, false, false), simulate(jobs, b, false, false));
            py::dict d;
            d["epoch_times"] = r.epoch_times;
            d["delta"] = r.delta;
            d["min_delta"] = r.min_delta;
            d["mean_delta"] = r.mean_delta;
            d["final_delta"] = r.final_delta;
            d["trend_slope"] = r.trend_slope;
            d["equivalent"] = r.equivalent;
            d["as_good_as"] = r.as_good_as;
            d["better"] = r.better;
            return d;
        },
        py::arg("jobs"), py::arg("a"), py::arg("b"));

    m.def(
        "optimal_offline",
        [](const std::vector<Job>& jobs, bool memoize, std::size_t max_jobs) {
            const OracleResult r = optimal_offline(jobs, {.max_jobs = max_jobs, .memoize = memoize});
            py::list witness;
            for (const ServiceStart& s : r.witness) witness.append(py::make_tuple(s.id, s.start));
            py::dict d;
            d["max_total_reward"] = r.max_total_reward;
            d["max_topclass_count"] = r.max_topclass_count;
            d["witness"] = witness;
            return d;
        },
        py::arg("jobs"), py::arg("memoize") = true, py::arg("max_jobs") = 14);
    m.def("optimal_topclass_count",
          [](const std::vector<Job>& jobs, Reward w_max) { return optimal_topclass_count(jobs, w_max); },
          py::arg("jobs"), py::arg("w_max"));

    auto outcome = [](const VerifyOutcome& o) { return py::make_tuple(std::string(to_string(o.status)), o.reason); };
    m.def("verify_theorem4", [outcome](const std::vector<Job>& j) { return outcome(verify_theorem4(j)); });
    m.def("verify_theorem5", [outcome](const std::vector<Job>& j) { return outcome(verify_theorem5(j)); });
    m.def("verify_lemma1", [outcome](const std::vector<Job>& j) { return outcome(verify_lemma1(j)); });

    m.def("suite_names", &suite_names);
    m.def(
        "run_suite",
        [](const std::string& name, std::optional<std::size_t> instances, std::optional<std::size_t> jobs,
           std::optional<std::size_t> runs, std::optional<std::size_t> repeats, std::uint64_t seed) {
            const SuiteReport r = run_suite(name, {instances, jobs, runs, repeats, seed});
            py::dict d;
            d["passed"] = r.passed;
            d["failed"] = r.failed;
            d["skipped"] = r.skipped;
            d["failures"] = r.failures;
            py::dict metrics;
            for (const auto& [k, v] : r.metrics) metrics[py::str(k)] = v;
            d["metrics"] = metrics;
            d["seconds"] = r.seconds;
            return d;
        },
        py::arg("name"), py::arg("instances") = py::none(), py::arg("jobs") = py::none(), py::arg("runs") = py::none(),
        py::arg("repeats") = py::none(), py::arg("seed") = 1);
}
