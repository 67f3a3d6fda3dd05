#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "rdq/engine.hpp"
#include "rdq/experiment.hpp"
#include "rdq/io.hpp"
#include "rdq/oracle.hpp"
#include "rdq/workload.hpp"

namespace rdq::cli {

namespace fs = std::filesystem;

namespace {

std::string valid_policies() {
    std::string s;
    for (const auto& n : policy_names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
}

bool check_format(const std::string& format, std::ostream& err) {
    if (format == "csv" || format == "json") return true;
    err << "error: --format must be csv or json\n";
    return false;
}

}  // namespace

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err, const PolicyFactory& factory) {
    if (!check_format(opt.format, err)) return bad_input;
    ScenarioSpec spec;
    std::unique_ptr<Policy> policy;
    try {
        spec = load_config(opt.config);
        if (opt.seed) spec.seed = *opt.seed;
        if (opt.jobs) spec.n_jobs = *opt.jobs;
        spec.validate();
        const auto classes = RewardClassMap::for_scenario(spec);
        policy = factory ? factory(opt.policy, classes) : make_policy(opt.policy, classes);
    } catch (const UnknownPolicy& e) {
        err << "error: " << e.what() << "; valid policies: " << valid_policies() << '\n';
        return bad_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_input;
    }

    SimulationTrace trace;
    try {
        const auto jobs = generate_stream(spec);
        trace = run_simulation(jobs, *policy);
    } catch (const ContractViolation& e) {
        err << "contract violation: " << e.what() << '\n';
        return contract_violation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_input;
    }

    try {
        fs::create_directories(opt.out_dir);
        const fs::path dir(opt.out_dir);
        if (opt.format == "csv") {
            auto f = open_out(dir / "trace.csv");
            write_trace_csv(f, trace);
        } else {
            open_out(dir / "trace.json") << trace_json(trace) << '\n';
        }
        open_out(dir / "metrics.json") << metrics_json(trace, policy->name()) << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_input;
    }
    out << policy->name() << ": arrivals " << trace.arrivals << ", served " << trace.served_count << ", dropped "
        << trace.dropped_count << ", U " << format_number(trace.total_reward) << '\n';
    return ok;
}

int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out, std::ostream& err) {
    if (!check_format(opt.format, err)) return bad_input;
    ExperimentConfig cfg;
    cfg.study = opt.study;
    cfg.seeds = opt.seeds;
    cfg.base_seed = opt.seed;
    cfg.n_jobs = opt.jobs;
    if (opt.study != "mmb" && opt.study != "mmm") {
        err << "error: unknown study '" << opt.study << "' (expected mmb or mmm)\n";
        return bad_input;
    }

    std::vector<CellResult> cells;
    try {
        cells = run_experiment(cfg, [&](const CellResult& c) {
            if (c.policy == "edf") err << "lambda_a=" << format_number(c.lambda_a) << " seed=" << c.seed << '\n';
        });
    } catch (const ContractViolation& e) {
        err << "contract violation: " << e.what() << '\n';
        return contract_violation;
    }
    const auto rows = summarize(cells);
    const auto checks = qualitative_checks(cells);

    try {
        fs::create_directories(opt.out_dir);
        const fs::path dir(opt.out_dir);
        if (opt.format == "csv") {
            auto t = open_out(dir / "table.csv");
            write_cells_csv(t, cells);
            auto s = open_out(dir / "summary.csv");
            write_summary_csv(s, rows);
        } else {
            open_out(dir / "results.json") << experiment_json(cells, rows) << '\n';
        }
        auto st = open_out(dir / "streams.csv");
        write_streams_csv(st, cells);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_input;
    }

    out << "study " << opt.study << ", " << opt.jobs << " arrivals, " << opt.seeds
        << " seeds; relative to edf on the same stream (CBS not included)\n";
    out << std::left << std::setw(10) << "lambda_a" << std::setw(14) << "policy" << std::setw(22) << "rel_reward"
        << "rel_jobs\n";
    for (const SummaryRow& r : rows) {
        out << std::setw(10) << format_number(r.lambda_a) << std::setw(14) << r.policy << std::setw(22)
            << (std::to_string(r.rel_reward.mean) + " +- " + std::to_string(r.rel_reward.half_width))
            << std::to_string(r.rel_jobs.mean) << " +- " << std::to_string(r.rel_jobs.half_width) << '\n';
    }
    for (const OrderingCheck& c : checks) out << (c.pass ? "ok   " : "MISS ") << c.what << '\n';
    return ok;
}

int cmd_verify(const std::string& suite, const SuiteParams& params, std::ostream& out, std::ostream& err) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end()) {
        err << "error: unknown suite '" << suite << "'\n";
        return bad_input;
    }
    const SuiteReport r = run_suite(suite, params);
    out << suite << ": " << r.passed << " passed, " << r.failed << " failed, " << r.skipped << " skipped ("
        << std::fixed << std::setprecision(2) << r.seconds << " s)\n";
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
    for (const auto& [k, v] : r.metrics) out << "  " << k << " = " << format_number(v) << '\n';
    for (const auto& f : r.failures) out << "  FAIL " << f << '\n';
    return r.ok() ? ok : check_failed;
}

int cmd_oracle(const OracleCliOptions& opt, std::ostream& out, std::ostream& err) {
    std::vector<Job> jobs;
    OracleResult result;
    try {
        jobs = load_instance_csv(opt.instance);
        result = optimal_offline(jobs, {.max_jobs = opt.max_jobs, .memoize = opt.memoize});
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return bad_input;
    }
    out << oracle_json(result) << '\n';
    if (opt.policy) {
        try {
            auto p = make_policy(*opt.policy, RewardClassMap::for_jobs(jobs));
            const SimulationTrace t = run_simulation(jobs, *p, {.record_trace = false, .track_potential = false});
            out << *opt.policy << ": U " << format_number(t.total_reward) << " of optimum "
                << format_number(result.max_total_reward) << '\n';
        } catch (const UnknownPolicy& e) {
            err << "error: " << e.what() << "; valid policies: " << valid_policies() << '\n';
            return bad_input;
        } catch (const ContractViolation& e) {
            err << "contract violation: " << e.what() << '\n';
            return contract_violation;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return bad_input;
        }
    }
    return ok;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Single-server deadline queue simulator"};
    app.require_subcommand(1);

    RunOptions run;
    auto* c_run = app.add_subcommand("run", "simulate one scenario under one policy");
    c_run->add_option("--config", run.config, "scenario config file")->required();
    c_run->add_option("--policy", run.policy, "edf | medf | mud | cmutheta | cmutheta_edf | greedy | fcfs");
    c_run->add_option("--seed", run.seed, "override the config seed");
    c_run->add_option("--jobs", run.jobs, "override the number of jobs");
    c_run->add_option("--out", run.out_dir, "output directory");
    c_run->add_option("--format", run.format, "trace format: csv | json");

    ReproduceOptions rep;
    auto* c_rep = app.add_subcommand("reproduce", "relative reward / job tables over lambda_a");
    c_rep->add_option("study", rep.study, "mmb | mmm")->required();
    c_rep->add_option("--out", rep.out_dir, "output directory");
    c_rep->add_option("--seeds", rep.seeds, "replications per lambda_a");
    c_rep->add_option("--seed", rep.seed, "first seed");
    c_rep->add_option("--jobs", rep.jobs, "arrivals per run");
    c_rep->add_option("--format", rep.format, "csv | json");

    std::string suite;
    SuiteParams sp;
    auto* c_ver = app.add_subcommand("verify", "run a property suite");
    c_ver->add_option("suite", suite, "lemma1 | asgood | better | t4 | t5 | bounds | oracle")->required();
    c_ver->add_option("--instances", sp.instances, "oracle instances");
    c_ver->add_option("--jobs", sp.jobs, "jobs per stream or instance");
    c_ver->add_option("--runs", sp.runs, "random streams");
    c_ver->add_option("--repeats", sp.repeats, "adversarial repeats");
    c_ver->add_option("--seed", sp.seed, "first seed");

    OracleCliOptions orc;
    bool no_memo = false;
    auto* c_orc = app.add_subcommand("oracle", "solve an instance CSV exactly");
    c_orc->add_option("instance", orc.instance, "CSV with id,arrival,service,deadline,reward")->required();
    c_orc->add_option("--policy", orc.policy, "also run this policy on the instance");
    c_orc->add_option("--max-jobs", orc.max_jobs, "instance size limit");
    c_orc->add_flag("--no-memo", no_memo, "plain exhaustive search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return bad_input;
    }
    orc.memoize = !no_memo;

    if (c_run->parsed()) return cmd_run(run, out, err);
    if (c_rep->parsed()) return cmd_reproduce(rep, out, err);
    if (c_ver->parsed()) return cmd_verify(suite, sp, out, err);
    if (c_orc->parsed()) return cmd_oracle(orc, out, err);
    return bad_input;
}

}  // namespace rdq::cli
