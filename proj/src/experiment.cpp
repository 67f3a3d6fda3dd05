#include "rdq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"
#include "rdq/engine.hpp"
#include "rdq/io.hpp"
#include "rdq/policies.hpp"

namespace rdq {

ScenarioSpec study_spec(const std::string& study, double lambda_a, std::size_t n_jobs, std::uint64_t seed) {
    if (study == "mmb") return mmb_preset(lambda_a, n_jobs, seed);
    if (study == "mmm") return mmm_preset(lambda_a, n_jobs, seed);
    throw ConfigError("unknown study '" + study + "' (expected mmb or mmm)");
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config,
                                       const std::function<void(const CellResult&)>& progress) {
    std::vector<std::string> order{"edf"};
    for (const auto& p : config.policies)
        if (p != "edf") order.push_back(p);
    for (const auto& p : order) {
        const auto& known = policy_names();
        if (std::find(known.begin(), known.end(), p) == known.end()) throw UnknownPolicy("unknown policy '" + p + "'");
    }

    const EngineOptions fast{.record_trace = false, .track_potential = false};
    std::vector<CellResult> cells;
    for (double lambda : config.lambdas) {
        for (std::size_t s = 0; s < config.seeds; ++s) {
            const std::uint64_t seed = config.base_seed + s;
            const ScenarioSpec spec = study_spec(config.study, lambda, config.n_jobs, seed);
            const std::vector<Job> jobs = generate_stream(spec);
            const RewardClassMap classes = RewardClassMap::for_scenario(spec);

            CellResult base;
            for (const std::string& name : order) {
                auto policy = make_policy(name, classes);
                const SimulationTrace t = run_simulation(jobs, *policy, fast);
                CellResult c{lambda, name, seed, t.served_count, t.dropped_count, t.total_reward, 1.0, 1.0,
                             t.stream_checksum};
                if (name == "edf") {
                    base = c;
                } else {
                    c.rel_reward = base.reward > 0 ? c.reward / base.reward : 0.0;
                    c.rel_jobs = base.served > 0 ? static_cast<double>(c.served) / static_cast<double>(base.served) : 0.0;
                }
                if (progress) progress(c);
                const bool listed = std::find(config.policies.begin(), config.policies.end(), name) != config.policies.end();
                if (listed) cells.push_back(std::move(c));
            }
        }
    }
    return cells;
}

namespace {

double sample_sd(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double average(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double t_quantile(double p, std::size_t df) {
    boost::math::students_t dist(static_cast<double>(df));
    return boost::math::quantile(dist, p);
}

}  // namespace

MeanCi mean_ci(const std::vector<double>& values, double confidence) {
    MeanCi r;
    r.mean = average(values);
    if (values.size() < 2) return r;
    const double se = sample_sd(values, r.mean) / std::sqrt(static_cast<double>(values.size()));
    r.half_width = t_quantile(0.5 + confidence / 2.0, values.size() - 1) * se;
    return r;
}

double lower_bound(const std::vector<double>& values, double confidence) {
    const double m = average(values);
    if (values.size() < 2) return m;
    const double se = sample_sd(values, m) / std::sqrt(static_cast<double>(values.size()));
    return m - t_quantile(confidence, values.size() - 1) * se;
}

double upper_bound(const std::vector<double>& values, double confidence) {
    const double m = average(values);
    if (values.size() < 2) return m;
    const double se = sample_sd(values, m) / std::sqrt(static_cast<double>(values.size()));
    return m + t_quantile(confidence, values.size() - 1) * se;
}

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells) {
    std::map<std::pair<double, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<std::pair<double, std::string>> order;
    for (const CellResult& c : cells) {
        auto key = std::make_pair(c.lambda_a, c.policy);
        if (!groups.contains(key)) order.push_back(key);
        groups[key].first.push_back(c.rel_reward);
        groups[key].second.push_back(c.rel_jobs);
    }
    std::vector<SummaryRow> rows;
    for (const auto& key : order) {
        const auto& [rr, rj] = groups[key];
        rows.push_back({key.first, key.second, rr.size(), mean_ci(rr), mean_ci(rj)});
    }
    return rows;
}

std::vector<OrderingCheck> qualitative_checks(const std::vector<CellResult>& cells) {
    // (lambda, policy) -> seed -> cell
    std::map<double, std::map<std::string, std::map<std::uint64_t, const CellResult*>>> by;
    for (const CellResult& c : cells) by[c.lambda_a][c.policy][c.seed] = &c;

    auto paired = [](const std::map<std::uint64_t, const CellResult*>& a,
                     const std::map<std::uint64_t, const CellResult*>& b, auto field) {
        std::vector<double> d;
        for (const auto& [seed, ca] : a)
            if (auto it = b.find(seed); it != b.end()) d.push_back(field(*ca) - field(*it->second));
        return d;
    };
    const auto rel_reward = [](const CellResult& c) { return c.rel_reward; };

    std::vector<OrderingCheck> out;
    std::vector<double> lambdas;
    for (const auto& [lambda, policies] : by) {
        lambdas.push_back(lambda);
        auto mud = policies.find("mud");
        if (mud == policies.end()) continue;
        const std::string at = "lambda_a=" + format_number(lambda);
        for (const auto& [name, seeds] : policies) {
            if (name == "mud") continue;
            const double lb = lower_bound(paired(mud->second, seeds, rel_reward));
            out.push_back({at + ": mud rel_reward >= " + name, lb >= 0.0, lb});
        }
        std::vector<double> jobs_excess;
        for (const auto& [seed, c] : mud->second) jobs_excess.push_back(c->rel_jobs - 1.0);
        const double lb = lower_bound(jobs_excess);
        out.push_back({at + ": mud rel_jobs >= 1", lb >= 0.0, lb});
    }
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
        auto& lo = by[lambdas[k]];
        auto& hi = by[lambdas[k + 1]];
        if (!lo.contains("mud") || !hi.contains("mud")) continue;
        const double ub = upper_bound(paired(hi["mud"], lo["mud"], rel_reward));
        out.push_back({"mud advantage over edf: lambda_a " + format_number(lambdas[k]) + " -> " +
                           format_number(lambdas[k + 1]) + " not decreasing",
                       ub >= 0.0, ub});
    }
    return out;
}

void write_cells_csv(std::ostream& out, const std::vector<CellResult>& cells) {
    out << "lambda_a,policy,seed,served,dropped,reward,rel_reward,rel_jobs\n";
    for (const CellResult& c : cells)
        out << format_number(c.lambda_a) << ',' << c.policy << ',' << c.seed << ',' << c.served << ',' << c.dropped
            << ',' << format_number(c.reward) << ',' << format_number(c.rel_reward) << ','
            << format_number(c.rel_jobs) << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "lambda_a,policy,seeds,rel_reward_mean,rel_reward_ci95,rel_jobs_mean,rel_jobs_ci95\n";
    for (const SummaryRow& r : rows)
        out << format_number(r.lambda_a) << ',' << r.policy << ',' << r.seeds << ','
            << format_number(r.rel_reward.mean) << ',' << format_number(r.rel_reward.half_width) << ','
            << format_number(r.rel_jobs.mean) << ',' << format_number(r.rel_jobs.half_width) << '\n';
}

void write_streams_csv(std::ostream& out, const std::vector<CellResult>& cells) {
    out << "lambda_a,seed,stream_checksum\n";
    std::set<std::pair<double, std::uint64_t>> seen;
    for (const CellResult& c : cells)
        if (seen.insert({c.lambda_a, c.seed}).second)
            out << format_number(c.lambda_a) << ',' << c.seed << ',' << c.stream_checksum << '\n';
}

std::string experiment_json(const std::vector<CellResult>& cells, const std::vector<SummaryRow>& rows) {
    nlohmann::json jc = nlohmann::json::array();
    for (const CellResult& c : cells)
        jc.push_back({{"lambda_a", c.lambda_a},
                      {"policy", c.policy},
                      {"seed", c.seed},
                      {"served", c.served},
                      {"dropped", c.dropped},
                      {"reward", c.reward},
                      {"rel_reward", c.rel_reward},
                      {"rel_jobs", c.rel_jobs},
                      {"stream_checksum", c.stream_checksum}});
    nlohmann::json js = nlohmann::json::array();
    for (const SummaryRow& r : rows)
        js.push_back({{"lambda_a", r.lambda_a},
                      {"policy", r.policy},
                      {"seeds", r.seeds},
                      {"rel_reward_mean", r.rel_reward.mean},
                      {"rel_reward_ci95", r.rel_reward.half_width},
                      {"rel_jobs_mean", r.rel_jobs.mean},
                      {"rel_jobs_ci95", r.rel_jobs.half_width}});
    return nlohmann::json{{"cells", std::move(jc)}, {"summary", std::move(js)}}.dump(2);
}

}  // namespace rdq
