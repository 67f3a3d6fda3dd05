#include "rdq/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rdq {

std::string format_number(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) return std::to_string(x);
    return {buf, end};
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
    out << "time,kind,job_id,qe_class,queue_potential,cum_reward\n";
    for (const EventRecord& e : trace.events) {
        out << format_number(e.time) << ',' << to_string(e.kind) << ',' << e.job_id << ',' << to_string(e.qe_class)
            << ',' << e.queue_potential << ',' << format_number(e.cumulative_reward) << '\n';
    }
}

std::string trace_json(const SimulationTrace& trace) {
    nlohmann::json events = nlohmann::json::array();
    for (const EventRecord& e : trace.events) {
        events.push_back({{"time", e.time},
                          {"kind", to_string(e.kind)},
                          {"job_id", e.job_id},
                          {"qe_class", to_string(e.qe_class)},
                          {"queue_potential", e.queue_potential},
                          {"cum_reward", e.cumulative_reward}});
    }
    return events.dump(1);
}

std::string metrics_json(const SimulationTrace& trace, std::string_view policy) {
    nlohmann::json epoch_times = nlohmann::json::array();
    nlohmann::json epoch_rewards = nlohmann::json::array();
    for (const Epoch& e : trace.epochs) {
        epoch_times.push_back(e.time);
        epoch_rewards.push_back(e.reward);
    }
    nlohmann::json j{
        {"policy", policy},
        {"arrivals", trace.arrivals},
        {"served", trace.served_count},
        {"dropped", trace.dropped_count},
        {"U", trace.total_reward},
        {"topclass_served", trace.topclass_served},
        {"max_queue_potential", trace.max_potential},
        {"queue_bound", trace.queue_bound},
        {"stream_checksum", trace.stream_checksum},
        {"epoch_times", std::move(epoch_times)},
        {"epoch_rewards", std::move(epoch_rewards)},
    };
    return j.dump(2);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto a = field.find_first_not_of(" \t\r");
        const auto b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    }
    return out;
}

template <class T>
T parse_field(const std::string& s, std::size_t line) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::runtime_error("instance line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

std::vector<Job> read_instance_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    std::vector<Job> jobs;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv(line);
        if (!header) {
            if (f != std::vector<std::string>{"id", "arrival", "service", "deadline", "reward"})
                throw std::runtime_error("instance line " + std::to_string(lineno) +
                                         ": expected header id,arrival,service,deadline,reward");
            header = true;
            continue;
        }
        if (f.size() != 5)
            throw std::runtime_error("instance line " + std::to_string(lineno) + ": expected 5 fields");
        try {
            jobs.push_back(make_job(parse_field<JobId>(f[0], lineno), parse_field<double>(f[1], lineno),
                                    parse_field<double>(f[2], lineno), parse_field<double>(f[3], lineno),
                                    parse_field<double>(f[4], lineno)));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("instance line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header) throw std::runtime_error("instance file is empty (header required)");
    validate_stream(jobs);
    return jobs;
}

std::vector<Job> load_instance_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file " + path);
    return read_instance_csv(in);
}

void write_instance_csv(std::ostream& out, std::span<const Job> jobs) {
    out << "id,arrival,service,deadline,reward\n";
    for (const Job& j : jobs)
        out << j.id << ',' << format_number(j.arrival) << ',' << format_number(j.service) << ','
            << format_number(j.deadline) << ',' << format_number(j.reward) << '\n';
}

std::string oracle_json(const OracleResult& result) {
    nlohmann::json witness = nlohmann::json::array();
    for (const ServiceStart& s : result.witness) witness.push_back({{"job_id", s.id}, {"start", s.start}});
    nlohmann::json j{{"max_total_reward", result.max_total_reward},
                     {"max_topclass_count", result.max_topclass_count},
                     {"witness_topclass_count", result.witness_topclass_count},
                     {"states_visited", result.states_visited},
                     {"witness", std::move(witness)}};
    return j.dump(2);
}

}  // namespace rdq
