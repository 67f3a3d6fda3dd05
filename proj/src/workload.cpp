#include "rdq/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace rdq {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string format_list(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += format_double(vs[i]);
    }
    return out;
}

}  // namespace

void validate(const DistSpec& spec) {
    std::visit(overloaded{
                   [](const Deterministic& d) {
                       if (!positive_finite(d.value))
                           throw std::invalid_argument("deterministic value must be > 0");
                   },
                   [](const Exponential& e) {
                       if (!positive_finite(e.rate)) throw std::invalid_argument("exponential rate must be > 0");
                   },
                   [](const TwoPoint& t) {
                       if (!positive_finite(t.lo) || !positive_finite(t.hi) || !(t.lo < t.hi))
                           throw std::invalid_argument("two_point needs 0 < lo < hi");
                       if (!(t.p_hi > 0.0 && t.p_hi < 1.0))
                           throw std::invalid_argument("two_point p_hi must be in (0,1)");
                   },
                   [](const Discrete& d) {
                       if (d.values.empty() || d.values.size() != d.probs.size())
                           throw std::invalid_argument("discrete needs matching non-empty values/probs");
                       for (double v : d.values)
                           if (!positive_finite(v)) throw std::invalid_argument("discrete values must be > 0");
                       double total = 0.0;
                       for (double p : d.probs) {
                           if (!(p > 0.0 && p <= 1.0))
                               throw std::invalid_argument("discrete probabilities must be in (0,1]");
                           total += p;
                       }
                       if (std::abs(total - 1.0) > 1e-9)
                           throw std::invalid_argument("discrete probabilities must sum to 1");
                   },
                   [](const Uniform& u) {
                       if (!(u.lo >= 0.0 && u.lo < u.hi && std::isfinite(u.hi)))
                           throw std::invalid_argument("uniform needs 0 <= lo < hi");
                   },
               },
               spec);
}

std::string kind_name(const DistSpec& spec) {
    return std::visit(overloaded{
                          [](const Deterministic&) { return std::string("deterministic"); },
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const TwoPoint&) { return std::string("two_point"); },
                          [](const Discrete&) { return std::string("discrete"); },
                          [](const Uniform&) { return std::string("uniform"); },
                      },
                      spec);
}

double mean(const DistSpec& spec) {
    return std::visit(overloaded{
                          [](const Deterministic& d) { return d.value; },
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const TwoPoint& t) { return t.p_hi * t.hi + (1.0 - t.p_hi) * t.lo; },
                          [](const Discrete& d) {
                              return std::inner_product(d.values.begin(), d.values.end(), d.probs.begin(), 0.0);
                          },
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                      },
                      spec);
}

std::optional<std::pair<double, double>> support(const DistSpec& spec) {
    using R = std::optional<std::pair<double, double>>;
    return std::visit(overloaded{
                          [](const Deterministic& d) -> R { return std::pair{d.value, d.value}; },
                          [](const Exponential&) -> R { return std::nullopt; },
                          [](const TwoPoint& t) -> R { return std::pair{t.lo, t.hi}; },
                          [](const Discrete& d) -> R {
                              auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
                              return std::pair{*lo, *hi};
                          },
                          [](const Uniform& u) -> R { return std::pair{u.lo, u.hi}; },
                      },
                      spec);
}

std::optional<std::vector<double>> support_points(const DistSpec& spec) {
    using R = std::optional<std::vector<double>>;
    R pts = std::visit(overloaded{
                           [](const Deterministic& d) -> R { return std::vector{d.value}; },
                           [](const Exponential&) -> R { return std::nullopt; },
                           [](const TwoPoint& t) -> R { return std::vector{t.lo, t.hi}; },
                           [](const Discrete& d) -> R { return d.values; },
                           [](const Uniform&) -> R { return std::nullopt; },
                       },
                       spec);
    if (pts) {
        std::sort(pts->begin(), pts->end());
        pts->erase(std::unique(pts->begin(), pts->end()), pts->end());
    }
    return pts;
}

double Rng::uniform_open() {
    // 53 random bits centred in their cell: never exactly 0 or 1.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double sample(const DistSpec& spec, Rng& rng) {
    return std::visit(overloaded{
                          [](const Deterministic& d) { return d.value; },
                          [&rng](const Exponential& e) { return -std::log1p(-rng.uniform_open()) / e.rate; },
                          [&rng](const TwoPoint& t) { return rng.uniform_open() < t.p_hi ? t.hi : t.lo; },
                          [&rng](const Discrete& d) {
                              const double u = rng.uniform_open();
                              double acc = 0.0;
                              for (std::size_t i = 0; i + 1 < d.values.size(); ++i) {
                                  acc += d.probs[i];
                                  if (u < acc) return d.values[i];
                              }
                              return d.values.back();
                          },
                          [&rng](const Uniform& u) {
                              // lo may be 0; the open interval keeps draws positive.
                              return u.lo + (u.hi - u.lo) * rng.uniform_open();
                          },
                      },
                      spec);
}

void ScenarioSpec::validate() const {
    rdq::validate(arrival);
    rdq::validate(service);
    rdq::validate(deadline);
    rdq::validate(reward);
    if (n_jobs < 1) throw std::invalid_argument("n_jobs must be >= 1");
    if (cmu_classes < 1) throw std::invalid_argument("cmutheta.classes must be >= 1");
    if (bounds) bounds->validate();
}

std::optional<ScenarioBounds> declared_bounds(const ScenarioSpec& spec) {
    if (spec.bounds) return spec.bounds;
    auto b = support(spec.service);
    auto d = support(spec.deadline);
    auto w = support(spec.reward);
    if (!b || !d || !w) return std::nullopt;
    ScenarioBounds out;
    out.b_min = b->first;
    out.b_max = b->second;
    out.d_min = d->first;
    out.d_max = d->second;
    out.w_min = w->first;
    out.w_max = w->second;
    if (auto pts = support_points(spec.reward); pts && pts->size() >= 2) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < pts->size(); ++i) gap = std::min(gap, (*pts)[i] - (*pts)[i - 1]);
        out.delta_w = gap;
    }
    if (!(out.b_min > 0.0 && out.d_min > 0.0 && out.w_min > 0.0)) return std::nullopt;
    return out;
}

std::vector<Job> generate_stream(const ScenarioSpec& spec) {
    spec.validate();
    Rng arrivals(splitmix64(spec.seed ^ 0x41));
    Rng services(splitmix64(spec.seed ^ 0x42));
    Rng deadlines(splitmix64(spec.seed ^ 0x44));
    Rng rewards(splitmix64(spec.seed ^ 0x57));

    std::vector<Job> jobs;
    jobs.reserve(spec.n_jobs);
    Seconds t = 0.0;
    for (std::size_t i = 1; i <= spec.n_jobs; ++i) {
        t += sample(spec.arrival, arrivals);
        const Seconds b = sample(spec.service, services);
        const Seconds d = sample(spec.deadline, deadlines);
        const Reward w = sample(spec.reward, rewards);
        jobs.push_back(make_job(i, t, b, d, w));
    }
    return jobs;
}

std::size_t adversarial_filler_count(Seconds d_max, Seconds delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("adversarial stream: delta must be > 0");
    return static_cast<std::size_t>(std::ceil(d_max / delta));
}

std::vector<Job> adversarial_mud_stream(const ScenarioBounds& bounds, Seconds delta, std::size_t repeats) {
    bounds.validate();
    if (!(delta > 0.0)) throw std::invalid_argument("adversarial stream: delta must be > 0");
    if (!(delta < bounds.b_min)) throw std::invalid_argument("adversarial stream: delta must be < b_min");

    const std::size_t fillers = adversarial_filler_count(bounds.d_max, delta);
    const Seconds spacing = bounds.b_min - delta;
    const Seconds flush_gap = bounds.d_max + 2.0 * bounds.b_min;

    std::vector<Job> jobs;
    jobs.reserve(repeats * (fillers + 2));
    JobId id = 1;
    Seconds t = 0.0;
    auto push = [&](Seconds gap, Reward w) {
        t += gap;
        jobs.push_back(make_job(id++, t, bounds.b_min, bounds.d_max, w));
    };
    for (std::size_t r = 0; r < repeats; ++r) {
        push(flush_gap, bounds.w_min);
        for (std::size_t k = 0; k < fillers; ++k) push(spacing, bounds.w_min);
        push(spacing, bounds.w_max);
    }
    return jobs;
}

ScenarioSpec mmb_preset(double lambda_a, std::size_t n_jobs, std::uint64_t seed) {
    ScenarioSpec s;
    s.arrival = Exponential{lambda_a};
    s.service = Exponential{1.0};
    s.deadline = Exponential{0.005};
    s.reward = TwoPoint{4.0, 10.0, 0.5};
    s.n_jobs = n_jobs;
    s.seed = seed;
    return s;
}

ScenarioSpec mmm_preset(double lambda_a, std::size_t n_jobs, std::uint64_t seed) {
    ScenarioSpec s = mmb_preset(lambda_a, n_jobs, seed);
    s.reward = Exponential{0.1};
    return s;
}

// ---------------------------------------------------------------------------
// config text

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw ConfigError("key '" + key + "': not a number: '" + text + "'");
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
    return out;
}

struct Section {
    std::string kind;
    std::map<std::string, std::string> params;
};

DistSpec build_dist(const std::string& attr, const Section& sec) {
    auto num = [&](const char* name) {
        auto it = sec.params.find(name);
        if (it == sec.params.end())
            throw ConfigError(attr + ": missing parameter '" + attr + ".param." + name + "'");
        return parse_number(attr + ".param." + name, it->second);
    };
    auto list = [&](const char* name) {
        auto it = sec.params.find(name);
        if (it == sec.params.end())
            throw ConfigError(attr + ": missing parameter '" + attr + ".param." + name + "'");
        return parse_list(attr + ".param." + name, it->second);
    };
    if (sec.kind == "deterministic") return Deterministic{num("value")};
    if (sec.kind == "exponential") return Exponential{num("rate")};
    if (sec.kind == "two_point") return TwoPoint{num("lo"), num("hi"), num("p_hi")};
    if (sec.kind == "discrete") return Discrete{list("values"), list("probs")};
    if (sec.kind == "uniform") return Uniform{num("lo"), num("hi")};
    throw ConfigError(attr + ": unknown kind '" + sec.kind +
                      "' (expected deterministic|exponential|two_point|discrete|uniform)");
}

void emit_dist(std::ostringstream& out, const std::string& attr, const DistSpec& spec) {
    out << attr << ".kind = " << kind_name(spec) << '\n';
    std::visit(overloaded{
                   [&](const Deterministic& d) { out << attr << ".param.value = " << format_double(d.value) << '\n'; },
                   [&](const Exponential& e) { out << attr << ".param.rate = " << format_double(e.rate) << '\n'; },
                   [&](const TwoPoint& t) {
                       out << attr << ".param.lo = " << format_double(t.lo) << '\n'
                           << attr << ".param.hi = " << format_double(t.hi) << '\n'
                           << attr << ".param.p_hi = " << format_double(t.p_hi) << '\n';
                   },
                   [&](const Discrete& d) {
                       out << attr << ".param.values = " << format_list(d.values) << '\n'
                           << attr << ".param.probs = " << format_list(d.probs) << '\n';
                   },
                   [&](const Uniform& u) {
                       out << attr << ".param.lo = " << format_double(u.lo) << '\n'
                           << attr << ".param.hi = " << format_double(u.hi) << '\n';
                   },
               },
               spec);
}

}  // namespace

ScenarioSpec parse_config(const std::string& text) {
    ScenarioSpec spec;
    std::map<std::string, Section> sections;
    std::map<std::string, double> bound_values;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    static const char* const attrs[] = {"arrival", "service", "deadline", "reward"};

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");

        if (key == "n_jobs") {
            const double v = parse_number(key, value);
            if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("n_jobs must be a positive integer");
            spec.n_jobs = static_cast<std::size_t>(v);
            continue;
        }
        if (key == "seed") {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size())
                throw ConfigError("seed must be an unsigned integer");
            spec.seed = v;
            continue;
        }
        if (key == "cmutheta.classes") {
            const double v = parse_number(key, value);
            if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("cmutheta.classes must be a positive integer");
            spec.cmu_classes = static_cast<std::size_t>(v);
            continue;
        }
        if (key.rfind("bounds.", 0) == 0) {
            bound_values[key.substr(7)] = parse_number(key, value);
            continue;
        }
        bool matched = false;
        for (const char* attr : attrs) {
            const std::string prefix = std::string(attr) + ".";
            if (key.rfind(prefix, 0) != 0) continue;
            const std::string rest = key.substr(prefix.size());
            if (rest == "kind") {
                sections[attr].kind = value;
            } else if (rest.rfind("param.", 0) == 0 && rest.size() > 6) {
                sections[attr].params[rest.substr(6)] = value;
            } else {
                throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            }
            matched = true;
        }
        if (!matched) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }

    for (const char* attr : attrs) {
        auto it = sections.find(attr);
        if (it == sections.end()) continue;  // keep the default law
        if (it->second.kind.empty()) throw ConfigError(std::string(attr) + ": missing '" + attr + ".kind'");
        DistSpec d = build_dist(attr, it->second);
        const std::string name = attr;
        if (name == "arrival") spec.arrival = d;
        if (name == "service") spec.service = d;
        if (name == "deadline") spec.deadline = d;
        if (name == "reward") spec.reward = d;
    }

    if (!bound_values.empty()) {
        ScenarioBounds b;
        auto need = [&](const char* k) {
            auto it = bound_values.find(k);
            if (it == bound_values.end()) throw ConfigError(std::string("bounds: missing bounds.") + k);
            return it->second;
        };
        b.b_min = need("b_min");
        b.b_max = need("b_max");
        b.d_min = need("d_min");
        b.d_max = need("d_max");
        b.w_min = need("w_min");
        b.w_max = need("w_max");
        if (auto it = bound_values.find("delta_w"); it != bound_values.end()) b.delta_w = it->second;
        if (auto it = bound_values.find("a_delta"); it != bound_values.end()) b.a_delta = it->second;
        spec.bounds = b;
    }

    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

ScenarioSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string write_config(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << "n_jobs = " << spec.n_jobs << '\n';
    out << "seed = " << spec.seed << '\n';
    emit_dist(out, "arrival", spec.arrival);
    emit_dist(out, "service", spec.service);
    emit_dist(out, "deadline", spec.deadline);
    emit_dist(out, "reward", spec.reward);
    out << "cmutheta.classes = " << spec.cmu_classes << '\n';
    if (spec.bounds) {
        const ScenarioBounds& b = *spec.bounds;
        out << "bounds.b_min = " << format_double(b.b_min) << '\n'
            << "bounds.b_max = " << format_double(b.b_max) << '\n'
            << "bounds.d_min = " << format_double(b.d_min) << '\n'
            << "bounds.d_max = " << format_double(b.d_max) << '\n'
            << "bounds.w_min = " << format_double(b.w_min) << '\n'
            << "bounds.w_max = " << format_double(b.w_max) << '\n';
        if (b.delta_w) out << "bounds.delta_w = " << format_double(*b.delta_w) << '\n';
        if (b.a_delta) out << "bounds.a_delta = " << format_double(*b.a_delta) << '\n';
    }
    return out.str();
}

}  // namespace rdq
