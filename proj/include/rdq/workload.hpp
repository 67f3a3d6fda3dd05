#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "rdq/core.hpp"

namespace rdq {

struct Deterministic {
    double value = 1.0;
};
struct Exponential {
    double rate = 1.0;
};
/// `hi` with probability p_hi, `lo` otherwise.
struct TwoPoint {
    double lo = 0.0;
    double hi = 1.0;
    double p_hi = 0.5;
};
struct Discrete {
    std::vector<double> values;
    std::vector<double> probs;
};
struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

using DistSpec = std::variant<Deterministic, Exponential, TwoPoint, Discrete, Uniform>;

/// Throws std::invalid_argument for parameters that cannot produce strictly
/// positive draws or do not form a distribution.
void validate(const DistSpec& spec);

std::string kind_name(const DistSpec& spec);
double mean(const DistSpec& spec);
/// Finite support endpoints, or nullopt for exponential.
std::optional<std::pair<double, double>> support(const DistSpec& spec);
/// Sorted support points of a finite discrete law (deterministic, two_point,
/// discrete); nullopt for continuous laws.
std::optional<std::vector<double>> support_points(const DistSpec& spec);

/// Reproducible random stream: mt19937_64 plus a fixed 53-bit conversion, so
/// draws are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform on the open interval (0, 1).
    double uniform_open();

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// One draw. Exponentials use the inverse CDF.
double sample(const DistSpec& spec, Rng& rng);

struct ScenarioSpec {
    DistSpec arrival = Exponential{1.0};   // inter-arrival times
    DistSpec service = Deterministic{1.0};
    DistSpec deadline = Exponential{0.1};
    DistSpec reward = Deterministic{1.0};
    std::size_t n_jobs = 1000;
    std::uint64_t seed = 1;
    std::optional<ScenarioBounds> bounds;  // declared; derived from the laws otherwise
    std::size_t cmu_classes = 16;          // buckets for continuous rewards

    void validate() const;
};

/// Declared bounds if present, otherwise the support of each law; unbounded
/// laws yield nullopt (use realized_bounds on the stream instead).
std::optional<ScenarioBounds> declared_bounds(const ScenarioSpec& spec);

/// Jobs 1..n with t_i = a_1 + ... + a_i. Each attribute draws from its own
/// sub-stream of the seed, so attributes are independent and changing one law
/// leaves the other attribute sequences untouched.
std::vector<Job> generate_stream(const ScenarioSpec& spec);

/// The deterministic construction that forces MUD and EDF to displace
/// different jobs. Per repeat: one flush job after a gap longer than
/// d_max + b_min (w_min), n = ceil(d_max / delta) fillers at inter-arrival
/// b_min - delta (w_min), and a final job at the same spacing with w_max.
/// Every job has service b_min and deadline d_max.
std::vector<Job> adversarial_mud_stream(const ScenarioBounds& bounds, Seconds delta, std::size_t repeats);

/// Number of filler jobs per adversarial repeat.
std::size_t adversarial_filler_count(Seconds d_max, Seconds delta);

/// M/M/1-M/B: exponential arrivals (lambda_a), service (rate 1), deadlines
/// (rate 0.005), rewards 10 w.p. 0.5 else 4.
ScenarioSpec mmb_preset(double lambda_a, std::size_t n_jobs, std::uint64_t seed);
/// M/M/1-M/M: as mmb but exponential rewards with rate 0.1.
ScenarioSpec mmm_preset(double lambda_a, std::size_t n_jobs, std::uint64_t seed);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` text. Distributions are `<attr>.kind` plus
/// `<attr>.param.<name>`; list parameters are comma separated. `#` starts a
/// comment. Throws ConfigError with the offending line.
ScenarioSpec parse_config(const std::string& text);
ScenarioSpec load_config(const std::string& path);
std::string write_config(const ScenarioSpec& spec);

}  // namespace rdq
