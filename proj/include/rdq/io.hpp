#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rdq/core.hpp"
#include "rdq/engine.hpp"
#include "rdq/oracle.hpp"

namespace rdq {

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// `time,kind,job_id,qe_class,queue_potential,cum_reward`
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);
std::string trace_json(const SimulationTrace& trace);

/// served / dropped / U / epoch arrays plus run metadata, as a JSON object.
std::string metrics_json(const SimulationTrace& trace, std::string_view policy);

/// `id,arrival,service,deadline,reward`, header required. Throws
/// std::runtime_error naming the line on malformed input.
std::vector<Job> read_instance_csv(std::istream& in);
std::vector<Job> load_instance_csv(const std::string& path);
void write_instance_csv(std::ostream& out, std::span<const Job> jobs);

std::string oracle_json(const OracleResult& result);

}  // namespace rdq
