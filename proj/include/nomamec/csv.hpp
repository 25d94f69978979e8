#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nomamec/error.hpp"
#include "nomamec/experiments.hpp"
#include "nomamec/oracle.hpp"

namespace nomamec::csv {

// Fixed, versioned CSV schemas. Each file opens with a "# <schema>" line and
// a column header; doubles are written with 17 significant digits so a
// write-then-read cycle reproduces every value bit for bit.

inline constexpr std::string_view sweep_schema = "nomamec-sweep v1";
inline constexpr std::string_view match_schema = "nomamec-match v1";
inline constexpr std::string_view verify_schema = "nomamec-verify v1";

inline constexpr std::string_view sweep_header =
    "scheme,variable,value,draws,feasible_draws,mean_energy_j,mean_beta1,common_draws,"
    "mean_energy_common_j,mean_beta1_common,n_case1,n_case2,n_case3,n_case4,n_case5,"
    "n_infeasible,mean_outage";
inline constexpr std::string_view match_header =
    "draw,users,base_stations,initial_energy_j,swap_energy_j,exhaustive_energy_j,optimal,"
    "stable,penalized,swaps,evaluations,final_scan_evaluations,swap_ms,exhaustive_ms";
inline constexpr std::string_view verify_header =
    "check,hard,pass,samples,failures,oracle_value,closed_form_value,abs_gap,rel_gap,"
    "tolerance,seed,digest";

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

namespace detail {

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParameterError("bad numeric field '" + s + "'");
  return v;
}

inline std::size_t to_size(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw ParameterError("bad integer field '" + s + "'");
  return static_cast<std::size_t>(v);
}

inline bool to_bool(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParameterError("bad boolean field '" + s + "'");
}

/// Reads the schema and header lines, then every data row.
inline std::vector<std::vector<std::string>> read_table(std::istream& in, std::string_view schema,
                                                        std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || line != "# " + std::string(schema))
    throw ParameterError("expected schema line '# " + std::string(schema) + "'");
  if (!std::getline(in, line) || line != header)
    throw ParameterError("unexpected column header");
  const std::size_t cols = split(std::string(header)).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (cells.size() != cols) throw ParameterError("row has the wrong number of columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

template <typename... Ts>
void write_row(std::ostream& out, const Ts&... cells) {
  bool first = true;
  ((out << (first ? "" : ",") << fmt(cells), first = false), ...);
  out << '\n';
}

}  // namespace detail

inline void write_sweep(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "# " << sweep_schema << '\n' << sweep_header << '\n';
  for (const auto& r : records) {
    out << to_string(r.scheme) << ',' << to_string(r.variable) << ',';
    detail::write_row(out, r.value, r.draws, r.feasible_draws, r.mean_energy_j, r.mean_beta1,
                      r.common_draws, r.mean_energy_common_j, r.mean_beta1_common,
                      r.case_counts[0], r.case_counts[1], r.case_counts[2], r.case_counts[3],
                      r.case_counts[4], r.case_counts[5], r.mean_outage);
  }
}

inline std::vector<TrialRecord> read_sweep(std::istream& in) {
  std::vector<TrialRecord> out;
  for (const auto& c : detail::read_table(in, sweep_schema, sweep_header)) {
    TrialRecord r;
    const auto scheme = parse_scheme(c[0]);
    const auto variable = parse_sweep_variable(c[1]);
    if (!scheme || !variable) throw ParameterError("unknown scheme or sweep variable");
    r.scheme = *scheme;
    r.variable = *variable;
    r.value = detail::to_double(c[2]);
    r.draws = detail::to_size(c[3]);
    r.feasible_draws = detail::to_size(c[4]);
    r.mean_energy_j = detail::to_double(c[5]);
    r.mean_beta1 = detail::to_double(c[6]);
    r.common_draws = detail::to_size(c[7]);
    r.mean_energy_common_j = detail::to_double(c[8]);
    r.mean_beta1_common = detail::to_double(c[9]);
    for (std::size_t k = 0; k < 6; ++k) r.case_counts[k] = detail::to_size(c[10 + k]);
    r.mean_outage = detail::to_double(c[16]);
    out.push_back(r);
  }
  return out;
}

inline void write_match(std::ostream& out, const std::vector<MatchRecord>& records) {
  out << "# " << match_schema << '\n' << match_header << '\n';
  for (const auto& r : records)
    detail::write_row(out, r.draw, r.users, r.base_stations, r.initial_energy_j, r.swap_energy_j,
                      r.exhaustive_energy_j, r.optimal, r.stable, r.penalized, r.swaps,
                      r.evaluations, r.final_scan_evaluations, r.swap_ms, r.exhaustive_ms);
}

inline std::vector<MatchRecord> read_match(std::istream& in) {
  std::vector<MatchRecord> out;
  for (const auto& c : detail::read_table(in, match_schema, match_header)) {
    MatchRecord r;
    r.draw = detail::to_size(c[0]);
    r.users = detail::to_size(c[1]);
    r.base_stations = detail::to_size(c[2]);
    r.initial_energy_j = detail::to_double(c[3]);
    r.swap_energy_j = detail::to_double(c[4]);
    r.exhaustive_energy_j = detail::to_double(c[5]);
    r.optimal = detail::to_bool(c[6]);
    r.stable = detail::to_bool(c[7]);
    r.penalized = detail::to_bool(c[8]);
    r.swaps = detail::to_size(c[9]);
    r.evaluations = detail::to_size(c[10]);
    r.final_scan_evaluations = detail::to_size(c[11]);
    r.swap_ms = detail::to_double(c[12]);
    r.exhaustive_ms = detail::to_double(c[13]);
    out.push_back(r);
  }
  return out;
}

/// Runtimes are left out by default so a repeated run gives identical bytes.
inline void write_verify(std::ostream& out, const std::vector<OracleReport>& reports,
                         bool timings = false) {
  out << "# " << verify_schema << '\n' << verify_header << (timings ? ",runtime_ms" : "") << '\n';
  for (const auto& r : reports) {
    std::string dig = r.digest;
    for (char& ch : dig)
      if (ch == ',' || ch == '\n') ch = ';';
    out << r.check << ',';
    out << fmt(r.hard) << ',' << fmt(r.pass) << ',' << fmt(r.samples) << ',' << fmt(r.failures)
        << ',' << fmt(r.oracle_value) << ',' << fmt(r.closed_form_value) << ','
        << fmt(r.abs_gap) << ',' << fmt(r.rel_gap) << ',' << fmt(r.tolerance) << ','
        << r.seed << ',' << dig;
    if (timings) out << ',' << fmt(r.runtime_ms);
    out << '\n';
  }
}

inline std::vector<OracleReport> read_verify(std::istream& in) {
  std::vector<OracleReport> out;
  for (const auto& c : detail::read_table(in, verify_schema, verify_header)) {
    OracleReport r;
    r.check = c[0];
    r.hard = detail::to_bool(c[1]);
    r.pass = detail::to_bool(c[2]);
    r.samples = detail::to_size(c[3]);
    r.failures = detail::to_size(c[4]);
    r.oracle_value = detail::to_double(c[5]);
    r.closed_form_value = detail::to_double(c[6]);
    r.abs_gap = detail::to_double(c[7]);
    r.rel_gap = detail::to_double(c[8]);
    r.tolerance = detail::to_double(c[9]);
    r.seed = std::strtoull(c[10].c_str(), nullptr, 10);
    r.digest = c[11];
    out.push_back(r);
  }
  return out;
}

}  // namespace nomamec::csv
