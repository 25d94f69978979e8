// nomamec: command-line front end for the NOMA-MEC offloading library.
//
//   nomamec solve  --config inst.json            one instance -> JSON
//   nomamec sweep  --config sweep.json [--baselines]   -> CSV
//   nomamec match  --config match.json           matching experiment -> CSV
//   nomamec verify [--quick] [--fault gain-sign-flip]  oracle battery

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nomamec/nomamec.hpp"

namespace {

using namespace nomamec;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--seed", c.seed, "root seed (overrides the config)");
  app->add_option("--out", c.out, "output directory (default: stdout)");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1u, 1024u));
}

Config load(const Common& c) {
  Config cfg = c.config.empty() ? Config{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

/// Writes through `fn` to <out>/<name>, or to stdout without --out.
template <typename Fn>
void emit(const Common& c, const std::string& name, Fn&& fn) {
  if (c.out.empty()) {
    fn(std::cout);
    return;
  }
  std::filesystem::create_directories(c.out);
  const auto path = std::filesystem::path(c.out) / name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  fn(f);
  std::cerr << "wrote " << path.string() << '\n';
}

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

int run_solve(const Common& c) {
  const Config cfg = load(c);
  if (cfg.servers.size() != 2) throw ConfigError("servers", "solve needs exactly two servers");
  TwoBsProblem prob;
  const std::array<ServerProfile, 2> servers{cfg.servers[0], cfg.servers[1]};
  if (cfg.links) {
    prob = make_two_bs_problem(cfg.params, cfg.task, *cfg.links, servers);
  } else {
    SweepPoint pt{cfg.params, cfg.task, servers, cfg.deployment};
    prob = draw_two_bs_problem(pt, cfg.seed.value_or(1));
  }
  const TwoBsSolution sol = solve(prob);
  nlohmann::ordered_json j;
  j["digest"] = digest(prob);
  j["h1"] = prob.h1();
  j["h2"] = prob.h2();
  j["bs_for_role"] = {prob.source[0], prob.source[1]};
  j["a_exponent"] = prob.a_exponent();
  j["perfect_csi"] = prob.csi == CsiMode::perfect;
  j["case"] = std::string(to_string(sol.label));
  j["beta1"] = number_or_null(sol.beta1);
  j["p1_w"] = number_or_null(sol.p1_w);
  j["p2_w"] = number_or_null(sol.p2_w);
  j["energy_j"] = number_or_null(sol.energy_j);
  j["beta1_upper"] = number_or_null(sol.beta1_upper);
  j["beta1_stationary"] = sol.beta1_stationary ? number_or_null(*sol.beta1_stationary)
                                               : nlohmann::ordered_json(nullptr);
  j["classifier_beta1"] = number_or_null(sol.classifier_beta1);
  j["classifier_matched"] = sol.classifier_matched;
  if (sol.feasible()) {
    const EceBreakdown e = ece_difference(sol.beta1, prob);
    j["ece"] = {{"total", e.total}, {"offload_part", e.offload_part},
                {"compute_part", e.compute_part}};
  }
  emit(c, "solution.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return 0;
}

int run_sweep_cmd(const Common& c, bool baselines) {
  SweepSpec spec = to_sweep_spec(load(c));
  spec.threads = c.threads;
  if (!baselines) {
    const auto records = run_sweep(spec);
    emit(c, "sweep.csv", [&](std::ostream& os) { csv::write_sweep(os, records); });
    return 0;
  }
  const SweepTable table = evaluate_sweep(spec, true);
  std::vector<TrialRecord> records;
  for (Scheme s : {Scheme::optimal, Scheme::priority_bs1, Scheme::priority_bs2}) {
    const auto part = aggregate(table, s);
    records.insert(records.end(), part.begin(), part.end());
  }
  emit(c, "sweep.csv", [&](std::ostream& os) { csv::write_sweep(os, records); });
  std::cerr << "baseline dominance: " << table.dominance_checked - table.dominance_violations
            << "/" << table.dominance_checked << " draws\n";
  return table.dominance_violations == 0 ? 0 : 1;
}

int run_match_cmd(const Common& c) {
  MatchingSpec spec = to_matching_spec(load(c));
  spec.threads = c.threads;
  const auto records = run_matching_experiment(spec);
  emit(c, "match.csv", [&](std::ostream& os) { csv::write_match(os, records); });
  std::size_t stable = 0, optimal = 0, penalized = 0;
  for (const auto& r : records) {
    stable += r.stable;
    optimal += r.optimal;
    penalized += r.penalized;
  }
  std::cerr << "stable " << stable << "/" << records.size();
  if (spec.exhaustive) std::cerr << ", optimal " << optimal << "/" << records.size();
  std::cerr << ", penalized " << penalized << "/" << records.size() << '\n';
  return stable == records.size() ? 0 : 1;
}

int run_verify_cmd(const Common& c, bool quick, const std::string& fault, bool timings) {
  VerifyOptions opt = to_verify_options(load(c), quick);
  opt.threads = c.threads;
  const auto f = parse_gain_fault(fault);
  if (!f) throw CLI::ValidationError("--fault", "expected none, gain-sign-flip or gain-unscaled");
  opt.fault = *f;
  const VerifySummary sum = run_verify(opt);
  if (!c.out.empty())
    emit(c, "verify.csv", [&](std::ostream& os) { csv::write_verify(os, sum.reports, timings); });
  for (const auto& r : sum.reports) {
    const char* tag = !r.hard ? "INFO" : r.pass ? "PASS" : "FAIL";
    std::cout << tag << "  " << r.check << "  samples=" << r.samples
              << " failures=" << r.failures << " worst_gap=" << r.rel_gap;
    if (timings) std::cout << " ms=" << r.runtime_ms;
    std::cout << '\n';
  }
  std::cout << "passed " << sum.passed << ", failed " << sum.failed << ", informational "
            << sum.informational << '\n';
  return sum.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-minimal NOMA-MEC offloading under imperfect CSI"};
  app.require_subcommand(1);

  Common solve_c, sweep_c, match_c, verify_c;
  auto* solve_cmd = app.add_subcommand("solve", "solve one two-BS instance, print JSON");
  add_common(solve_cmd, solve_c);

  bool baselines = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep, CSV of aggregated records");
  add_common(sweep_cmd, sweep_c);
  sweep_cmd->add_flag("--baselines", baselines, "also run the two priority baselines");

  auto* match_cmd = app.add_subcommand("match", "swap matching experiment, CSV per draw");
  add_common(match_cmd, match_c);

  bool quick = false, timings = false;
  std::string fault = "none";
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle battery");
  add_common(verify_cmd, verify_c);
  verify_cmd->add_flag("--quick", quick, "reduced sample counts");
  verify_cmd->add_flag("--timings", timings, "include runtimes in the report");
  verify_cmd->add_option("--fault", fault, "inject a gain-formula fault");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) return run_solve(solve_c);
    if (*sweep_cmd) return run_sweep_cmd(sweep_c, baselines);
    if (*match_cmd) return run_match_cmd(match_c);
    if (*verify_cmd) return run_verify_cmd(verify_c, quick, fault, timings);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
