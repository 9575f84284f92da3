#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unimet/unimet.hpp"

namespace unimet::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_violation = 1;
inline constexpr int exit_input = 2;

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  std::string dims = "2,3,4";
  std::string weights = "all";
  double tolerance = 1e-9;
  std::string out = ".";
  std::string format = "csv";
  std::size_t threads = 0;
  bool no_collapse = false;
};

inline ExperimentConfig make_config(const GlobalOptions& g) {
  ExperimentConfig cfg;
  cfg.seed = g.seed;
  cfg.samples = g.samples;
  cfg.dims = parse_dims(g.dims);
  cfg.weights = parse_weight_specs(g.weights);
  cfg.tolerance = g.tolerance;
  cfg.output_dir = g.out;
  cfg.threads = g.threads;
  cfg.collapse_nenorm = !g.no_collapse;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// scatter

inline int cmd_scatter(const GlobalOptions& g, std::ostream& out) {
  const auto cfg = make_config(g);
  const auto format = parse_format(g.format);
  const auto result = run_scatter(cfg);
  const auto written = write_scatter_outputs(result, cfg, format);

  out << "n  weight        variant  count  min_slack     mean_slack    violations\n";
  for (const auto& s : result.summaries) {
    char line[160];
    std::snprintf(line, sizeof line, "%-2d %-13s %-8s %-6zu %-13.6g %-13.6g %zu\n", s.n, s.weight_label.c_str(),
                  std::string(to_string(s.variant)).c_str(), s.count, s.min_slack, s.mean_slack,
                  s.violations + s.lower_violations);
    out << line;
  }
  for (const auto& path : written) out << "wrote " << path << '\n';
  return result.total_violations() == 0 ? exit_ok : exit_violation;
}

// ---------------------------------------------------------------------------
// verify

inline int cmd_verify(const GlobalOptions& g, const std::string& replay, const std::string& inject, std::ostream& out) {
  if (!replay.empty()) {
    const auto r = replay_counterexample(replay);
    out << "invariant " << r.invariant << "\nrecorded margin " << format_real(r.recorded_margin)
        << "\nreplayed margin " << format_real(r.margin) << "\ntolerance " << format_real(r.tolerance) << '\n'
        << (r.passed() ? "PASS" : "FAIL") << '\n';
    return r.passed() ? exit_ok : exit_violation;
  }

  const auto cfg = make_config(g);
  std::optional<UnitaryMatrix> injected;
  if (!inject.empty()) injected = read_unitary(inject);
  const auto report = run_property_suite(cfg, injected);

  for (const auto& r : report.invariants) {
    char line[200];
    std::snprintf(line, sizeof line, "%-4s %-32s trials=%-6zu worst_margin=%.3e\n", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.trials, r.worst_margin);
    out << line;
    if (!r.passed) out << "     counterexample: " << r.counterexample << '\n';
  }
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = std::filesystem::path(cfg.output_dir) / "verify_report.json";
  std::ofstream(path) << suite_report_to_json(report, cfg).dump(2) << '\n';
  out << "wrote " << path.string() << '\n';
  return report.all_passed() ? exit_ok : exit_violation;
}

// ---------------------------------------------------------------------------
// compute

inline nlohmann::json phases_json(const EigenphaseSpectrum& s) { return s.phases_desc; }

inline int cmd_compute(const std::string& command, const std::vector<std::string>& files, const std::string& mu_text,
                       const std::string& probs_text, double unitary_tol, std::ostream& out) {
  const std::size_t needed = (command == "norm" || command == "nnorm" || command == "resource") ? 1 : 2;
  if (files.size() != needed) {
    throw input_error("compute " + command + ": expected " + std::to_string(needed) + " matrix file(s), got " +
                      std::to_string(files.size()));
  }
  std::vector<UnitaryMatrix> us;
  for (const auto& f : files) us.push_back(read_unitary(f, unitary_tol));
  for (const auto& u : us) require_same_dim(u.dim(), us.front().dim(), "compute");
  const auto n = static_cast<std::size_t>(us.front().dim());

  auto weights = [&]() {
    if (mu_text.empty()) return WeightVector::lambda(1, n);
    auto w = WeightVector(parse_real_list(mu_text));
    require_same_dim(static_cast<long>(w.size()), static_cast<long>(n), "--mu");
    return w;
  };

  nlohmann::json result;
  nlohmann::json meta{{"command", command}, {"files", files}, {"unitary_tolerance", unitary_tol}};
  result["argmin_x"] = nullptr;

  if (command == "resource") {
    if (probs_text.empty()) throw input_error("compute resource: --probs is required");
    const AmplitudeProfile profile(parse_real_list(probs_text));
    const auto spec = eigenphase_spectrum(us[0]);
    require_same_dim(static_cast<long>(profile.size()), static_cast<long>(n), "--probs");
    const auto m = nenorm(spec, profile.weights());
    result["value"] = m.value;
    result["argmin_x"] = m.argmin_x;
    result["phases"] = phases_json(spec);
    meta["probs"] = std::vector<double>(profile.probs().begin(), profile.probs().end());
  } else {
    const auto mu = weights();
    meta["mu"] = std::vector<double>(mu.values().begin(), mu.values().end());
    UnitaryMatrix operand = us[0];
    if (command == "dist" || command == "ndist") operand = us[0] * adjoint(us[1]);
    else if (command == "comm") operand = group_commutator(us[0], us[1]);
    else if (command != "norm" && command != "nnorm") throw input_error("unknown compute command '" + command + "'");
    const auto spec = eigenphase_spectrum(operand);
    result["phases"] = phases_json(spec);
    if (command == "nnorm" || command == "ndist") {
      const auto m = nenorm(spec, mu);
      result["value"] = m.value;
      result["argmin_x"] = m.argmin_x;
    } else {
      result["value"] = enorm(spec, mu);
    }
  }
  result["meta"] = std::move(meta);
  out << result.dump(2) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// haar

inline int cmd_haar(const GlobalOptions& g, int n, std::size_t count, bool write_files, std::ostream& out) {
  if (n < 1) throw input_error("haar: -n must be >= 1");
  if (count < 1) throw input_error("haar: --count must be >= 1");
  nlohmann::json doc;
  doc["meta"] = {{"seed", g.seed}, {"n", n}, {"rng", std::string(SeededRng::algorithm)},
                 {"stream_id", "(n << 32) | index"}};
  doc["matrices"] = nlohmann::json::array();
  for (std::size_t k = 0; k < count; ++k) {
    SeededRng rng(g.seed, scatter_stream(n, k));
    const auto u = haar_unitary(n, rng);
    if (write_files) {
      std::filesystem::create_directories(g.out);
      const auto path = std::filesystem::path(g.out) / ("haar_n" + std::to_string(n) + "_" + std::to_string(k) + ".json");
      write_matrix(path.string(), u.matrix());
      doc["matrices"].push_back(path.string());
    } else {
      doc["matrices"].push_back(matrix_to_json(u.matrix()));
    }
  }
  out << doc.dump(2) << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Eigenphase metrics on unitary matrices", "unimet"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--samples", g.samples, "samples per configuration / trials per invariant");
  app.add_option("--dims", g.dims, "comma-separated dimensions");
  app.add_option("--weights", g.weights, "weights: all; lambda:k; lambda:n; mu:a,b,...  (';'-separated)");
  app.add_option("--tolerance", g.tolerance, "violation tolerance");
  auto* out_opt = app.add_option("--out", g.out, "output directory");
  app.add_option("--format", g.format, "scatter output: csv, json or svg");
  app.add_option("--threads", g.threads, "worker threads (0: hardware concurrency)");

  auto* scatter = app.add_subcommand("scatter", "Haar Monte Carlo of the multiplicative triangle inequality");
  scatter->add_flag("--no-collapse", g.no_collapse, "keep nenorm panels that duplicate other weights");

  auto* verify = app.add_subcommand("verify", "run the randomized invariant suite");
  std::string replay;
  std::string inject;
  verify->add_option("--replay", replay, "recompute the margin stored in a counterexample file");
  verify->add_option("--inject", inject, "matrix file used as an extra operand where invariants accept one");

  auto* compute = app.add_subcommand("compute", "evaluate a measure on matrix files");
  std::string command;
  std::vector<std::string> files;
  std::string mu_text;
  std::string probs_text;
  double unitary_tol = default_unitary_tolerance;
  compute->add_option("command", command, "norm | nnorm | dist | ndist | comm | resource")
      ->required()
      ->check(CLI::IsMember({"norm", "nnorm", "dist", "ndist", "comm", "resource"}));
  compute->add_option("files", files, "matrix JSON files")->required();
  compute->add_option("--mu", mu_text, "non-increasing weights, comma-separated (default lambda^(1))");
  compute->add_option("--probs", probs_text, "non-increasing probabilities for resource");
  compute->add_option("--unitary-tolerance", unitary_tol, "max ||U^dag U - I|| accepted");

  auto* haar = app.add_subcommand("haar", "sample Haar-random unitaries");
  int haar_n = 2;
  std::size_t haar_count = 1;
  haar->add_option("-n", haar_n, "dimension");
  haar->add_option("--count", haar_count, "number of matrices");

  for (auto* sub : {scatter, verify, compute, haar}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input;
  }

  try {
    if (*scatter) return cmd_scatter(g, out);
    if (*verify) return cmd_verify(g, replay, inject, out);
    if (*compute) return cmd_compute(command, files, mu_text, probs_text, unitary_tol, out);
    if (*haar) return cmd_haar(g, haar_n, haar_count, out_opt->count() > 0, out);
  } catch (const input_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  }
  return exit_input;
}

}  // namespace unimet::cli
