#pragma once

// Monte Carlo scatter experiments: for Haar pairs (U, V), compare nu(UV)
// against nu(U) + nu(V) (and the phase-optimized Nu) for a set of weight
// vectors, and serialize the samples as CSV, JSON, or SVG scatter plots.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unimet/core.hpp"
#include "unimet/errors.hpp"
#include "unimet/haar.hpp"
#include "unimet/metrics.hpp"
#include "unimet/rng.hpp"

namespace unimet {

enum class Variant { enorm, nenorm };

inline std::string_view to_string(Variant v) { return v == Variant::enorm ? "enorm" : "nenorm"; }

enum class OutputFormat { csv, json, svg };

inline OutputFormat parse_format(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  if (s == "svg") return OutputFormat::svg;
  throw input_error("unknown format '" + std::string(s) + "' (expected csv, json or svg)");
}

/// Formats a double with 17 significant digits, enough to round-trip.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Weight specifications
//
//   all              every lambda^(m), m = 1..n
//   lambda:<m>       lambda^(m) (skipped for n < m); "lambda:n" means m = n
//   <m>              shorthand for lambda:<m>
//   mu:a,b,...       explicit weights, applied to dimensions matching their length
//
// Items are separated by ';'.

struct WeightSpec {
  enum class Kind { all_lambdas, lambda, explicit_mu };
  Kind kind = Kind::all_lambdas;
  std::size_t m = 0;  // 0 with Kind::lambda means m = n
  std::vector<double> mu;
};

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto end = pos == std::string_view::npos ? text.size() : pos;
    out.emplace_back(text.substr(start, end - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw input_error("not a number: '" + s + "'");
  }
  if (used != s.size()) throw input_error("not a number: '" + s + "'");
  return v;
}

inline std::size_t parse_positive(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw input_error("not a positive integer: '" + s + "'");
  }
  if (used != s.size() || v == 0) throw input_error("not a positive integer: '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : detail::split(text, ',')) out.push_back(detail::parse_double(detail::trim(item)));
  return out;
}

inline std::vector<WeightSpec> parse_weight_specs(std::string_view text) {
  std::vector<WeightSpec> specs;
  for (const auto& raw : detail::split(text, ';')) {
    const std::string item = detail::trim(raw);
    if (item.empty()) continue;
    WeightSpec spec;
    if (item == "all") {
      spec.kind = WeightSpec::Kind::all_lambdas;
    } else if (item.rfind("mu:", 0) == 0) {
      spec.kind = WeightSpec::Kind::explicit_mu;
      spec.mu = parse_real_list(item.substr(3));
      WeightVector check(spec.mu);  // validates admissibility
    } else {
      spec.kind = WeightSpec::Kind::lambda;
      const std::string m = item.rfind("lambda:", 0) == 0 ? item.substr(7) : item;
      spec.m = m == "n" ? 0 : detail::parse_positive(m);
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw input_error("empty weight specification");
  return specs;
}

struct ResolvedWeight {
  std::string label;
  WeightVector mu;
  std::size_t lambda_m = 0;  // 0 for explicit weights
};

inline std::string explicit_label(std::span<const double> mu) {
  std::string label = "mu";
  for (double x : mu) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%g", x);
    label += buf;
  }
  return label;
}

inline std::vector<ResolvedWeight> resolve_weights(std::span<const WeightSpec> specs, std::size_t n) {
  std::vector<ResolvedWeight> out;
  auto push = [&](ResolvedWeight w) {
    for (const auto& existing : out) {
      if (existing.label == w.label) return;
    }
    out.push_back(std::move(w));
  };
  for (const auto& s : specs) {
    switch (s.kind) {
      case WeightSpec::Kind::all_lambdas:
        for (std::size_t m = 1; m <= n; ++m) push({"lambda_" + std::to_string(m), WeightVector::lambda(m, n), m});
        break;
      case WeightSpec::Kind::lambda: {
        const std::size_t m = s.m == 0 ? n : s.m;
        if (m <= n) push({"lambda_" + std::to_string(m), WeightVector::lambda(m, n), m});
        break;
      }
      case WeightSpec::Kind::explicit_mu:
        if (s.mu.size() == n) push({explicit_label(s.mu), WeightVector(s.mu), 0});
        break;
    }
  }
  return out;
}

/// For the phase-optimized variant some lambda^(m) are determined by others:
/// Nu_{lambda^(2)} = 2 Nu_{lambda^(1)}, and Nu_{lambda^(n)} = Nu_{lambda^(n-1)}
/// when n is odd. Collapsing keeps m = 1 and m = n and drops the duplicates
/// in between.
inline bool nenorm_redundant(std::size_t m, std::size_t n) {
  if (m == 2 && n > 2) return true;
  return n >= 3 && n % 2 == 1 && m == n - 1;
}

// ---------------------------------------------------------------------------
// Configuration and records

struct ExperimentConfig {
  std::vector<int> dims{2, 3, 4};
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::vector<WeightSpec> weights{WeightSpec{}};
  double tolerance = 1e-9;
  std::string output_dir = ".";
  bool collapse_nenorm = true;
  std::size_t threads = 0;  // 0: hardware concurrency, capped by UNIMET_THREADS

  void validate() const {
    if (samples < 1) throw input_error("samples must be >= 1");
    if (dims.empty()) throw input_error("at least one dimension is required");
    for (int n : dims) {
      if (n < 1) throw input_error("dimensions must be >= 1");
    }
    if (!(tolerance > 0.0)) throw input_error("tolerance must be positive");
    if (weights.empty()) throw input_error("at least one weight specification is required");
  }
};

inline std::vector<int> parse_dims(std::string_view text) {
  std::vector<int> dims;
  for (const auto& item : detail::split(text, ',')) {
    dims.push_back(static_cast<int>(detail::parse_positive(detail::trim(item))));
  }
  return dims;
}

/// Stream id of the pair drawn for (n, sample_id). Pairs are shared across
/// weights and variants, so enorm and nenorm slacks are paired samples.
inline std::uint64_t scatter_stream(int n, std::uint64_t sample_id) {
  return (static_cast<std::uint64_t>(n) << 32) | (sample_id & 0xffffffffULL);
}

struct ScatterRecord {
  int n = 0;
  std::string weight_label;
  std::uint64_t sample_id = 0;
  double lhs = 0.0;  // nu(UV)
  double rhs = 0.0;  // nu(U) + nu(V)
  double slack = 0.0;
  double lower_margin = 0.0;  // nu(UV) - |nu(U) - nu(V)|
  Variant variant = Variant::enorm;
};

struct ScatterSummary {
  int n = 0;
  std::string weight_label;
  Variant variant = Variant::enorm;
  std::size_t count = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  double stddev_slack = 0.0;
  double max_slack = 0.0;
  double min_lower_margin = 0.0;
  std::size_t violations = 0;        // slack < -tolerance
  std::size_t lower_violations = 0;  // lower_margin < -tolerance
};

struct ScatterResult {
  std::vector<ScatterRecord> records;
  std::vector<ScatterSummary> summaries;

  std::size_t total_violations() const {
    std::size_t v = 0;
    for (const auto& s : summaries) v += s.violations + s.lower_violations;
    return v;
  }
};

using PairSource =
    std::function<std::pair<UnitaryMatrix, UnitaryMatrix>(int n, std::uint64_t sample_id, SeededRng& rng)>;

inline std::pair<UnitaryMatrix, UnitaryMatrix> haar_pair(int n, std::uint64_t, SeededRng& rng) {
  auto u = haar_unitary(n, rng);
  auto v = haar_unitary(n, rng);
  return {std::move(u), std::move(v)};
}

// ---------------------------------------------------------------------------
// Workers

inline std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("UNIMET_THREADS")) {
    try {
      const auto c = detail::parse_positive(cap);
      n = std::min(n, c);
    } catch (const input_error&) {
      throw input_error("UNIMET_THREADS must be a positive integer");
    }
  }
  return n;
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Work items must
/// write to disjoint outputs; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Scatter

inline ScatterSummary summarize(std::span<const ScatterRecord> recs, double tolerance) {
  ScatterSummary s;
  if (recs.empty()) return s;
  s.n = recs.front().n;
  s.weight_label = recs.front().weight_label;
  s.variant = recs.front().variant;
  s.count = recs.size();
  s.min_slack = std::numeric_limits<double>::infinity();
  s.max_slack = -std::numeric_limits<double>::infinity();
  s.min_lower_margin = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& r : recs) {
    sum += r.slack;
    s.min_slack = std::min(s.min_slack, r.slack);
    s.max_slack = std::max(s.max_slack, r.slack);
    s.min_lower_margin = std::min(s.min_lower_margin, r.lower_margin);
    if (r.slack < -tolerance) ++s.violations;
    if (r.lower_margin < -tolerance) ++s.lower_violations;
  }
  s.mean_slack = sum / static_cast<double>(recs.size());
  double ss = 0.0;
  for (const auto& r : recs) ss += (r.slack - s.mean_slack) * (r.slack - s.mean_slack);
  s.stddev_slack = recs.size() > 1 ? std::sqrt(ss / static_cast<double>(recs.size() - 1)) : 0.0;
  return s;
}

/// Draws cfg.samples pairs per dimension and evaluates both inequalities of
/// the multiplicative triangle bound for every weight and variant. Records
/// are ordered by (dimension, weight, variant, sample_id) regardless of how
/// many workers ran.
inline ScatterResult run_scatter(const ExperimentConfig& cfg, const PairSource& source = haar_pair) {
  cfg.validate();
  const std::size_t workers = worker_count(cfg.threads);
  ScatterResult result;

  for (int n : cfg.dims) {
    const auto weights = resolve_weights(cfg.weights, static_cast<std::size_t>(n));
    struct Task {
      std::size_t weight;
      Variant variant;
    };
    std::vector<Task> tasks;
    for (std::size_t w = 0; w < weights.size(); ++w) {
      tasks.push_back({w, Variant::enorm});
      const bool skip = cfg.collapse_nenorm && weights[w].lambda_m != 0 &&
                        nenorm_redundant(weights[w].lambda_m, static_cast<std::size_t>(n));
      if (!skip) tasks.push_back({w, Variant::nenorm});
    }
    if (tasks.empty()) continue;

    // slots[task][sample]
    std::vector<std::vector<ScatterRecord>> slots(tasks.size(), std::vector<ScatterRecord>(cfg.samples));
    parallel_for(cfg.samples, workers, [&](std::size_t sample) {
      SeededRng rng(cfg.seed, scatter_stream(n, sample));
      const auto [u, v] = source(n, sample, rng);
      require_same_dim(u.dim(), n, "run_scatter");
      require_same_dim(v.dim(), n, "run_scatter");
      const auto su = eigenphase_spectrum(u);
      const auto sv = eigenphase_spectrum(v);
      const auto suv = eigenphase_spectrum(u * v);
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& mu = weights[tasks[t].weight].mu;
        double a = 0.0;
        double b = 0.0;
        double c = 0.0;
        if (tasks[t].variant == Variant::enorm) {
          a = enorm(su, mu);
          b = enorm(sv, mu);
          c = enorm(suv, mu);
        } else {
          a = nenorm(su, mu).value;
          b = nenorm(sv, mu).value;
          c = nenorm(suv, mu).value;
        }
        ScatterRecord& r = slots[t][sample];
        r.n = n;
        r.weight_label = weights[tasks[t].weight].label;
        r.variant = tasks[t].variant;
        r.sample_id = sample;
        r.lhs = c;
        r.rhs = a + b;
        r.slack = r.rhs - r.lhs;
        r.lower_margin = c - std::abs(a - b);
      }
    });

    for (auto& task_records : slots) {
      result.summaries.push_back(summarize(task_records, cfg.tolerance));
      for (auto& r : task_records) result.records.push_back(std::move(r));
    }
  }
  if (result.records.empty()) throw input_error("no weight specification applies to the requested dimensions");
  return result;
}

struct PairedComparison {
  std::size_t count = 0;
  double mean_difference = 0.0;  // mean(enorm slack - nenorm slack)
  double std_error = 0.0;
};

/// Paired comparison of enorm and nenorm slacks over the same sample pairs.
inline PairedComparison compare_variants(const ScatterResult& result, int n, std::string_view label) {
  std::map<std::uint64_t, double> enorm_slack;
  std::vector<double> diffs;
  for (const auto& r : result.records) {
    if (r.n == n && r.weight_label == label && r.variant == Variant::enorm) enorm_slack[r.sample_id] = r.slack;
  }
  for (const auto& r : result.records) {
    if (r.n != n || r.weight_label != label || r.variant != Variant::nenorm) continue;
    const auto it = enorm_slack.find(r.sample_id);
    if (it != enorm_slack.end()) diffs.push_back(it->second - r.slack);
  }
  PairedComparison pc;
  pc.count = diffs.size();
  if (diffs.empty()) return pc;
  double sum = 0.0;
  for (double d : diffs) sum += d;
  pc.mean_difference = sum / static_cast<double>(diffs.size());
  if (diffs.size() > 1) {
    double ss = 0.0;
    for (double d : diffs) ss += (d - pc.mean_difference) * (d - pc.mean_difference);
    pc.std_error = std::sqrt(ss / static_cast<double>(diffs.size() - 1) / static_cast<double>(diffs.size()));
  }
  return pc;
}

// ---------------------------------------------------------------------------
// Serialization

inline void write_scatter_csv(std::ostream& out, std::span<const ScatterRecord> records) {
  out << "n,weight_label,variant,sample_id,lhs,rhs,slack\n";
  for (const auto& r : records) {
    out << r.n << ',' << r.weight_label << ',' << to_string(r.variant) << ',' << r.sample_id << ','
        << format_real(r.lhs) << ',' << format_real(r.rhs) << ',' << format_real(r.slack) << '\n';
  }
}

inline nlohmann::json config_metadata(const ExperimentConfig& cfg) {
  return nlohmann::json{{"seed", cfg.seed},
                        {"samples", cfg.samples},
                        {"dims", cfg.dims},
                        {"tolerance", cfg.tolerance},
                        {"rng", std::string(SeededRng::algorithm)},
                        {"stream_id", "(n << 32) | sample_id"},
                        {"collapse_nenorm", cfg.collapse_nenorm}};
}

inline nlohmann::json summaries_to_json(const ScatterResult& result, const ExperimentConfig& cfg) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : result.summaries) {
    rows.push_back({{"n", s.n},
                    {"weight_label", s.weight_label},
                    {"variant", std::string(to_string(s.variant))},
                    {"count", s.count},
                    {"min_slack", s.min_slack},
                    {"mean_slack", s.mean_slack},
                    {"stddev_slack", s.stddev_slack},
                    {"max_slack", s.max_slack},
                    {"min_lower_margin", s.min_lower_margin},
                    {"violations", s.violations},
                    {"lower_violations", s.lower_violations}});
  }
  return {{"meta", config_metadata(cfg)}, {"summaries", std::move(rows)}};
}

inline nlohmann::json records_to_json(std::span<const ScatterRecord> records) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"n", r.n},
                    {"weight_label", r.weight_label},
                    {"variant", std::string(to_string(r.variant))},
                    {"sample_id", r.sample_id},
                    {"lhs", r.lhs},
                    {"rhs", r.rhs},
                    {"slack", r.slack}});
  }
  return rows;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Scatter of lhs (vertical) against rhs (horizontal) on [0, axis_max]^2
/// with the lhs = rhs reference line.
inline void write_scatter_svg(std::ostream& out, std::span<const ScatterRecord> records, double axis_max,
                              std::string_view title) {
  constexpr double size = 400.0;
  constexpr double margin = 50.0;
  constexpr double plot = size - 2.0 * margin;
  const double scale = axis_max > 0.0 ? plot / axis_max : 1.0;
  auto px = [&](double v) { return margin + v * scale; };
  auto py = [&](double v) { return size - margin - v * scale; };
  char buf[160];

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"400\" height=\"400\" fill=\"white\"/>\n";
  out << "<text x=\"200\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
                margin, margin, plot, plot);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
                px(0.0), py(0.0), px(axis_max), py(axis_max));
  out << buf;
  for (int k = 0; k <= 4; ++k) {
    const double v = axis_max * k / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"10\">%.3g</text>\n", px(v),
                  size - margin + 14.0, v);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-size=\"10\">%.3g</text>\n",
                  margin - 4.0, py(v) + 3.0, v);
    out << buf;
  }
  const std::string sym = !records.empty() && records.front().variant == Variant::nenorm ? "Nu" : "nu";
  out << "<text x=\"200\" y=\"392\" text-anchor=\"middle\" font-size=\"12\">" << sym << "(U) + " << sym
      << "(V)</text>\n";
  out << "<text x=\"14\" y=\"200\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 200)\">"
      << sym << "(UV)</text>\n";
  out << "<g fill=\"steelblue\" fill-opacity=\"0.6\">\n";
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.6\"/>\n", px(r.rhs), py(r.lhs));
    out << buf;
  }
  out << "</g>\n</svg>\n";
}

/// Writes the requested artifact(s) plus summary.json into cfg.output_dir
/// and returns the paths written.
inline std::vector<std::string> write_scatter_outputs(const ScatterResult& result, const ExperimentConfig& cfg,
                                                      OutputFormat format) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto open = [&](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    written.push_back(p.string());
    return f;
  };

  switch (format) {
    case OutputFormat::csv: {
      auto f = open(dir / "scatter.csv");
      write_scatter_csv(f, result.records);
      break;
    }
    case OutputFormat::json: {
      auto f = open(dir / "scatter.json");
      f << nlohmann::json{{"meta", config_metadata(cfg)}, {"records", records_to_json(result.records)}}.dump(1)
        << '\n';
      break;
    }
    case OutputFormat::svg: {
      // Shared axis range for both variants of the same (n, weight).
      std::map<std::pair<int, std::string>, double> axis;
      for (const auto& r : result.records) {
        double& m = axis[{r.n, r.weight_label}];
        m = std::max({m, r.lhs, r.rhs});
      }
      std::size_t begin = 0;
      while (begin < result.records.size()) {
        const auto& first = result.records[begin];
        std::size_t end = begin;
        while (end < result.records.size() && result.records[end].n == first.n &&
               result.records[end].weight_label == first.weight_label &&
               result.records[end].variant == first.variant) {
          ++end;
        }
        const std::string stem = "scatter_n" + std::to_string(first.n) + "_" + first.weight_label + "_" +
                                 std::string(to_string(first.variant));
        auto f = open(dir / (stem + ".svg"));
        const double top = axis[{first.n, first.weight_label}];
        write_scatter_svg(f, std::span(result.records).subspan(begin, end - begin), top > 0.0 ? top * 1.05 : 1.0,
                          "n=" + std::to_string(first.n) + " " + first.weight_label + " " +
                              std::string(to_string(first.variant)));
        begin = end;
      }
      break;
    }
  }
  auto f = open(dir / "summary.json");
  f << summaries_to_json(result, cfg).dump(2) << '\n';
  return written;
}

}  // namespace unimet
