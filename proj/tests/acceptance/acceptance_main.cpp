// Acceptance criteria, one PASS/FAIL line each.
//
//   acceptance            run every criterion
//   acceptance AC2 AC5    run a subset
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "test_helpers.hpp"
#include "unimet/unimet.hpp"

using namespace unimet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

WeightVector random_mu(std::size_t n, SeededRng& rng) {
  std::vector<double> w(n);
  for (double& x : w) x = 1.0 - rng.uniform();
  std::sort(w.begin(), w.end(), std::greater<>());
  return WeightVector(w);
}

std::vector<double> as_vec(const WeightVector& w) { return {w.values().begin(), w.values().end()}; }

// ---------------------------------------------------------------------------

Outcome ac1_worked_example() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = cplx(0, -1);
  const auto u = validate_unitary(m);
  (void)eigenphase_spectrum(u);  // warm-up

  std::vector<double> times;
  EigenphaseSpectrum s;
  for (int k = 0; k < 11; ++k) {
    const auto t0 = Clock::now();
    s = eigenphase_spectrum(u);
    times.push_back(seconds_since(t0));
  }
  std::sort(times.begin(), times.end());
  const double ms = times[times.size() / 2] * 1e3;
  const double err = std::max({std::abs(s.phases_desc[0] - 0.0), std::abs(s.phases_desc[1] + pi / 2),
                               std::abs(s.abs_phases_desc[0] - pi / 2), std::abs(s.abs_phases_desc[1] - 0.0)});
  return {err <= 1e-15 && ms < 1.0,
          fmt("theta=(%.17g, %.17g) |theta|=(%.17g, %.17g) max err %.1e, median %.4f ms (< 1 ms)", s.phases_desc[0],
              s.phases_desc[1], s.abs_phases_desc[0], s.abs_phases_desc[1], err, ms)};
}

Outcome ac2_scatter() {
  ExperimentConfig cfg;
  cfg.dims = {2, 3, 4};
  cfg.samples = 1000;
  cfg.seed = 1;
  cfg.weights = parse_weight_specs("all");
  cfg.collapse_nenorm = false;
  cfg.tolerance = 1e-9;
  const auto t0 = Clock::now();
  const auto r = run_scatter(cfg);
  const double secs = seconds_since(t0);
  std::size_t upper = 0, lower = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& s : r.summaries) {
    upper += s.violations;
    lower += s.lower_violations;
    worst = std::min(worst, s.min_slack);
  }
  return {upper == 0 && lower == 0 && secs < 60.0,
          fmt("%zu records in %zu panels, slack<-1e-9: %zu, lower-bound violations: %zu, min slack %.3e, %.1f s (< 60 s)",
              r.records.size(), r.summaries.size(), upper, lower, worst, secs)};
}

Outcome ac3_phase_optimization_gap() {
  ExperimentConfig cfg;
  cfg.dims = {2};
  cfg.samples = 1000;
  cfg.seed = 1;
  cfg.weights = parse_weight_specs("lambda:1");
  const auto r = run_scatter(cfg);
  const auto pc = compare_variants(r, 2, "lambda_1");
  const double z = pc.std_error > 0 ? pc.mean_difference / pc.std_error : 0.0;
  return {pc.count == 1000 && pc.mean_difference - 3.0 * pc.std_error > 0.0,
          fmt("mean(nu slack) - mean(Nu slack) = %.4f, std err %.4f (%.1f sigma, need > 3) over %zu pairs",
              pc.mean_difference, pc.std_error, z, pc.count)};
}

Outcome ac4_collapse_relations() {
  std::size_t checks = 0, fail_double = 0, fail_odd = 0;
  double worst_double = 0.0, worst_odd = 0.0;
  std::string first_odd;
  for (int n = 2; n <= 6; ++n) {
    for (std::uint64_t k = 0; k < 200; ++k) {
      SeededRng rng(4, scatter_stream(n, k));
      const auto s = eigenphase_spectrum(haar_unitary(n, rng));
      const auto nn = static_cast<std::size_t>(n);
      auto nu = [&](std::size_t m) { return nenorm(s, WeightVector::lambda(m, nn)).value; };
      const double d = std::abs(nu(2) - 2.0 * nu(1));
      ++checks;
      worst_double = std::max(worst_double, d);
      if (d > 1e-9) ++fail_double;
      for (std::size_t j = 1; 2 * j + 1 <= nn; ++j) {
        const double e = std::abs(nu(2 * j + 1) - nu(2 * j));
        ++checks;
        if (e > worst_odd) worst_odd = e;
        if (e > 1e-9) {
          if (fail_odd == 0) first_odd = fmt("first at n=%d j=%zu: |Nu_%zu - Nu_%zu| = %.3g", n, j, 2 * j + 1, 2 * j, e);
          ++fail_odd;
        }
      }
    }
  }
  return {fail_double == 0 && fail_odd == 0,
          fmt("%zu checks; Nu2=2Nu1 failures %zu (worst %.1e); Nu(2j+1)=Nu(2j) failures %zu (worst %.3g)%s%s", checks,
              fail_double, worst_double, fail_odd, worst_odd, first_odd.empty() ? "" : "; ", first_odd.c_str())};
}

Outcome ac5_nenorm_exactness() {
  constexpr std::size_t grid = 1'000'000;
  std::size_t bad = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + k % 5;
    SeededRng rng(5, static_cast<std::uint64_t>(k));
    const auto u = haar_unitary(n, rng);
    const auto mu = random_mu(static_cast<std::size_t>(n), rng);
    const auto s = eigenphase_spectrum(u);
    const double exact = nenorm(s, mu).value;
    const double g = oracle::nenorm_grid(s.unordered_phases(), as_vec(mu), grid).value;
    const double bound = 2.0 * pi / grid * mu.sum();
    // the grid can only overshoot the true minimum
    const bool ok = exact <= g + 1e-12 && g - exact <= bound;
    if (!ok) ++bad;
    worst_ratio = std::max(worst_ratio, (g - exact) / bound);
  }
  return {bad == 0, fmt("200 unitaries, n<=5, 1e6-point grid: %zu outside bound; worst gap %.3f x (2pi/1e6)*sum(mu)",
                        bad, worst_ratio)};
}

Outcome ac6_pauli_extremality() {
  const auto x = validate_unitary(oracle::pauli('x'));
  const auto y = validate_unitary(oracle::pauli('y'));
  const auto z = validate_unitary(oracle::pauli('z'));
  double worst = 0.0;
  SeededRng rng(6);
  for (int k = 0; k < 20; ++k) {
    const auto mu = random_mu(2, rng);
    const double target = pi * mu.sum();
    for (const auto& [a, b] : {std::pair{&x, &y}, std::pair{&y, &z}, std::pair{&z, &x}}) {
      worst = std::max(worst, std::abs(noncommutativity(*a, *b, mu) - target));
    }
  }
  return {worst <= 1e-9, fmt("20 weights x 3 pairs: max |C - pi*sum(mu)| = %.2e (<= 1e-9)", worst)};
}

Outcome ac7_derivative_law() {
  double worst = 0.0, worst_oracle = 0.0;
  SeededRng rng(7);
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 4;
    const auto h = random_hermitian(n, rng);
    const auto mu = random_mu(static_cast<std::size_t>(n), rng);
    // independent route: (U - U^dag)/2i of a Taylor exponential has eigenvalues -sin(lambda t)
    const ComplexMatrix u = oracle::expm(cplx(0, -1e-3) * h.matrix());
    const ComplexMatrix s = (u - u.adjoint()) / cplx(0, 2);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s, Eigen::EigenvaluesOnly);
    std::vector<double> abs_phase;
    for (double x : es.eigenvalues()) abs_phase.push_back(std::abs(std::asin(x)));
    std::sort(abs_phase.begin(), abs_phase.end(), std::greater<>());
    const double fd_oracle = oracle::weighted(abs_phase, as_vec(mu)) / 1e-3;
    const auto r = derivative_check_enorm(h, mu, 1e-3);
    worst = std::max(worst, std::abs(r.fd_estimate - r.analytic));
    worst_oracle = std::max(worst_oracle, std::abs(fd_oracle - r.analytic));
  }
  return {worst <= 1e-9 && worst_oracle <= 1e-9,
          fmt("50 Hamiltonians, n<=4, t=1e-3: max |nu(e^{-iHt})/t - sum mu|lambda|| = %.2e, via Taylor exponential "
              "%.2e (<= 1e-9)",
              worst, worst_oracle)};
}

Outcome ac8_curvature_law() {
  double worst_fine = 0.0;
  std::size_t not_decreasing = 0;
  SeededRng rng(8);
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 2;
    const auto h1 = random_hermitian(n, rng);
    const auto h2 = random_hermitian(n, rng);
    const auto mu = random_mu(static_cast<std::size_t>(n), rng);
    const auto coarse = curvature_check_comm(h1, h2, mu, 1e-2);
    const auto fine = curvature_check_comm(h1, h2, mu, 1e-3);
    const double e1 = std::abs(coarse.scaled_estimate - coarse.analytic) / coarse.analytic;
    const double e2 = std::abs(fine.scaled_estimate - fine.analytic) / fine.analytic;
    worst_fine = std::max(worst_fine, e2);
    if (!(e2 < e1)) ++not_decreasing;
  }
  return {worst_fine <= 1e-2 && not_decreasing == 0,
          fmt("50 pairs, n<=3: max relative error at t=1e-3 %.2e (<= 1e-2); non-decreasing from t=1e-2: %zu",
              worst_fine, not_decreasing)};
}

Outcome ac9_equality_construction() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 1 + seed % 5;
    const auto [u, v] = construct_equality_pair(n, seed);
    for (std::size_t m = 1; m <= n; ++m) {
      const auto mu = WeightVector::lambda(m, n);
      worst = std::max(worst, std::abs(enorm(u * v, mu) - enorm(u, mu) - enorm(v, mu)));
    }
  }
  return {worst <= 1e-10, fmt("100 seeded pairs, n<=5, all lambda: max |nu(UV) - nu(U) - nu(V)| = %.2e (<= 1e-10)",
                              worst)};
}

Outcome ac10_resource_machinery() {
  double worst_perm = 0.0;
  SeededRng rng(10);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(k % 6);
    std::vector<double> x(n), y(n);
    for (double& v : x) v = rng.uniform(-2, 2);
    for (double& v : y) v = rng.uniform(-2, 2);
    std::sort(x.begin(), x.end(), std::greater<>());
    worst_perm = std::max(worst_perm, std::abs(rearrangement_max(x, y) - oracle::brute_rearrangement(x, y)));
  }

  double worst_de = 0.0;
  std::size_t median_bad = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(k % 8);
    std::vector<double> e(n), p(n);
    for (double& v : e) v = rng.uniform(-3, 3);
    for (double& v : p) v = rng.uniform();
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= total;
    worst_de = std::max(worst_de, std::abs(mean_abs_dev_from_median(e, p) - oracle::deviation_grid_min(e, p, -3.5, 3.5,
                                                                                                     100000)));
    const auto m = median_energy(e, p);
    for (int g = 0; g <= 2000; ++g) {
      const double xg = -3.5 + 7.0 * g / 2000.0;
      double below = 0.0, above = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (e[j] <= xg) below += p[j];
        if (e[j] >= xg) above += p[j];
      }
      const bool valid = below >= 0.5 - 1e-12 && above >= 0.5 - 1e-12;
      if (valid != (xg >= m.lo && xg <= m.hi)) ++median_bad;
    }
  }
  return {worst_perm <= 1e-12 && worst_de <= 1e-12 && median_bad == 0,
          fmt("rearrangement vs n! brute force max err %.1e; DE vs grid minimum max err %.1e; median interval grid "
              "mismatches %zu",
              worst_perm, worst_de, median_bad)};
}

Outcome ac11_metric_axioms() {
  constexpr double tol = 1e-9;
  std::size_t f_sym = 0, f_bi = 0, f_tri = 0, f_gauge = 0;
  SeededRng rng(11);
  for (int k = 0; k < 500; ++k) {
    const int n = 1 + k % 5;
    const auto u = haar_unitary(n, rng);
    const auto v = haar_unitary(n, rng);
    const auto w = haar_unitary(n, rng);
    const auto mu = random_mu(static_cast<std::size_t>(n), rng);
    const double x = rng.uniform(-pi, pi);
    const double y = rng.uniform(-pi, pi);

    const double d = emetric(u, v, mu);
    const double nd = nemetric(u, v, mu);
    if (std::abs(d - emetric(v, u, mu)) > tol || std::abs(nd - nemetric(v, u, mu)) > tol) ++f_sym;
    if (std::abs(emetric(u * w, v * w, mu) - d) > tol || std::abs(emetric(w * u, w * v, mu) - d) > tol ||
        std::abs(nemetric(u * w, v * w, mu) - nd) > tol || std::abs(nemetric(w * u, w * v, mu) - nd) > tol) {
      ++f_bi;
    }
    if (emetric(u, w, mu) > emetric(u, v, mu) + emetric(v, w, mu) + tol ||
        nemetric(u, w, mu) > nemetric(u, v, mu) + nemetric(v, w, mu) + tol) {
      ++f_tri;
    }
    if (std::abs(nemetric(u.phase_shifted(x), v.phase_shifted(y), mu) - nd) > tol ||
        nemetric(u, u.phase_shifted(x), mu) > tol) {
      ++f_gauge;
    }
  }
  return {f_sym + f_bi + f_tri + f_gauge == 0,
          fmt("500 trials each at 1e-9: symmetry %zu, bi-invariance %zu, triangle %zu, gauge %zu failures", f_sym, f_bi,
              f_tri, f_gauge)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1_worked_example},     {"AC2", ac2_scatter},
      {"AC3", ac3_phase_optimization_gap},       {"AC4", ac4_collapse_relations},
      {"AC5", ac5_nenorm_exactness},   {"AC6", ac6_pauli_extremality},
      {"AC7", ac7_derivative_law},     {"AC8", ac8_curvature_law},
      {"AC9", ac9_equality_construction}, {"AC10", ac10_resource_machinery},
      {"AC11", ac11_metric_axioms},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);

  int failures = 0;
  int ran = 0;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%-5s %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matched\n");
    return 2;
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
