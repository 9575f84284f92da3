#pragma once

// Randomized verification of the identities and inequalities satisfied by
// the metric family. Every invariant maps a drawn Instance to a margin; the
// invariant holds on that instance when margin >= -tolerance. The worst
// failing instance of each invariant is serialized so it can be replayed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "unimet/core.hpp"
#include "unimet/errors.hpp"
#include "unimet/experiments.hpp"
#include "unimet/haar.hpp"
#include "unimet/hermitian.hpp"
#include "unimet/matrix_io.hpp"
#include "unimet/metrics.hpp"
#include "unimet/resources.hpp"
#include "unimet/rng.hpp"

namespace unimet {

struct Instance {
  std::vector<UnitaryMatrix> unitaries;
  std::vector<HermitianMatrix> hermitians;
  std::vector<WeightVector> weights;
  std::vector<double> scalars;
};

struct Invariant {
  std::string name;
  double tolerance = 0.0;  // 0: use the suite tolerance
  bool accepts_injection = false;  // unitaries[0] may be replaced by a user matrix
  std::function<Instance(int n, SeededRng& rng)> draw;
  std::function<double(const Instance&)> margin;
};

// ---------------------------------------------------------------------------
// Helpers shared by the invariants

namespace suite {

inline WeightVector random_weights(std::size_t n, SeededRng& rng) {
  if (rng.uniform() < 0.25) {
    const auto m = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    return WeightVector::lambda(std::min(m, n), n);
  }
  std::vector<double> w(n);
  for (double& x : w) x = 1.0 - rng.uniform();  // (0, 1]
  std::sort(w.begin(), w.end(), std::greater<>());
  return WeightVector(std::move(w));
}

/// Largest distance on the unit circle after greedily matching two phase
/// multisets of equal size.
inline double circle_multiset_gap(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (double x : a) {
    std::size_t best = b.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(std::polar(1.0, x) - std::polar(1.0, b[k]));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

inline double equality_margin(double a, double b) { return -std::abs(a - b); }

inline UnitaryMatrix conjugate(const UnitaryMatrix& w, const UnitaryMatrix& u) { return (w * u) * adjoint(w); }

inline UnitaryMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return validate_unitary(m);
}

inline UnitaryMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return validate_unitary(m);
}

inline UnitaryMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return validate_unitary(m);
}

inline std::uint64_t name_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace suite

// ---------------------------------------------------------------------------
// The invariant catalogue

inline std::vector<Invariant> standard_invariants() {
  using namespace suite;
  std::vector<Invariant> inv;

  auto one_unitary = [](int n, SeededRng& rng) {
    Instance in;
    in.unitaries.push_back(haar_unitary_off_branch(n, rng));
    in.weights.push_back(random_weights(static_cast<std::size_t>(n), rng));
    return in;
  };
  auto unitaries = [](std::size_t count) {
    return [count](int n, SeededRng& rng) {
      Instance in;
      for (std::size_t k = 0; k < count; ++k) in.unitaries.push_back(haar_unitary(n, rng));
      in.weights.push_back(random_weights(static_cast<std::size_t>(n), rng));
      return in;
    };
  };

  // -- eigenphase conventions ------------------------------------------------
  inv.push_back({"inverse_phase_reflection", 1e-9, true, one_unitary, [](const Instance& in) {
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   const auto si = eigenphase_spectrum(adjoint(in.unitaries[0]));
                   // on the circle, so an eigenvalue -1 maps to itself
                   std::vector<double> negated = s.unordered_phases();
                   for (double& x : negated) x = -x;
                   return -circle_multiset_gap(si.unordered_phases(), negated);
                 }});
  inv.push_back({"inverse_abs_phases", 1e-9, true, unitaries(1), [](const Instance& in) {
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   const auto si = eigenphase_spectrum(adjoint(in.unitaries[0]));
                   double worst = 0.0;
                   for (std::size_t j = 0; j < s.dim(); ++j) {
                     worst = std::max(worst, std::abs(si.abs_phases_desc[j] - s.abs_phases_desc[j]));
                   }
                   return -worst;
                 }});
  inv.push_back({"phase_below_abs_phase", 0.0, true, unitaries(1), [](const Instance& in) {
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   double m = std::numeric_limits<double>::infinity();
                   for (std::size_t j = 0; j < s.dim(); ++j) m = std::min(m, s.abs_phases_desc[j] - s.phases_desc[j]);
                   return m;
                 }});
  inv.push_back({"power_spectrum", 1e-8, true,
                 [one_unitary](int n, SeededRng& rng) {
                   Instance in = one_unitary(n, rng);
                   in.scalars.push_back(rng.uniform(-3.0, 3.0));
                   return in;
                 },
                 [](const Instance& in) {
                   const double a = in.scalars[0];
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   std::vector<double> expected;
                   for (const auto& p : s.pairs) expected.push_back(wrap_phase(a * p.phase));
                   const auto sp = eigenphase_spectrum(matrix_power(in.unitaries[0], a));
                   return -circle_multiset_gap(sp.unordered_phases(), expected);
                 }});
  inv.push_back({"kron_spectrum", 1e-8, true,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.unitaries.push_back(haar_unitary(n, rng));
                   in.unitaries.push_back(haar_unitary(2, rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto s1 = eigenphase_spectrum(in.unitaries[0]);
                   const auto s2 = eigenphase_spectrum(in.unitaries[1]);
                   std::vector<double> expected;
                   for (const auto& a : s1.pairs) {
                     for (const auto& b : s2.pairs) expected.push_back(wrap_phase(a.phase + b.phase));
                   }
                   const auto sk = eigenphase_spectrum(kron(in.unitaries[0], in.unitaries[1]));
                   return -circle_multiset_gap(sk.unordered_phases(), expected);
                 }});

  // -- multiplicative triangle inequality ------------------------------------
  inv.push_back({"triangle_enorm", 0.0, true, unitaries(2), [](const Instance& in) {
                   const auto& mu = in.weights[0];
                   const double a = enorm(in.unitaries[0], mu);
                   const double b = enorm(in.unitaries[1], mu);
                   const double c = enorm(in.unitaries[0] * in.unitaries[1], mu);
                   return std::min(a + b - c, c - std::abs(a - b));
                 }});
  inv.push_back({"triangle_nenorm", 0.0, true, unitaries(2), [](const Instance& in) {
                   const auto& mu = in.weights[0];
                   const double a = nenorm(in.unitaries[0], mu).value;
                   const double b = nenorm(in.unitaries[1], mu).value;
                   const double c = nenorm(in.unitaries[0] * in.unitaries[1], mu).value;
                   return std::min(a + b - c, c - std::abs(a - b));
                 }});

  // -- metric axioms ---------------------------------------------------------
  inv.push_back({"metric_symmetry", 0.0, true, unitaries(2), [](const Instance& in) {
                   const auto& [u, v] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto& mu = in.weights[0];
                   return std::min(equality_margin(emetric(u, v, mu), emetric(v, u, mu)),
                                   equality_margin(nemetric(u, v, mu), nemetric(v, u, mu)));
                 }});
  inv.push_back({"metric_definiteness", 0.0, true, unitaries(2), [](const Instance& in) {
                   const auto& [u, v] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto& mu = in.weights[0];
                   return std::min(-emetric(u, u, mu), emetric(u, v, mu) - 1e-6);
                 }});
  inv.push_back({"metric_triangle", 0.0, true, unitaries(3), [](const Instance& in) {
                   const auto& [u, v, w] = std::tie(in.unitaries[0], in.unitaries[1], in.unitaries[2]);
                   const auto& mu = in.weights[0];
                   return std::min(emetric(u, v, mu) + emetric(v, w, mu) - emetric(u, w, mu),
                                   nemetric(u, v, mu) + nemetric(v, w, mu) - nemetric(u, w, mu));
                 }});
  inv.push_back({"metric_bi_invariance", 0.0, true, unitaries(3), [](const Instance& in) {
                   const auto& [u, v, w] = std::tie(in.unitaries[0], in.unitaries[1], in.unitaries[2]);
                   const auto& mu = in.weights[0];
                   const double d = emetric(u, v, mu);
                   const double nd = nemetric(u, v, mu);
                   return std::min({equality_margin(emetric(u * w, v * w, mu), d),
                                    equality_margin(emetric(w * u, w * v, mu), d),
                                    equality_margin(nemetric(u * w, v * w, mu), nd),
                                    equality_margin(nemetric(w * u, w * v, mu), nd)});
                 }});
  inv.push_back({"pseudometric_gauge", 0.0, true,
                 [unitaries](int n, SeededRng& rng) {
                   Instance in = unitaries(2)(n, rng);
                   in.scalars = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& [u, v] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto& mu = in.weights[0];
                   const double x = in.scalars[0];
                   const double y = in.scalars[1];
                   const double d = nemetric(u, v, mu);
                   return std::min({equality_margin(nemetric(u.phase_shifted(x), v.phase_shifted(y), mu), d),
                                    equality_margin(nemetric(u, u.phase_shifted(x), mu), 0.0),
                                    equality_margin(nenorm(u.phase_shifted(x), mu).value, nenorm(u, mu).value)});
                 }});

  // -- weight decomposition --------------------------------------------------
  inv.push_back({"enorm_decomposition", 1e-10, true, unitaries(1), [](const Instance& in) {
                   const auto& mu = in.weights[0];
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   const auto c = lambda_coefficients(mu);
                   double sum = 0.0;
                   for (std::size_t j = 0; j < c.size(); ++j) sum += c[j] * enorm(s, WeightVector::lambda(j + 1, c.size()));
                   return equality_margin(enorm(s, mu), sum);
                 }});
  inv.push_back({"nenorm_decomposition", 0.0, true, unitaries(1), [](const Instance& in) {
                   const auto& mu = in.weights[0];
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   const auto c = lambda_coefficients(mu);
                   double sum = 0.0;
                   for (std::size_t j = 0; j < c.size(); ++j) {
                     sum += c[j] * nenorm(s, WeightVector::lambda(j + 1, c.size())).value;
                   }
                   return nenorm(s, mu).value - sum;
                 }});

  // -- basic properties --------------------------------------------------------
  inv.push_back({"inverse_conjugation_invariance", 0.0, true, unitaries(2), [](const Instance& in) {
                   const auto& [u, w] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto& mu = in.weights[0];
                   const double e = enorm(u, mu);
                   const double ne = nenorm(u, mu).value;
                   const auto wuw = conjugate(w, u);
                   return std::min({equality_margin(enorm(adjoint(u), mu), e), equality_margin(enorm(wuw, mu), e),
                                    equality_margin(nenorm(adjoint(u), mu).value, ne),
                                    equality_margin(nenorm(wuw, mu).value, ne)});
                 }});
  inv.push_back({"weight_homogeneity", 0.0, true,
                 [unitaries](int n, SeededRng& rng) {
                   Instance in = unitaries(2)(n, rng);
                   in.scalars.push_back(rng.uniform(0.1, 10.0));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& [u, v] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto& mu = in.weights[0];
                   const double a = in.scalars[0];
                   const auto amu = mu.scaled(a);
                   return std::min({equality_margin(enorm(u, amu), a * enorm(u, mu)),
                                    equality_margin(nenorm(u, amu).value, a * nenorm(u, mu).value),
                                    equality_margin(noncommutativity(u, v, amu), a * noncommutativity(u, v, mu))});
                 }});
  inv.push_back({"power_bound", 0.0, true,
                 [unitaries](int n, SeededRng& rng) {
                   Instance in = unitaries(1)(n, rng);
                   in.scalars.push_back(rng.uniform(-3.0, 3.0));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& u = in.unitaries[0];
                   const auto& mu = in.weights[0];
                   const double b = in.scalars[0];
                   const auto s = eigenphase_spectrum(u);
                   const double scaled = std::abs(b) * enorm(s, mu);
                   const double powered = enorm(matrix_power(u, b), mu);
                   double m = scaled - powered;
                   if (std::abs(b) * s.abs_phases_desc.front() <= pi) m = std::min(m, equality_margin(scaled, powered));
                   return m;
                 }});
  inv.push_back({"nenorm_collapse", 0.0, true,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.unitaries.push_back(haar_unitary(std::max(n, 2), rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto s = eigenphase_spectrum(in.unitaries[0]);
                   const std::size_t n = s.dim();
                   auto nu = [&](std::size_t m) { return nenorm(s, WeightVector::lambda(m, n)).value; };
                   double m = equality_margin(nu(2), 2.0 * nu(1));
                   if (n >= 3 && n % 2 == 1) m = std::min(m, equality_margin(nu(n), nu(n - 1)));
                   return m;
                 }});
  inv.push_back({"enorm_range_sweep", 1e-9, false,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.weights.push_back(random_weights(static_cast<std::size_t>(n), rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& mu = in.weights[0];
                   const double total = mu.sum();
                   double worst = 0.0;
                   for (int k = 0; k < 100; ++k) {
                     const double target = pi * total * k / 99.0;
                     const std::vector<double> phases(mu.size(), target / total);
                     worst = std::max(worst, std::abs(enorm(UnitaryMatrix::diagonal(phases), mu) - target));
                   }
                   return -worst;
                 }});
  inv.push_back({"tensor_bounds", 0.0, true,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.unitaries.push_back(haar_unitary(n, rng));
                   in.unitaries.push_back(haar_unitary(2, rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& [u1, u2] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const std::size_t n1 = static_cast<std::size_t>(u1.dim());
                   const std::size_t n2 = static_cast<std::size_t>(u2.dim());
                   const auto s1 = eigenphase_spectrum(u1);
                   const auto s2 = eigenphase_spectrum(u2);
                   const auto sk = eigenphase_spectrum(kron(u1, u2));
                   const auto l1 = [](std::size_t n) { return WeightVector::lambda(1, n); };
                   const auto ln = [](std::size_t n) { return WeightVector::lambda(n, n); };
                   const double d = static_cast<double>(n1);
                   const double e = static_cast<double>(n2);
                   return std::min(
                       {enorm(s1, l1(n1)) + enorm(s2, l1(n2)) - enorm(sk, l1(n1 * n2)),
                        e * enorm(s1, ln(n1)) + d * enorm(s2, ln(n2)) - enorm(sk, ln(n1 * n2)),
                        nenorm(s1, l1(n1)).value + nenorm(s2, l1(n2)).value - nenorm(sk, l1(n1 * n2)).value,
                        e * nenorm(s1, ln(n1)).value + d * nenorm(s2, ln(n2)).value - nenorm(sk, ln(n1 * n2)).value});
                 }});

  // -- non-commutativity -------------------------------------------------------
  inv.push_back({"commutator_phase_invariance", 0.0, true,
                 [unitaries](int n, SeededRng& rng) {
                   Instance in = unitaries(2)(n, rng);
                   in.scalars = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& [u, v] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto& mu = in.weights[0];
                   return equality_margin(
                       noncommutativity(u.phase_shifted(in.scalars[0]), v.phase_shifted(in.scalars[1]), mu),
                       noncommutativity(u, v, mu));
                 }});
  inv.push_back({"commutator_inverse_conjugation", 0.0, true, unitaries(3), [](const Instance& in) {
                   const auto& [u, v, w] = std::tie(in.unitaries[0], in.unitaries[1], in.unitaries[2]);
                   const auto& mu = in.weights[0];
                   const double c = noncommutativity(u, v, mu);
                   return std::min(equality_margin(noncommutativity(adjoint(u), adjoint(v), mu), c),
                                   equality_margin(noncommutativity(conjugate(w, u), conjugate(w, v), mu), c));
                 }});
  inv.push_back({"commutator_tensor_bounds", 0.0, false,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.unitaries.push_back(haar_unitary(n, rng));
                   in.unitaries.push_back(haar_unitary(n, rng));
                   in.unitaries.push_back(haar_unitary(2, rng));
                   in.unitaries.push_back(haar_unitary(2, rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& [u1, v1, u2, v2] =
                       std::tie(in.unitaries[0], in.unitaries[1], in.unitaries[2], in.unitaries[3]);
                   const std::size_t n1 = static_cast<std::size_t>(u1.dim());
                   const std::size_t n2 = static_cast<std::size_t>(u2.dim());
                   const auto l1 = [](std::size_t n) { return WeightVector::lambda(1, n); };
                   const auto ln = [](std::size_t n) { return WeightVector::lambda(n, n); };
                   const auto a = kron(u1, u2);
                   const auto b = kron(v1, v2);
                   return std::min(
                       noncommutativity(u1, v1, l1(n1)) + noncommutativity(u2, v2, l1(n2)) -
                           noncommutativity(a, b, l1(n1 * n2)),
                       static_cast<double>(n2) * noncommutativity(u1, v1, ln(n1)) +
                           static_cast<double>(n1) * noncommutativity(u2, v2, ln(n2)) -
                           noncommutativity(a, b, ln(n1 * n2)));
                 }});
  inv.push_back({"commutator_antipodal", 1e-9, false,
                 [](int n, SeededRng& rng) {
                   // Even dimension 2k: U = W (sx (x) A) W^dag, V = W (sy (x) I) W^dag has
                   // U V U^-1 V^-1 = -I.
                   const int k = std::max(1, (n + 1) / 2);
                   Instance in;
                   in.unitaries.push_back(haar_unitary(2 * k, rng));
                   in.unitaries.push_back(haar_unitary(k, rng));
                   in.weights.push_back(random_weights(static_cast<std::size_t>(2 * k), rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& w = in.unitaries[0];
                   const auto& a = in.unitaries[1];
                   const auto& mu = in.weights[0];
                   const auto u = conjugate(w, kron(pauli_x(), a));
                   const auto v = conjugate(w, kron(pauli_y(), UnitaryMatrix::identity(a.dim())));
                   return equality_margin(noncommutativity(u, v, mu), pi * mu.sum());
                 }});
  inv.push_back({"commutator_zero_iff_commuting", 0.0, true,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.unitaries.push_back(haar_unitary(n, rng));
                   in.unitaries.push_back(haar_unitary(n, rng));
                   std::vector<double> p1(static_cast<std::size_t>(n));
                   std::vector<double> p2(static_cast<std::size_t>(n));
                   for (auto& x : p1) x = rng.uniform(-pi, pi);
                   for (auto& x : p2) x = rng.uniform(-pi, pi);
                   in.unitaries.push_back(UnitaryMatrix::diagonal(p1));
                   in.unitaries.push_back(UnitaryMatrix::diagonal(p2));
                   in.weights.push_back(random_weights(static_cast<std::size_t>(n), rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& mu = in.weights[0];
                   const auto& w = in.unitaries[0];
                   const double commuting =
                       noncommutativity(conjugate(w, in.unitaries[2]), conjugate(w, in.unitaries[3]), mu);
                   double m = -commuting + 1e-9;
                   if (in.unitaries[0].dim() >= 2) {
                     m = std::min(m, noncommutativity(in.unitaries[0], in.unitaries[1], mu) - 1e-6);
                   }
                   return m;
                 }});

  // -- continuity and derivative ---------------------------------------------------
  inv.push_back({"enorm_lipschitz", 0.0, false,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.hermitians.push_back(random_hermitian(n, rng));
                   in.weights.push_back(random_weights(static_cast<std::size_t>(n), rng));
                   in.scalars = {rng.uniform(0.0, 4.0), 1e-3};
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& h = in.hermitians[0];
                   const auto& mu = in.weights[0];
                   const double t0 = in.scalars[0];
                   const double dt = in.scalars[1];
                   const auto& s = h.singular_values_desc();
                   const double lipschitz = mu.sum() * std::accumulate(s.begin(), s.end(), 0.0);
                   double m = std::numeric_limits<double>::infinity();
                   double prev = enorm(evolve(h, t0), mu);
                   for (int k = 1; k <= 50; ++k) {
                     const double cur = enorm(evolve(h, t0 + k * dt), mu);
                     m = std::min(m, lipschitz * dt - std::abs(cur - prev));
                     prev = cur;
                   }
                   return m;
                 }});
  inv.push_back({"derivative_law", 1e-9, false,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.hermitians.push_back(random_hermitian(n, rng));
                   in.weights.push_back(random_weights(static_cast<std::size_t>(n), rng));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto r = derivative_check_enorm(in.hermitians[0], in.weights[0], 1e-3);
                   return equality_margin(r.fd_estimate, r.analytic);
                 }});

  // -- resources ---------------------------------------------------------------
  inv.push_back({"median_deviation_optimality", 1e-12, false,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   std::vector<double> p(static_cast<std::size_t>(n));
                   for (double& x : p) x = rng.uniform();
                   const double total = std::accumulate(p.begin(), p.end(), 0.0);
                   for (double& x : p) x /= total;
                   std::vector<double> e(static_cast<std::size_t>(n));
                   for (double& x : e) x = rng.uniform(-3.0, 3.0);
                   in.scalars = e;
                   in.scalars.insert(in.scalars.end(), p.begin(), p.end());
                   return in;
                 },
                 [](const Instance& in) {
                   const std::size_t n = in.scalars.size() / 2;
                   const std::span<const double> e(in.scalars.data(), n);
                   const std::span<const double> p(in.scalars.data() + n, n);
                   const double de = mean_abs_dev_from_median(e, p);
                   double m = std::numeric_limits<double>::infinity();
                   for (int k = 0; k <= 2000; ++k) {
                     const double x = -4.0 + 8.0 * k / 2000.0;
                     m = std::min(m, absolute_deviation(e, p, x) - de);
                   }
                   return m;
                 }});
  inv.push_back({"resource_gauge_invariance", 1e-10, true,
                 [](int n, SeededRng& rng) {
                   Instance in;
                   in.unitaries.push_back(haar_unitary(n, rng));
                   std::vector<double> p(static_cast<std::size_t>(n));
                   for (double& x : p) x = rng.uniform();
                   std::sort(p.begin(), p.end(), std::greater<>());
                   const double total = std::accumulate(p.begin(), p.end(), 0.0);
                   for (double& x : p) x /= total;
                   in.weights.emplace_back(p);
                   in.scalars.push_back(rng.uniform(-10.0, 10.0));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& u = in.unitaries[0];
                   const auto& mu = in.weights[0];
                   const std::vector<double> probs(mu.values().begin(), mu.values().end());
                   const AmplitudeProfile profile(probs);
                   const double r = resource_R(u, profile);
                   return std::min(equality_margin(resource_R(u.phase_shifted(in.scalars[0]), profile), r),
                                   enorm(u, mu) - r);
                 }});
  inv.push_back({"generator_round_trip", 1e-8, true, unitaries(1), [](const Instance& in) {
                   const auto& u = in.unitaries[0];
                   const auto h = generator_from_unitary(u);
                   double lo = std::numeric_limits<double>::infinity();
                   for (double l : h.eigenvalues_desc()) lo = std::min(lo, pi - std::abs(l) + (l < 0 ? 1e-12 : 0.0));
                   const double err = (evolve(h, 1.0).matrix() - u.matrix()).cwiseAbs().maxCoeff();
                   return std::min(-err, lo);
                 }});
  inv.push_back({"rearrangement_bruteforce", 1e-12, false,
                 [](int n, SeededRng& rng) {
                   const int m = std::clamp(n, 1, 6);
                   Instance in;
                   std::vector<double> x(static_cast<std::size_t>(m));
                   for (double& v : x) v = rng.uniform(-2.0, 2.0);
                   std::sort(x.begin(), x.end(), std::greater<>());
                   in.scalars = x;
                   for (int k = 0; k < m; ++k) in.scalars.push_back(rng.uniform(-2.0, 2.0));
                   return in;
                 },
                 [](const Instance& in) {
                   const std::size_t n = in.scalars.size() / 2;
                   const std::span<const double> x(in.scalars.data(), n);
                   std::vector<double> y(in.scalars.begin() + static_cast<long>(n), in.scalars.end());
                   std::vector<std::size_t> perm(n);
                   std::iota(perm.begin(), perm.end(), std::size_t{0});
                   double best = -std::numeric_limits<double>::infinity();
                   do {
                     double s = 0.0;
                     for (std::size_t j = 0; j < n; ++j) s += x[j] * y[perm[j]];
                     best = std::max(best, s);
                   } while (std::next_permutation(perm.begin(), perm.end()));
                   return equality_margin(rearrangement_max(x, y), best);
                 }});

  // -- constructions -----------------------------------------------------------
  inv.push_back({"equality_construction", 1e-10, false,
                 [](int n, SeededRng& rng) {
                   auto [u, v] = construct_equality_pair(static_cast<std::size_t>(n), rng.next_u64());
                   Instance in;
                   in.unitaries.push_back(std::move(u));
                   in.unitaries.push_back(std::move(v));
                   return in;
                 },
                 [](const Instance& in) {
                   const auto& [u, v] = std::tie(in.unitaries[0], in.unitaries[1]);
                   const auto n = static_cast<std::size_t>(u.dim());
                   const auto su = eigenphase_spectrum(u);
                   const auto sv = eigenphase_spectrum(v);
                   const auto suv = eigenphase_spectrum(u * v);
                   double m = 0.0;
                   for (std::size_t k = 1; k <= n; ++k) {
                     const auto mu = WeightVector::lambda(k, n);
                     m = std::min(m, equality_margin(enorm(suv, mu), enorm(su, mu) + enorm(sv, mu)));
                   }
                   return m;
                 }});
  inv.push_back({"minimal_rotation_profile", 1e-8, false,
                 [](int n, SeededRng& rng) {
                   const int m = std::max(n, 2);
                   Instance in;
                   const auto a = random_state(m, rng);
                   const auto b = random_state(m, rng);
                   for (Eigen::Index j = 0; j < m; ++j) {
                     in.scalars.push_back(a(j).real());
                     in.scalars.push_back(a(j).imag());
                   }
                   for (Eigen::Index j = 0; j < m; ++j) {
                     in.scalars.push_back(b(j).real());
                     in.scalars.push_back(b(j).imag());
                   }
                   return in;
                 },
                 [](const Instance& in) {
                   const auto m = static_cast<Eigen::Index>(in.scalars.size() / 4);
                   ComplexVector a(m);
                   ComplexVector b(m);
                   for (Eigen::Index j = 0; j < m; ++j) {
                     a(j) = {in.scalars[static_cast<std::size_t>(2 * j)], in.scalars[static_cast<std::size_t>(2 * j + 1)]};
                     b(j) = {in.scalars[static_cast<std::size_t>(2 * (m + j))],
                             in.scalars[static_cast<std::size_t>(2 * (m + j) + 1)]};
                   }
                   const auto u = minimal_rotation_unitary(a, b);
                   const double chi = bures_angle(a, b);
                   std::vector<double> expected(static_cast<std::size_t>(m), 0.0);
                   expected.front() = chi;
                   expected.back() = -chi;
                   const double gap = circle_multiset_gap(eigenphase_spectrum(u).unordered_phases(), expected);
                   const ComplexVector ua = u.matrix() * a;
                   const cplx overlap = b.dot(ua);
                   const double phase = std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0;
                   const double miss = (ua - std::polar(1.0, phase) * b).norm();
                   return -std::max(gap, miss);
                 }});
  return inv;
}

// ---------------------------------------------------------------------------
// Running, reporting, replay

struct InvariantReport {
  std::string name;
  std::size_t trials = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool passed = true;
  std::string counterexample;  // path, empty when passed
};

struct SuiteReport {
  std::vector<InvariantReport> invariants;
  bool all_passed() const {
    return std::all_of(invariants.begin(), invariants.end(), [](const auto& r) { return r.passed; });
  }
};

inline nlohmann::json instance_to_json(const Instance& in) {
  nlohmann::json j;
  j["unitaries"] = nlohmann::json::array();
  for (const auto& u : in.unitaries) j["unitaries"].push_back(matrix_to_json(u.matrix()));
  j["hermitians"] = nlohmann::json::array();
  for (const auto& h : in.hermitians) j["hermitians"].push_back(matrix_to_json(h.matrix()));
  j["weights"] = nlohmann::json::array();
  for (const auto& w : in.weights) j["weights"].push_back(std::vector<double>(w.values().begin(), w.values().end()));
  j["scalars"] = in.scalars;
  return j;
}

/// Rebuilds an instance, re-validating every matrix.
inline Instance instance_from_json(const nlohmann::json& j) {
  Instance in;
  try {
    for (const auto& m : j.at("unitaries")) in.unitaries.push_back(validate_unitary(matrix_from_json(m)));
    for (const auto& m : j.at("hermitians")) in.hermitians.emplace_back(matrix_from_json(m));
    for (const auto& w : j.at("weights")) in.weights.emplace_back(w.get<std::vector<double>>());
    in.scalars = j.at("scalars").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("counterexample: ") + e.what());
  }
  return in;
}

inline void dump_counterexample(const std::string& path, const Invariant& inv, const Instance& in, double margin,
                                double tolerance) {
  nlohmann::json j = instance_to_json(in);
  j["invariant"] = inv.name;
  j["margin"] = margin;
  j["tolerance"] = tolerance;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline const Invariant& find_invariant(const std::vector<Invariant>& all, std::string_view name) {
  for (const auto& inv : all) {
    if (inv.name == name) return inv;
  }
  throw input_error("unknown invariant '" + std::string(name) + "'");
}

struct ReplayResult {
  std::string invariant;
  double recorded_margin = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool passed() const { return margin >= -tolerance; }
};

inline ReplayResult replay_counterexample(const std::string& path) {
  const auto j = read_json_file(path);
  const auto all = standard_invariants();
  if (!j.contains("invariant") || !j["invariant"].is_string()) throw input_error(path + ": missing invariant name");
  const auto& inv = find_invariant(all, j["invariant"].get<std::string>());
  const Instance in = instance_from_json(j);
  ReplayResult r;
  r.invariant = inv.name;
  r.recorded_margin = j.value("margin", std::numeric_limits<double>::quiet_NaN());
  r.tolerance = j.value("tolerance", inv.tolerance);
  r.margin = inv.margin(in);
  return r;
}

/// Runs every invariant for cfg.samples trials, cycling through cfg.dims.
/// When `injected` is set, invariants that accept a user matrix get one
/// extra trial with it as their first operand.
inline SuiteReport run_property_suite(const ExperimentConfig& cfg, const std::vector<Invariant>& invariants,
                                      const std::optional<UnitaryMatrix>& injected = std::nullopt) {
  cfg.validate();
  const std::size_t workers = worker_count(cfg.threads);
  SuiteReport report;
  for (const auto& inv : invariants) {
    const double tol = inv.tolerance > 0.0 ? inv.tolerance : cfg.tolerance;
    const std::uint64_t seed = splitmix64(cfg.seed ^ suite::name_hash(inv.name));
    const bool with_injection = injected.has_value() && inv.accepts_injection;
    const std::size_t trials = cfg.samples + (with_injection ? 1 : 0);

    std::vector<double> margins(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
      if (t == cfg.samples) {
        SeededRng rng(seed, t);
        Instance in = inv.draw(static_cast<int>(injected->dim()), rng);
        in.unitaries[0] = *injected;
        margins[t] = inv.margin(in);
        return;
      }
      SeededRng rng(seed, t);
      const int n = cfg.dims[t % cfg.dims.size()];
      margins[t] = inv.margin(inv.draw(n, rng));
    });

    InvariantReport r;
    r.name = inv.name;
    r.trials = trials;
    r.tolerance = tol;
    const auto worst = std::min_element(margins.begin(), margins.end());
    r.worst_margin = *worst;
    r.passed = !(r.worst_margin < -tol) && std::isfinite(r.worst_margin);
    if (!r.passed) {
      const auto t = static_cast<std::size_t>(worst - margins.begin());
      SeededRng rng(seed, t);
      Instance in = t == cfg.samples ? inv.draw(static_cast<int>(injected->dim()), rng)
                                     : inv.draw(cfg.dims[t % cfg.dims.size()], rng);
      if (t == cfg.samples) in.unitaries[0] = *injected;
      std::filesystem::create_directories(cfg.output_dir);
      r.counterexample = (std::filesystem::path(cfg.output_dir) / ("counterexample_" + inv.name + ".json")).string();
      dump_counterexample(r.counterexample, inv, in, r.worst_margin, tol);
    }
    report.invariants.push_back(std::move(r));
  }
  return report;
}

inline SuiteReport run_property_suite(const ExperimentConfig& cfg,
                                      const std::optional<UnitaryMatrix>& injected = std::nullopt) {
  return run_property_suite(cfg, standard_invariants(), injected);
}

inline nlohmann::json suite_report_to_json(const SuiteReport& report, const ExperimentConfig& cfg) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.invariants) {
    rows.push_back({{"name", r.name},
                    {"trials", r.trials},
                    {"worst_margin", r.worst_margin},
                    {"tolerance", r.tolerance},
                    {"passed", r.passed},
                    {"counterexample", r.counterexample.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.counterexample)}});
  }
  return {{"meta", config_metadata(cfg)}, {"invariants", std::move(rows)}, {"all_passed", report.all_passed()}};
}

}  // namespace unimet
