#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "unimet/core.hpp"
#include "unimet/errors.hpp"
#include "unimet/rng.hpp"

namespace unimet {

inline WeightVector lambda_basis(std::size_t m, std::size_t n) { return WeightVector::lambda(m, n); }

/// Coefficients c with mu = sum_{j<n} (mu_j - mu_{j+1}) lambda^(j) + mu_n lambda^(n);
/// c[j-1] multiplies lambda^(j). All entries are non-negative.
inline std::vector<double> lambda_coefficients(const WeightVector& mu) {
  const std::size_t n = mu.size();
  std::vector<double> c(n);
  for (std::size_t j = 0; j + 1 < n; ++j) c[j] = mu[j] - mu[j + 1];
  c[n - 1] = mu[n - 1];
  return c;
}

// ---------------------------------------------------------------------------
// nu_mu and d_mu

/// nu_mu(U) = sum_j mu_j |theta|_j (descending absolute eigenphases).
inline double enorm(const EigenphaseSpectrum& spec, const WeightVector& mu) {
  require_same_dim(static_cast<long>(spec.dim()), static_cast<long>(mu.size()), "enorm");
  return weighted_sum(spec.abs_phases_desc, mu);
}

inline double enorm(const UnitaryMatrix& u, const WeightVector& mu) {
  require_same_dim(u.dim(), static_cast<long>(mu.size()), "enorm");
  return enorm(eigenphase_spectrum(u), mu);
}

/// d_mu(U, V) = nu_mu(U V^-1).
inline double emetric(const UnitaryMatrix& u, const UnitaryMatrix& v, const WeightVector& mu) {
  require_same_dim(u.dim(), v.dim(), "emetric");
  return enorm(u * adjoint(v), mu);
}

// ---------------------------------------------------------------------------
// Phase-optimized variants

struct PhaseShiftMinimum {
  double value = 0.0;
  double argmin_x = 0.0;  // in [0, 2pi)
  std::size_t candidates_evaluated = 0;
};

namespace detail {

// f(x) = sum_j mu_j * (descending |wrap(theta_k + x)|)_j
inline double shifted_objective(std::span<const double> phases, double x, const WeightVector& mu,
                                std::vector<double>& scratch) {
  scratch.resize(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) scratch[k] = std::abs(wrap_phase(phases[k] + x));
  std::sort(scratch.begin(), scratch.end(), std::greater<>());
  return weighted_sum(scratch, mu);
}

// Every x in [0, 2pi) where some wrapped phase crosses 0 or pi, or where two
// absolute wrapped phases cross. f is linear between consecutive candidates.
inline std::vector<double> breakpoint_candidates(std::span<const double> phases) {
  const std::size_t n = phases.size();
  std::vector<double> xs;
  xs.reserve(2 * n + n * (n - 1));
  for (double theta : phases) {
    xs.push_back(wrap_positive(-theta));
    xs.push_back(wrap_positive(pi - theta));
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      // wrap(theta_j + x) = -wrap(theta_k + x)  <=>  2x = -(theta_j + theta_k) mod 2pi
      double x0 = std::fmod(wrap_positive(-0.5 * (phases[j] + phases[k])), pi);
      if (x0 < 0.0) x0 += pi;
      xs.push_back(x0);
      xs.push_back(x0 + pi);
    }
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace detail

/// Nu_mu for a set of eigenphases: the exact minimum over the global phase x
/// of nu_mu(e^{ix} U). The objective is piecewise linear in x, so the
/// minimum sits on a breakpoint; all O(n^2) breakpoints are evaluated.
/// Near-ties resolve to the smallest x.
inline PhaseShiftMinimum nenorm(std::span<const double> phases, const WeightVector& mu) {
  require_same_dim(static_cast<long>(phases.size()), static_cast<long>(mu.size()), "nenorm");
  const auto xs = detail::breakpoint_candidates(phases);
  std::vector<double> values(xs.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    values[i] = detail::shifted_objective(phases, xs[i], mu, scratch);
  }
  const double best = *std::min_element(values.begin(), values.end());
  const double tie = 1e-12 * std::max(1.0, mu.sum());
  std::size_t pick = 0;
  while (values[pick] > best + tie) ++pick;
  return PhaseShiftMinimum{best, xs[pick] + 0.0, xs.size()};  // no -0
}

inline PhaseShiftMinimum nenorm(const EigenphaseSpectrum& spec, const WeightVector& mu) {
  return nenorm(spec.unordered_phases(), mu);
}

inline PhaseShiftMinimum nenorm(const UnitaryMatrix& u, const WeightVector& mu) {
  require_same_dim(u.dim(), static_cast<long>(mu.size()), "nenorm");
  return nenorm(eigenphase_spectrum(u), mu);
}

/// Nu-metric: min_x d_mu(e^{ix} U, V) = Nu_mu(U V^-1).
inline double nemetric(const UnitaryMatrix& u, const UnitaryMatrix& v, const WeightVector& mu) {
  require_same_dim(u.dim(), v.dim(), "nemetric");
  return nenorm(u * adjoint(v), mu).value;
}

// ---------------------------------------------------------------------------
// Non-commutativity

/// U V U^-1 V^-1
inline UnitaryMatrix group_commutator(const UnitaryMatrix& u, const UnitaryMatrix& v) {
  require_same_dim(u.dim(), v.dim(), "group_commutator");
  return (u * v) * (adjoint(u) * adjoint(v));
}

/// C_mu(U, V) = nu_mu(U V U^-1 V^-1) = d_mu(UV, VU). Zero iff U and V commute.
inline double noncommutativity(const UnitaryMatrix& u, const UnitaryMatrix& v,
                               const WeightVector& mu) {
  require_same_dim(u.dim(), v.dim(), "noncommutativity");
  require_same_dim(u.dim(), static_cast<long>(mu.size()), "noncommutativity");
  return enorm(group_commutator(u, v), mu);
}

// ---------------------------------------------------------------------------
// Constructions

/// Simultaneously diagonal U = diag(e^{i theta_j}), V = diag(e^{i phi_j}) with
/// theta, phi >= 0, both non-increasing, theta_j + phi_j <= pi. Such pairs
/// saturate nu_mu(UV) = nu_mu(U) + nu_mu(V) for every admissible mu.
inline std::pair<UnitaryMatrix, UnitaryMatrix> equality_pair_from_phases(
    std::span<const double> theta, std::span<const double> phi) {
  require_same_dim(static_cast<long>(theta.size()), static_cast<long>(phi.size()),
                   "equality_pair_from_phases");
  if (theta.empty()) throw input_error("equality_pair_from_phases: empty phase list");
  constexpr double slack = 1e-12;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (theta[j] < 0.0 || phi[j] < 0.0) {
      throw input_error("equality_pair_from_phases: phases must be non-negative");
    }
    if (j > 0 && (theta[j] > theta[j - 1] || phi[j] > phi[j - 1])) {
      throw input_error("equality_pair_from_phases: phases must be non-increasing");
    }
    if (theta[j] + phi[j] > pi + slack) {
      throw input_error("equality_pair_from_phases: theta_j + phi_j exceeds pi");
    }
  }
  return {UnitaryMatrix::diagonal(theta), UnitaryMatrix::diagonal(phi)};
}

inline std::pair<UnitaryMatrix, UnitaryMatrix> construct_equality_pair(std::size_t n,
                                                                       std::uint64_t seed) {
  if (n < 1) throw input_error("construct_equality_pair: n must be >= 1");
  SeededRng rng(seed);
  std::vector<double> theta(n);
  std::vector<double> phi(n);
  for (double& t : theta) t = rng.uniform(0.0, pi);
  std::sort(theta.begin(), theta.end(), std::greater<>());
  // theta descending makes pi - theta_1 the tightest cap for every phi_j.
  const double cap = pi - theta.front();
  for (double& p : phi) p = rng.uniform(0.0, cap);
  std::sort(phi.begin(), phi.end(), std::greater<>());
  return equality_pair_from_phases(theta, phi);
}

/// arccos |<psi1|psi2>|
inline double bures_angle(const ComplexVector& psi1, const ComplexVector& psi2) {
  require_same_dim(psi1.size(), psi2.size(), "bures_angle");
  return std::acos(std::min(1.0, std::abs(psi1.dot(psi2))));
}

/// Rotation by chi = arccos|<psi1|psi2>| in span{psi1, psi2}, identity on the
/// orthogonal complement. Maps psi1 to e^{-i arg<psi1|psi2>} psi2, the member
/// of psi2's ray with real positive overlap with psi1; its eigenphases are
/// {chi, 0, ..., 0, -chi}.
inline UnitaryMatrix minimal_rotation_unitary(const ComplexVector& psi1, const ComplexVector& psi2) {
  require_same_dim(psi1.size(), psi2.size(), "minimal_rotation_unitary");
  const Eigen::Index n = psi1.size();
  if (n == 0) throw input_error("minimal_rotation_unitary: empty vectors");
  constexpr double norm_tol = 1e-10;
  if (std::abs(psi1.norm() - 1.0) > norm_tol || std::abs(psi2.norm() - 1.0) > norm_tol) {
    throw input_error("minimal_rotation_unitary: inputs must be unit vectors");
  }
  const cplx overlap = psi1.dot(psi2);  // <psi1|psi2>
  const double c = std::min(1.0, std::abs(overlap));
  const ComplexVector target = c > 0.0 ? ComplexVector(psi2 * (std::conj(overlap) / std::abs(overlap)))
                                       : psi2;
  ComplexVector ortho = target - c * psi1;
  const double s = ortho.norm();
  if (s <= 1e-14) return UnitaryMatrix::identity(n);
  ortho /= s;

  const ComplexMatrix p1 = psi1 * psi1.adjoint();
  const ComplexMatrix p2 = ortho * ortho.adjoint();
  const ComplexMatrix mix = ortho * psi1.adjoint() - psi1 * ortho.adjoint();
  ComplexMatrix u = ComplexMatrix::Identity(n, n) + (c - 1.0) * (p1 + p2) + s * mix;
  return validate_unitary(std::move(u));
}

}  // namespace unimet
