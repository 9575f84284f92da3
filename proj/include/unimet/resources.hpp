#pragma once

// Hamiltonian-side quantities. Natural units throughout: hbar = 1, the
// evolution time is absorbed into H, and the universal speed-limit constant
// is set to 1, so resource values carry units of (energy x time) / hbar.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "unimet/core.hpp"
#include "unimet/errors.hpp"
#include "unimet/hermitian.hpp"
#include "unimet/metrics.hpp"

namespace unimet {

inline constexpr double probability_sum_tolerance = 1e-12;

inline void validate_probabilities(std::span<const double> probs, const char* where) {
  if (probs.empty()) throw input_error(std::string(where) + ": empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw input_error(std::string(where) + ": probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > probability_sum_tolerance) {
    throw input_error(std::string(where) + ": probabilities sum to " + std::to_string(total));
  }
}

/// Squared amplitudes |alpha_j|^2: non-negative, non-increasing, summing to one.
class AmplitudeProfile {
 public:
  explicit AmplitudeProfile(std::vector<double> probs) : p_(std::move(probs)) {
    validate_probabilities(p_, "AmplitudeProfile");
    if (!std::is_sorted(p_.begin(), p_.end(), std::greater<>())) {
      throw input_error("AmplitudeProfile: probabilities must be non-increasing");
    }
  }

  /// Sorted squared moduli of a normalized state's amplitudes.
  static AmplitudeProfile from_state(const ComplexVector& alpha) {
    std::vector<double> p(static_cast<std::size_t>(alpha.size()));
    for (Eigen::Index j = 0; j < alpha.size(); ++j) p[static_cast<std::size_t>(j)] = std::norm(alpha(j));
    std::sort(p.begin(), p.end(), std::greater<>());
    return AmplitudeProfile(std::move(p));
  }

  std::span<const double> probs() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_.size(); }
  WeightVector weights() const { return WeightVector(p_); }

 private:
  std::vector<double> p_;
};

// ---------------------------------------------------------------------------
// Median energy and absolute deviation

/// Every M in [lo, hi] carries at least half the probability mass at or above
/// it and at least half at or below it.
struct MedianInterval {
  double lo = 0.0;
  double hi = 0.0;
  double canonical = 0.0;
};

inline MedianInterval median_energy(std::span<const double> eigs, std::span<const double> probs) {
  require_same_dim(static_cast<long>(eigs.size()), static_cast<long>(probs.size()), "median_energy");
  validate_probabilities(probs, "median_energy");
  std::vector<std::size_t> order(eigs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eigs[a] < eigs[b]; });

  constexpr double half = 0.5 - probability_sum_tolerance;
  MedianInterval m;
  double below = 0.0;
  for (std::size_t idx : order) {
    below += probs[idx];
    if (below >= half) {
      m.lo = eigs[idx];
      break;
    }
  }
  double above = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    above += probs[*it];
    if (above >= half) {
      m.hi = eigs[*it];
      break;
    }
  }
  m.canonical = 0.5 * (m.lo + m.hi);
  return m;
}

inline double absolute_deviation(std::span<const double> eigs, std::span<const double> probs, double x) {
  double s = 0.0;
  for (std::size_t j = 0; j < eigs.size(); ++j) s += probs[j] * std::abs(eigs[j] - x);
  return s;
}

/// DE = sum_j p_j |E_j - M|, evaluated at the canonical median. The value is
/// the same for every M in the median interval; a violation beyond 1e-12
/// (relative to the energy scale) is reported as a numeric error.
inline double mean_abs_dev_from_median(std::span<const double> eigs, std::span<const double> probs) {
  const MedianInterval m = median_energy(eigs, probs);
  const double de = absolute_deviation(eigs, probs, m.canonical);
  double scale = 1.0;
  for (double e : eigs) scale = std::max(scale, std::abs(e));
  const double spread = std::max(std::abs(absolute_deviation(eigs, probs, m.lo) - de),
                                 std::abs(absolute_deviation(eigs, probs, m.hi) - de));
  if (spread > 1e-12 * scale) {
    throw numeric_error("mean_abs_dev_from_median: deviation varies across the median interval");
  }
  return de;
}

/// max over permutations P of sum_j x_j y_P(j), attained by pairing x with
/// y sorted in descending order.
inline double rearrangement_max(std::span<const double> x, std::span<const double> y) {
  require_same_dim(static_cast<long>(x.size()), static_cast<long>(y.size()), "rearrangement_max");
  if (!std::is_sorted(x.begin(), x.end(), std::greater<>())) {
    throw input_error("rearrangement_max: x must be non-increasing");
  }
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end(), std::greater<>());
  return std::inner_product(x.begin(), x.end(), ys.begin(), 0.0);
}

// ---------------------------------------------------------------------------
// Generators and resources

/// H = sum_j (-theta_j) |j><j| so that exp(-iH) = U with spectrum in [-pi, pi).
inline HermitianMatrix generator_from_unitary(const UnitaryMatrix& u) {
  const auto spec = eigenphase_spectrum(u);
  return HermitianMatrix(spectral_synthesis(spec, [](double theta) { return cplx{-theta, 0.0}; }));
}

/// Minimum over global phase, Hamiltonian and time of the worst-case
/// DE(H, phi) * t over states with squared amplitudes `probs`; equal to
/// Nu_mu(U) with mu = probs.
inline double resource_R(const UnitaryMatrix& u, const AmplitudeProfile& probs) {
  require_same_dim(u.dim(), static_cast<long>(probs.size()), "resource_R");
  return nenorm(u, probs.weights()).value;
}

/// sum_j mu_j |lambda|_j(H)
inline double generalized_spectral_norm(const HermitianMatrix& h, const WeightVector& mu) {
  require_same_dim(h.dim(), static_cast<long>(mu.size()), "generalized_spectral_norm");
  return weighted_sum(h.singular_values_desc(), mu);
}

struct DerivativeCheck {
  double fd_estimate = 0.0;
  double analytic = 0.0;
};

/// nu_mu(exp(-iHt))/t against the generalized spectral norm of H. For
/// |lambda_j| t < pi the eigenphases are exactly -lambda_j t, so both agree to
/// rounding.
inline DerivativeCheck derivative_check_enorm(const HermitianMatrix& h, const WeightVector& mu,
                                              double t_small) {
  require_same_dim(h.dim(), static_cast<long>(mu.size()), "derivative_check_enorm");
  const double rho = h.spectral_radius();
  if (!(t_small > 0.0) || (rho > 0.0 && !(t_small < pi / (2.0 * rho)))) {
    throw input_error("derivative_check_enorm: t must lie in (0, pi/(2 max|lambda|))");
  }
  return {enorm(evolve(h, t_small), mu) / t_small, generalized_spectral_norm(h, mu)};
}

/// -i [H1, H2]
inline HermitianMatrix commutator_generator(const HermitianMatrix& h1, const HermitianMatrix& h2) {
  require_same_dim(h1.dim(), h2.dim(), "commutator_generator");
  const ComplexMatrix c = h1.matrix() * h2.matrix() - h2.matrix() * h1.matrix();
  return HermitianMatrix(cplx{0.0, -1.0} * c, 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff()));
}

struct CurvatureCheck {
  double scaled_estimate = 0.0;
  double analytic = 0.0;
};

/// 2 C_mu(exp(-iH1 t), exp(-iH2 t)) / t^2 against 2 sum_j mu_j |lambda|_j(-i[H1,H2]).
/// Requires 2t(|H1| + |H2|) < pi, which keeps every group-commutator
/// eigenphase inside (-pi, pi).
inline CurvatureCheck curvature_check_comm(const HermitianMatrix& h1, const HermitianMatrix& h2,
                                           const WeightVector& mu, double t_small) {
  require_same_dim(h1.dim(), h2.dim(), "curvature_check_comm");
  require_same_dim(h1.dim(), static_cast<long>(mu.size()), "curvature_check_comm");
  if (!(t_small > 0.0) ||
      !(2.0 * t_small * (h1.spectral_radius() + h2.spectral_radius()) < pi)) {
    throw input_error("curvature_check_comm: t outside the range where commutator phases stay in (-pi, pi)");
  }
  const double c = noncommutativity(evolve(h1, t_small), evolve(h2, t_small), mu);
  const double analytic = 2.0 * generalized_spectral_norm(commutator_generator(h1, h2), mu);
  return {2.0 * c / (t_small * t_small), analytic};
}

}  // namespace unimet
