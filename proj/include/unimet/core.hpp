#pragma once

// Unitary matrix foundation: validation, eigenphase extraction with a fixed
// ordering convention, principal arguments, powers, adjoints, Kronecker
// products, and the weight vectors consumed by the metric family.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unimet/errors.hpp"

namespace unimet {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double default_unitary_tolerance = 1e-10;
inline constexpr double determinant_tolerance = 1e-8;
// Arguments this close to -pi are reported as +pi.
inline constexpr double branch_snap = 1e-12;
// Eigenphases closer than this on the unit circle share a degenerate cluster.
inline constexpr double cluster_tolerance = 1e-8;
inline constexpr double eigen_residual_tolerance = 1e-8;

/// Argument of a nonzero complex number in (-pi, pi].
inline double principal_arg(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::domain_error("principal_arg: non-finite input");
  }
  if (z.real() == 0.0 && z.imag() == 0.0) {
    throw std::domain_error("principal_arg: zero has no argument");
  }
  const double theta = std::arg(z);
  return theta <= -pi + branch_snap ? pi : theta;
}

/// Reduces an angle to (-pi, pi].
inline double wrap_phase(double phi) {
  const double w = std::remainder(phi, two_pi);
  return w <= -pi + branch_snap ? pi : w;
}

/// Reduces an angle to [0, 2pi).
inline double wrap_positive(double phi) {
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  return w >= two_pi ? 0.0 : w;
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline double unitarity_defect(const ComplexMatrix& m) {
  const auto n = m.rows();
  return (m.adjoint() * m - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

class UnitaryMatrix;
UnitaryMatrix validate_unitary(ComplexMatrix m, double tolerance = default_unitary_tolerance);

/// Dense square complex matrix whose unitarity defect max|U^dag U - I| has
/// been measured and bounded at construction. Immutable.
class UnitaryMatrix {
 public:
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double unitarity_defect() const noexcept { return defect_; }

  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  static UnitaryMatrix identity(Eigen::Index n) {
    return UnitaryMatrix(ComplexMatrix::Identity(n, n), 0.0);
  }

  static UnitaryMatrix diagonal(std::span<const double> phases) {
    ComplexMatrix d = ComplexMatrix::Zero(static_cast<Eigen::Index>(phases.size()),
                                          static_cast<Eigen::Index>(phases.size()));
    for (std::size_t j = 0; j < phases.size(); ++j) {
      d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = std::polar(1.0, phases[j]);
    }
    return validate_unitary(std::move(d));
  }

  /// e^{ix} U
  UnitaryMatrix phase_shifted(double x) const {
    return UnitaryMatrix(std::polar(1.0, x) * m_, defect_);
  }

  UnitaryMatrix operator*(const UnitaryMatrix& rhs) const {
    require_same_dim(dim(), rhs.dim(), "UnitaryMatrix::operator*");
    return validate_unitary(m_ * rhs.m_,
                            default_unitary_tolerance + defect_ + rhs.defect_);
  }

  friend UnitaryMatrix validate_unitary(ComplexMatrix m, double tolerance);

 private:
  UnitaryMatrix(ComplexMatrix m, double defect) : m_(std::move(m)), defect_(defect) {}

  ComplexMatrix m_;
  double defect_ = 0.0;
};

inline UnitaryMatrix validate_unitary(ComplexMatrix m, double tolerance) {
  if (m.rows() != m.cols()) {
    throw input_error("validate_unitary: matrix is not square (" + std::to_string(m.rows()) +
                      "x" + std::to_string(m.cols()) + ")");
  }
  if (m.rows() == 0) throw input_error("validate_unitary: empty matrix");
  if (!all_finite(m)) throw input_error("validate_unitary: non-finite entry");
  const double defect = unitarity_defect(m);
  if (!(defect <= tolerance)) {
    throw input_error("validate_unitary: unitarity defect " + std::to_string(defect) +
                      " exceeds tolerance " + std::to_string(tolerance));
  }
  const double det_modulus = std::abs(m.determinant());
  // a loosened defect tolerance loosens |det U| by up to n times as much
  if (std::abs(det_modulus - 1.0) > std::max(determinant_tolerance, static_cast<double>(m.rows()) * tolerance)) {
    throw input_error("validate_unitary: |det U| = " + std::to_string(det_modulus));
  }
  return UnitaryMatrix(std::move(m), defect);
}

inline UnitaryMatrix adjoint(const UnitaryMatrix& u) {
  return validate_unitary(u.matrix().adjoint(), default_unitary_tolerance + u.unitarity_defect());
}

inline UnitaryMatrix inverse(const UnitaryMatrix& u) { return adjoint(u); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline UnitaryMatrix kron(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  return validate_unitary(kron(a.matrix(), b.matrix()),
                          default_unitary_tolerance + a.unitarity_defect() + b.unitarity_defect());
}

// ---------------------------------------------------------------------------
// Eigenphases

struct EigenPair {
  double phase = 0.0;
  ComplexVector vector;
};

/// Eigenphases of a unitary in three views. `pairs` keeps solver order;
/// `desc_order[j]` and `abs_desc_order[j]` index into `pairs` for the j-th
/// entry of `phases_desc` and `abs_phases_desc` respectively.
struct EigenphaseSpectrum {
  std::vector<double> phases_desc;
  std::vector<double> abs_phases_desc;
  std::vector<EigenPair> pairs;
  std::vector<std::size_t> desc_order;
  std::vector<std::size_t> abs_desc_order;

  std::size_t dim() const noexcept { return pairs.size(); }

  std::vector<double> unordered_phases() const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(p.phase);
    return out;
  }
};

namespace detail {

inline double circle_distance(double a, double b) {
  return std::abs(std::polar(1.0, a) - std::polar(1.0, b));
}

// Groups indices whose phases are within `tol` of a neighbour on the circle.
inline std::vector<std::vector<std::size_t>> phase_clusters(std::span<const double> phases,
                                                            double tol) {
  const std::size_t n = phases.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return phases[a] < phases[b]; });

  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t idx = order[k];
    if (!clusters.empty() &&
        circle_distance(phases[clusters.back().back()], phases[idx]) <= tol) {
      clusters.back().push_back(idx);
    } else {
      clusters.push_back({idx});
    }
  }
  // The first and last cluster may touch across the -pi/pi seam.
  if (clusters.size() > 1 &&
      circle_distance(phases[clusters.back().back()], phases[clusters.front().front()]) <= tol) {
    auto& last = clusters.back();
    last.insert(last.end(), clusters.front().begin(), clusters.front().end());
    clusters.erase(clusters.begin());
  }
  return clusters;
}

inline void orthonormalize(std::vector<EigenPair>& pairs, std::span<const std::size_t> cluster) {
  for (std::size_t a = 0; a < cluster.size(); ++a) {
    ComplexVector& v = pairs[cluster[a]].vector;
    for (std::size_t b = 0; b < a; ++b) {
      const ComplexVector& w = pairs[cluster[b]].vector;
      v -= w.dot(v) * w;
    }
    const double norm = v.norm();
    if (norm == 0.0) throw numeric_error("eigenphase_spectrum: degenerate eigenvector collapsed");
    v /= norm;
  }
}

}  // namespace detail

/// Eigenphases of U via a complex Schur decomposition. For a normal matrix
/// the triangular factor is diagonal to rounding, so the Schur vectors are
/// orthonormal eigenvectors.
inline EigenphaseSpectrum eigenphase_spectrum(const UnitaryMatrix& u) {
  const ComplexMatrix& m = u.matrix();
  const auto n = m.rows();
  Eigen::ComplexSchur<ComplexMatrix> schur(m);
  if (schur.info() != Eigen::Success) {
    throw numeric_error("eigenphase_spectrum: Schur decomposition did not converge");
  }
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& q = schur.matrixU();

  EigenphaseSpectrum spec;
  spec.pairs.resize(static_cast<std::size_t>(n));
  std::vector<double> raw(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx lambda = t(j, j);
    const double modulus = std::abs(lambda);
    if (modulus == 0.0) throw numeric_error("eigenphase_spectrum: zero eigenvalue");
    const double phase = principal_arg(lambda / modulus);
    raw[static_cast<std::size_t>(j)] = phase;
    spec.pairs[static_cast<std::size_t>(j)] = EigenPair{phase, q.col(j)};
  }

  for (const auto& cluster : detail::phase_clusters(raw, cluster_tolerance)) {
    if (cluster.size() > 1) detail::orthonormalize(spec.pairs, cluster);
  }

  for (const auto& p : spec.pairs) {
    const double residual = (m * p.vector - std::polar(1.0, p.phase) * p.vector).norm();
    if (residual > eigen_residual_tolerance) {
      throw numeric_error("eigenphase_spectrum: eigenvector residual " + std::to_string(residual));
    }
  }

  const std::size_t size = spec.pairs.size();
  spec.desc_order.resize(size);
  std::iota(spec.desc_order.begin(), spec.desc_order.end(), std::size_t{0});
  spec.abs_desc_order = spec.desc_order;
  std::stable_sort(spec.desc_order.begin(), spec.desc_order.end(), [&](std::size_t a, std::size_t b) {
    return spec.pairs[a].phase > spec.pairs[b].phase;
  });
  // Equal |theta| with opposite signs: the positive phase ranks first.
  std::stable_sort(spec.abs_desc_order.begin(), spec.abs_desc_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double fa = std::abs(spec.pairs[a].phase);
                     const double fb = std::abs(spec.pairs[b].phase);
                     if (fa != fb) return fa > fb;
                     return spec.pairs[a].phase > spec.pairs[b].phase;
                   });
  spec.phases_desc.reserve(size);
  spec.abs_phases_desc.reserve(size);
  for (std::size_t j = 0; j < size; ++j) {
    spec.phases_desc.push_back(spec.pairs[spec.desc_order[j]].phase);
    spec.abs_phases_desc.push_back(std::abs(spec.pairs[spec.abs_desc_order[j]].phase));
  }
  return spec;
}

/// Rebuilds sum_j f(theta_j) v_j v_j^dag from a spectrum.
template <class PhaseMap>
ComplexMatrix spectral_synthesis(const EigenphaseSpectrum& spec, PhaseMap&& f) {
  const auto n = static_cast<Eigen::Index>(spec.dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& p : spec.pairs) {
    out.noalias() += f(p.phase) * (p.vector * p.vector.adjoint());
  }
  return out;
}

/// U^a = sum_j e^{i a theta_j} |j><j| over principal eigenphases.
inline UnitaryMatrix matrix_power(const UnitaryMatrix& u, double a) {
  const auto spec = eigenphase_spectrum(u);
  return validate_unitary(
      spectral_synthesis(spec, [a](double theta) { return std::polar(1.0, a * theta); }),
      default_unitary_tolerance + u.unitarity_defect());
}

// ---------------------------------------------------------------------------
// Weights

/// mu_1 >= mu_2 >= ... >= mu_n >= 0 with at least one positive entry.
class WeightVector {
 public:
  explicit WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw input_error("WeightVector: empty");
    for (std::size_t j = 0; j < w_.size(); ++j) {
      if (!std::isfinite(w_[j]) || w_[j] < 0.0) {
        throw input_error("WeightVector: entries must be finite and non-negative");
      }
      if (j > 0 && w_[j] > w_[j - 1]) {
        throw input_error("WeightVector: entries must be non-increasing");
      }
    }
    if (w_.front() <= 0.0) throw input_error("WeightVector: all weights are zero");
  }

  /// lambda^(m): m leading ones then zeros.
  static WeightVector lambda(std::size_t m, std::size_t n) {
    if (m < 1 || m > n) {
      throw input_error("lambda_basis: m=" + std::to_string(m) + " outside [1, " +
                        std::to_string(n) + "]");
    }
    std::vector<double> w(n, 0.0);
    std::fill_n(w.begin(), m, 1.0);
    return WeightVector(std::move(w));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t j) const { return w_[j]; }
  std::span<const double> values() const noexcept { return w_; }
  double sum() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

  WeightVector scaled(double a) const {
    if (!(a > 0.0)) throw input_error("WeightVector::scaled: factor must be positive");
    std::vector<double> w = w_;
    for (double& x : w) x *= a;
    return WeightVector(std::move(w));
  }

 private:
  std::vector<double> w_;
};

/// sum_j mu_j * values_j for `values` already in descending order.
inline double weighted_sum(std::span<const double> values_desc, const WeightVector& mu) {
  require_same_dim(static_cast<long>(values_desc.size()), static_cast<long>(mu.size()),
                   "weighted_sum");
  double s = 0.0;
  for (std::size_t j = 0; j < values_desc.size(); ++j) s += mu[j] * values_desc[j];
  return s;
}

}  // namespace unimet
