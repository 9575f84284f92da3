#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "unimet/core.hpp"
#include "unimet/errors.hpp"

namespace unimet {

inline constexpr double default_hermitian_tolerance = 1e-10;

inline double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Validated Hermitian matrix (a Hamiltonian in units hbar = 1) with its
/// eigenvalues lambda_j in descending order, matching eigenvectors, and
/// singular values |lambda|_j in descending order.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const ComplexMatrix& m, double tolerance = default_hermitian_tolerance) {
    if (m.rows() != m.cols()) throw input_error("HermitianMatrix: matrix is not square");
    if (m.rows() == 0) throw input_error("HermitianMatrix: empty matrix");
    if (!m.allFinite()) throw input_error("HermitianMatrix: non-finite entry");
    defect_ = ::unimet::hermiticity_defect(m);
    if (!(defect_ <= tolerance)) {
      throw input_error("HermitianMatrix: Hermiticity defect " + std::to_string(defect_) +
                        " exceeds tolerance " + std::to_string(tolerance));
    }
    m_ = 0.5 * (m + m.adjoint());

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_);
    if (solver.info() != Eigen::Success) {
      throw numeric_error("HermitianMatrix: eigendecomposition failed");
    }
    // Eigen returns ascending order.
    const auto n = m_.rows();
    eigenvalues_.resize(static_cast<std::size_t>(n));
    vectors_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      eigenvalues_[static_cast<std::size_t>(j)] = solver.eigenvalues()(n - 1 - j);
      vectors_.col(j) = solver.eigenvectors().col(n - 1 - j);
    }
    singular_values_.resize(eigenvalues_.size());
    std::transform(eigenvalues_.begin(), eigenvalues_.end(), singular_values_.begin(),
                   [](double x) { return std::abs(x); });
    std::sort(singular_values_.begin(), singular_values_.end(), std::greater<>());
  }

  static HermitianMatrix zero(Eigen::Index n) { return HermitianMatrix(ComplexMatrix::Zero(n, n)); }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  double hermiticity_defect() const noexcept { return defect_; }
  const std::vector<double>& eigenvalues_desc() const noexcept { return eigenvalues_; }
  const std::vector<double>& singular_values_desc() const noexcept { return singular_values_; }
  /// Column j is the eigenvector of eigenvalues_desc()[j].
  const ComplexMatrix& eigenvectors() const noexcept { return vectors_; }

  double spectral_radius() const noexcept {
    return singular_values_.empty() ? 0.0 : singular_values_.front();
  }

 private:
  ComplexMatrix m_;
  double defect_ = 0.0;
  std::vector<double> eigenvalues_;
  std::vector<double> singular_values_;
  ComplexMatrix vectors_;
};

/// exp(-i H t) through the eigendecomposition of H.
inline UnitaryMatrix evolve(const HermitianMatrix& h, double t) {
  const auto& v = h.eigenvectors();
  const auto& lambda = h.eigenvalues_desc();
  ComplexVector phases(h.dim());
  for (Eigen::Index j = 0; j < h.dim(); ++j) {
    phases(j) = std::polar(1.0, -lambda[static_cast<std::size_t>(j)] * t);
  }
  return validate_unitary(v * phases.asDiagonal() * v.adjoint());
}

}  // namespace unimet
