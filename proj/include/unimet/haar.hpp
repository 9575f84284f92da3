#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "unimet/core.hpp"
#include "unimet/hermitian.hpp"
#include "unimet/rng.hpp"

namespace unimet {

inline ComplexMatrix ginibre(Eigen::Index n, SeededRng& rng) {
  ComplexMatrix g(n, n);
  // Row-major fill keeps the draw order independent of Eigen's storage order.
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = rng.complex_normal();
  }
  return g;
}

/// Haar-distributed unitary: Q from the QR factorization of a Ginibre
/// matrix, with each column multiplied by the phase of the matching R
/// diagonal entry so the distribution is exactly Haar.
inline UnitaryMatrix haar_unitary(Eigen::Index n, SeededRng& rng) {
  if (n < 1) throw input_error("haar_unitary: n must be >= 1");
  const ComplexMatrix g = ginibre(n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    const double m = std::abs(d);
    q.col(j) *= (m == 0.0 ? cplx{1.0, 0.0} : d / m);
  }
  return validate_unitary(std::move(q));
}

/// Haar sample conditioned on no eigenvalue within `margin` of -1, where
/// |theta| has its branch point. Tolerance-based assertions on signed phases
/// are only meaningful away from it.
inline UnitaryMatrix haar_unitary_off_branch(Eigen::Index n, SeededRng& rng, double margin = 1e-8) {
  for (;;) {
    UnitaryMatrix u = haar_unitary(n, rng);
    const auto ev = u.matrix().eigenvalues();
    bool near = false;
    for (Eigen::Index j = 0; j < ev.size(); ++j) near = near || std::abs(ev(j) + 1.0) <= margin;
    if (!near) return u;
  }
}

/// (G + G^dag)/2 for a Ginibre G.
inline HermitianMatrix random_hermitian(Eigen::Index n, SeededRng& rng) {
  if (n < 1) throw input_error("random_hermitian: n must be >= 1");
  const ComplexMatrix g = ginibre(n, rng);
  return HermitianMatrix(0.5 * (g + g.adjoint()));
}

inline ComplexVector random_state(Eigen::Index n, SeededRng& rng) {
  if (n < 1) throw input_error("random_state: n must be >= 1");
  ComplexVector v(n);
  for (Eigen::Index j = 0; j < n; ++j) v(j) = rng.complex_normal();
  return v / v.norm();
}

}  // namespace unimet
