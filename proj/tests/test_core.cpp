#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"
#include "unimet/core.hpp"
#include "unimet/haar.hpp"

using namespace unimet;
using Catch::Approx;

namespace {

UnitaryMatrix diag_1_minus_i() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = cplx(0, -1);
  return validate_unitary(m);
}

}  // namespace

TEST_CASE("principal_arg branch conventions") {
  CHECK(principal_arg(1.0) == 0.0);
  CHECK(principal_arg(-1.0) == pi);
  CHECK(principal_arg(cplx(-1.0, -0.0)) == pi);
  CHECK(principal_arg(cplx(-1.0, -1e-15)) == pi);
  CHECK(principal_arg(cplx(0, -1)) == Approx(-pi / 2).margin(1e-15));
  CHECK(principal_arg(cplx(0, 1)) == Approx(pi / 2).margin(1e-15));
  CHECK(principal_arg(cplx(-1.0, -1e-6)) < -pi + 1e-5);

  CHECK_THROWS_AS(principal_arg(0.0), std::domain_error);
  CHECK_THROWS_AS(principal_arg(cplx(std::nan(""), 1.0)), std::domain_error);
  CHECK_THROWS_AS(principal_arg(cplx(INFINITY, 0.0)), std::domain_error);
}

TEST_CASE("wrap helpers") {
  CHECK(wrap_phase(3 * pi) == pi);
  CHECK(wrap_phase(-pi) == pi);
  CHECK(wrap_phase(0.5) == Approx(0.5));
  CHECK(wrap_phase(-0.5 - 4 * pi) == Approx(-0.5));
  CHECK(wrap_positive(-0.5) == Approx(two_pi - 0.5));
  CHECK(wrap_positive(two_pi) == 0.0);
}

TEST_CASE("validate_unitary") {
  SECTION("identity accepted with zero defect") {
    const auto u = validate_unitary(ComplexMatrix::Identity(3, 3), 1e-10);
    CHECK(u.unitarity_defect() == 0.0);
    CHECK(u.dim() == 3);
  }
  SECTION("diag(1, -i) accepted") { CHECK_NOTHROW(diag_1_minus_i()); }
  SECTION("diag(2, 1) rejected") {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(0, 0) = 2.0;
    CHECK_THROWS_AS(validate_unitary(m), input_error);
  }
  SECTION("non-square, empty and non-finite rejected") {
    CHECK_THROWS_AS(validate_unitary(ComplexMatrix::Identity(2, 3)), input_error);
    CHECK_THROWS_AS(validate_unitary(ComplexMatrix(0, 0)), input_error);
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(1, 0) = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(validate_unitary(m), input_error);
  }
  SECTION("defect against tolerance") {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(0, 0) = std::sqrt(1.0 + 1e-7);
    CHECK_THROWS_AS(validate_unitary(m, 1e-10), input_error);
    const auto u = validate_unitary(m, 1e-6);
    CHECK(u.unitarity_defect() == Approx(1e-7).epsilon(1e-6));
  }
}

TEST_CASE("eigenphase_spectrum worked example diag(1, -i)") {
  const auto s = eigenphase_spectrum(diag_1_minus_i());
  REQUIRE(s.dim() == 2);
  CHECK(s.phases_desc[0] == 0.0);
  CHECK(s.phases_desc[1] == Approx(-pi / 2).margin(1e-15));
  CHECK(s.abs_phases_desc[0] == Approx(pi / 2).margin(1e-15));
  CHECK(s.abs_phases_desc[1] == 0.0);
}

TEST_CASE("eigenphase_spectrum of the identity") {
  for (int n : {1, 2, 5}) {
    const auto s = eigenphase_spectrum(UnitaryMatrix::identity(n));
    for (double p : s.phases_desc) CHECK(p == 0.0);
  }
}

TEST_CASE("eigenvalue -1 reports +pi") {
  ComplexMatrix m = -ComplexMatrix::Identity(3, 3);
  const auto s = eigenphase_spectrum(validate_unitary(m));
  for (double p : s.phases_desc) CHECK(p == pi);
}

TEST_CASE("eigenphases match characteristic polynomial roots") {
  SeededRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = haar_unitary(4, rng);
    const auto s = eigenphase_spectrum(u);
    const auto roots = oracle::poly_roots(oracle::char_poly(u.matrix()));
    // every computed eigenvalue has a matching root
    std::vector<bool> used(roots.size(), false);
    for (const auto& p : s.pairs) {
      double best = 1e9;
      std::size_t at = 0;
      for (std::size_t k = 0; k < roots.size(); ++k) {
        const double d = std::abs(std::polar(1.0, p.phase) - roots[k]);
        if (!used[k] && d < best) {
          best = d;
          at = k;
        }
      }
      used[at] = true;
      CHECK(best <= 1e-8);
    }
  }
}

TEST_CASE("spectrum invariants") {
  SeededRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    const auto u = haar_unitary(n, rng);
    const auto s = eigenphase_spectrum(u);
    std::vector<double> abs_of_signed;
    for (double p : s.phases_desc) abs_of_signed.push_back(std::abs(p));
    std::sort(abs_of_signed.begin(), abs_of_signed.end(), std::greater<>());
    for (std::size_t j = 0; j < s.dim(); ++j) {
      CHECK(abs_of_signed[j] == s.abs_phases_desc[j]);
      CHECK(s.phases_desc[j] <= s.abs_phases_desc[j]);
      CHECK(s.phases_desc[j] > -pi);
      CHECK(s.phases_desc[j] <= pi);
      if (j > 0) {
        CHECK(s.phases_desc[j] <= s.phases_desc[j - 1]);
        CHECK(s.abs_phases_desc[j] <= s.abs_phases_desc[j - 1]);
      }
    }
    for (const auto& p : s.pairs) {
      CHECK(std::abs(p.vector.norm() - 1.0) <= 1e-12);
      const double residual = (u.matrix() * p.vector - std::polar(1.0, p.phase) * p.vector).norm();
      CHECK(residual <= 1e-8);
    }
    for (std::size_t j = 0; j < s.dim(); ++j) {
      CHECK(s.pairs[s.desc_order[j]].phase == s.phases_desc[j]);
      CHECK(std::abs(s.pairs[s.abs_desc_order[j]].phase) == s.abs_phases_desc[j]);
    }
  }
}

TEST_CASE("inverse reflects the ordered phases") {
  SeededRng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const auto u = haar_unitary_off_branch(n, rng);
    const auto s = eigenphase_spectrum(u);
    const auto si = eigenphase_spectrum(inverse(u));
    for (int j = 0; j < n; ++j) {
      CHECK(si.phases_desc[static_cast<std::size_t>(j)] ==
            Approx(-s.phases_desc[static_cast<std::size_t>(n - 1 - j)]).margin(1e-9));
      CHECK(si.abs_phases_desc[static_cast<std::size_t>(j)] ==
            Approx(s.abs_phases_desc[static_cast<std::size_t>(j)]).margin(1e-9));
    }
  }
}

TEST_CASE("ties in |theta| put the positive phase first") {
  const std::vector<double> phases{-0.7, 0.7, 0.2};
  const auto s = eigenphase_spectrum(UnitaryMatrix::diagonal(phases));
  CHECK(s.pairs[s.abs_desc_order[0]].phase == Approx(0.7));
  CHECK(s.pairs[s.abs_desc_order[1]].phase == Approx(-0.7));
}

TEST_CASE("degenerate clusters get orthonormal eigenvectors") {
  SeededRng rng(3);
  const auto w = haar_unitary(4, rng);
  const std::vector<double> phases{0.3, 0.3, 0.3, -1.1};
  const auto u = (w * UnitaryMatrix::diagonal(phases)) * adjoint(w);
  const auto s = eigenphase_spectrum(u);
  ComplexMatrix v(4, 4);
  for (std::size_t j = 0; j < 4; ++j) v.col(static_cast<Eigen::Index>(j)) = s.pairs[j].vector;
  CHECK((v.adjoint() * v - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((spectral_synthesis(s, [](double t) { return std::polar(1.0, t); }) - u.matrix()).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("degenerate cluster straddling the branch cut") {
  const std::vector<double> phases{pi, -pi + 1e-12, 0.5};
  const auto s = eigenphase_spectrum(UnitaryMatrix::diagonal(phases));
  CHECK(s.abs_phases_desc[0] == Approx(pi).margin(1e-11));
  CHECK(s.abs_phases_desc[1] == Approx(pi).margin(1e-11));
  CHECK(s.abs_phases_desc[2] == Approx(0.5));
}

TEST_CASE("matrix_power") {
  SeededRng rng(21);
  const auto u = haar_unitary_off_branch(3, rng);
  CHECK((matrix_power(u, 1.0).matrix() - u.matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((matrix_power(u, 0.0).matrix() - ComplexMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((matrix_power(u, -1.0).matrix() - u.matrix().adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((matrix_power(u, 2.0).matrix() - u.matrix() * u.matrix()).cwiseAbs().maxCoeff() <= 1e-10);

  const auto sq = matrix_power(diag_1_minus_i(), 2.0);
  CHECK(std::abs(sq(0, 0) - 1.0) <= 1e-15);
  CHECK(std::abs(sq(1, 1) + 1.0) <= 1e-15);
  CHECK(std::abs(sq(0, 1)) <= 1e-15);
}

TEST_CASE("adjoint and kron") {
  const auto a = adjoint(diag_1_minus_i());
  CHECK(a(0, 0) == cplx(1, 0));
  CHECK(a(1, 1) == cplx(0, 1));

  CHECK(kron(UnitaryMatrix::identity(2), UnitaryMatrix::identity(2)).matrix() == ComplexMatrix::Identity(4, 4));

  const auto x = validate_unitary(oracle::pauli('x'));
  const auto z = validate_unitary(oracle::pauli('z'));
  const auto k = kron(x, z);
  REQUIRE(k.dim() == 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const cplx expected = oracle::pauli('x')(r / 2, c / 2) * oracle::pauli('z')(r % 2, c % 2);
      CHECK(k(r, c) == expected);
    }
  }
}

TEST_CASE("products track the defect") {
  SeededRng rng(2);
  const auto u = haar_unitary(3, rng);
  const auto v = haar_unitary(3, rng);
  const auto uv = u * v;
  CHECK(uv.unitarity_defect() <= 1e-13);
  CHECK_THROWS_AS(u * UnitaryMatrix::identity(2), dimension_mismatch);
}

TEST_CASE("phase_shifted multiplies by e^{ix}") {
  const auto u = diag_1_minus_i().phase_shifted(0.25);
  CHECK(std::abs(u(0, 0) - std::polar(1.0, 0.25)) <= 1e-15);
}

TEST_CASE("WeightVector validation") {
  CHECK_NOTHROW(WeightVector({3, 2, 1, 1}));
  CHECK_NOTHROW(WeightVector({1, 0, 0}));
  CHECK_THROWS_AS(WeightVector({1, 2}), input_error);
  CHECK_THROWS_AS(WeightVector({0, 0}), input_error);
  CHECK_THROWS_AS(WeightVector({1, -0.1}), input_error);
  CHECK_THROWS_AS(WeightVector({}), input_error);
  CHECK_THROWS_AS(WeightVector({NAN}), input_error);
  const auto l = WeightVector::lambda(2, 3);
  CHECK(l[0] == 1.0);
  CHECK(l[1] == 1.0);
  CHECK(l[2] == 0.0);
  CHECK_THROWS_AS(WeightVector::lambda(0, 3), input_error);
  CHECK_THROWS_AS(WeightVector::lambda(4, 3), input_error);
  CHECK_THROWS_AS(WeightVector({1, 1}).scaled(0.0), input_error);
  CHECK(WeightVector({2, 1}).scaled(1.5).sum() == Approx(4.5));
}
