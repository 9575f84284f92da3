// Eigenphases, norms and the phase-optimized norm of diag(1, -i).
#include <cstdio>

#include "unimet/unimet.hpp"

int main() {
  using namespace unimet;
  const std::vector<double> phases{0.0, -pi / 2};
  const auto u = UnitaryMatrix::diagonal(phases);
  const auto s = eigenphase_spectrum(u);
  std::printf("phases      %.6f %.6f\n", s.phases_desc[0], s.phases_desc[1]);
  std::printf("|phases|    %.6f %.6f\n", s.abs_phases_desc[0], s.abs_phases_desc[1]);
  for (std::size_t m = 1; m <= 2; ++m) {
    const auto mu = WeightVector::lambda(m, 2);
    const auto best = nenorm(s, mu);
    std::printf("lambda^(%zu)  nu = %.6f  Nu = %.6f at x = %.6f\n", m, enorm(u, mu), best.value, best.argmin_x);
  }
}
