// Pauli matrices saturate the noncommutativity bound C = pi * sum(mu).
#include <cstdio>

#include "unimet/unimet.hpp"

namespace {

unimet::UnitaryMatrix pauli(char which) {
  using unimet::cplx;
  unimet::ComplexMatrix m(2, 2);
  if (which == 'x') m << 0, 1, 1, 0;
  if (which == 'y') m << 0, cplx(0, -1), cplx(0, 1), 0;
  if (which == 'z') m << 1, 0, 0, -1;
  return unimet::validate_unitary(m);
}

}  // namespace

int main() {
  using namespace unimet;
  const WeightVector mu(std::vector<double>{0.7, 0.3});
  const char* names = "xyz";
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      std::printf("C(s%c, s%c) = %.6f   ", names[a], names[b], noncommutativity(pauli(names[a]), pauli(names[b]), mu));
    }
    std::printf("\n");
  }
  std::printf("pi * sum(mu) = %.6f\n", pi * mu.sum());
}
