#include "vanish/quadrature.hpp"

#include <array>
#include <stdexcept>

namespace vanish {

namespace {

// Positive abscissae and weights of the 8-point rule on [-1, 1].
constexpr std::array<double, 4> kAbscissae = {0.1834346424956498049394761, 0.5255324099163289858177390,
                                              0.7966664774136267395915539, 0.9602898564975362316835609};
constexpr std::array<double, 4> kWeights = {0.3626837833783619829651504, 0.3137066458778872873379622,
                                            0.2223810344533744705443560, 0.1012285362903762591525314};

}  // namespace

QuadratureRule gauss_legendre8(double a, double b, std::size_t panels) {
  if (panels == 0) throw std::invalid_argument("gauss_legendre8: need at least one panel");
  QuadratureRule rule;
  rule.nodes.reserve(8 * panels);
  rule.weights.reserve(8 * panels);
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width;
    const double half = 0.5 * width;
    for (std::size_t k = 4; k-- > 0;) {
      rule.nodes.push_back(mid - half * kAbscissae[k]);
      rule.weights.push_back(half * kWeights[k]);
    }
    for (std::size_t k = 0; k < 4; ++k) {
      rule.nodes.push_back(mid + half * kAbscissae[k]);
      rule.weights.push_back(half * kWeights[k]);
    }
  }
  return rule;
}

}  // namespace vanish
