#pragma once

#include <array>
#include <vector>

namespace nsb {

/// Quadrature on the reference triangle {(xi, eta) : xi, eta >= 0, xi + eta <= 1}.
/// Points are stored as barycentric coordinates (l0, l1, l2) with xi = l1,
/// eta = l2; weights sum to the reference area 1/2.
struct QuadRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exactness = 0;

  std::size_t size() const { return weights.size(); }
};

/// Smallest bundled rule integrating all polynomials of total degree
/// <= `exactness_degree` exactly. Degrees 1..8 use symmetric rules; 9 and
/// 10 fall back to a collapsed Gauss-Legendre product rule. Throws
/// std::invalid_argument outside [1, 10].
const QuadRule& quadrature(int exactness_degree);

/// Standard quadrature degrees used across the library.
inline constexpr int kBilinearQuadDegree = 4;
inline constexpr int kNonlinearQuadDegree = 6;
inline constexpr int kErrorQuadDegree = 8;

}  // namespace nsb
