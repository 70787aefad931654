#include "nsb/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nsb {

namespace {

void add_centroid(QuadRule& rule, double w) {
  rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  rule.weights.push_back(0.5 * w);
}

void add_orbit3(QuadRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  for (const auto& p : {std::array<double, 3>{a, a, b}, std::array<double, 3>{a, b, a},
                        std::array<double, 3>{b, a, a}}) {
    rule.points.push_back(p);
    rule.weights.push_back(0.5 * w);
  }
}

void add_orbit6(QuadRule& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  for (const auto& p : {std::array<double, 3>{a, b, c}, std::array<double, 3>{a, c, b},
                        std::array<double, 3>{b, a, c}, std::array<double, 3>{b, c, a},
                        std::array<double, 3>{c, a, b}, std::array<double, 3>{c, b, a}}) {
    rule.points.push_back(p);
    rule.weights.push_back(0.5 * w);
  }
}

// Gauss-Legendre nodes/weights on [0, 1].
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Collapsed (Duffy) product rule: exact to degree 2m - 2 on the triangle.
QuadRule collapsed_product(int m, int exactness) {
  std::vector<double> x, w;
  gauss_legendre(m, x, w);
  QuadRule rule;
  rule.exactness = exactness;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double xi = x[i];
      const double eta = x[j] * (1.0 - xi);
      rule.points.push_back({1.0 - xi - eta, xi, eta});
      rule.weights.push_back(w[i] * w[j] * (1.0 - xi));
    }
  }
  return rule;
}

QuadRule make_rule(int degree) {
  QuadRule rule;
  switch (degree) {
    case 1:
      add_centroid(rule, 1.0);
      rule.exactness = 1;
      break;
    case 2:
      add_orbit3(rule, 1.0 / 6.0, 1.0 / 3.0);
      rule.exactness = 2;
      break;
    case 4:
      add_orbit3(rule, 0.44594849091596488632, 0.2233815896780114657);
      add_orbit3(rule, 0.09157621350977074346, 0.10995174365532186764);
      rule.exactness = 4;
      break;
    case 5:
      add_centroid(rule, 0.225);
      add_orbit3(rule, 0.47014206410511508977, 0.13239415278850618074);
      add_orbit3(rule, 0.1012865073234563388, 0.1259391805448271526);
      rule.exactness = 5;
      break;
    case 6:
      add_orbit3(rule, 0.24928674517091042129, 0.11678627572637936603);
      add_orbit3(rule, 0.06308901449150222834, 0.050844906370206816921);
      add_orbit6(rule, 0.053145049844816947353, 0.31035245103378440542,
                 0.082851075618373575194);
      rule.exactness = 6;
      break;
    case 8:
      add_centroid(rule, 0.14431560767778716825);
      add_orbit3(rule, 0.45929258829272315603, 0.095091634267284624794);
      add_orbit3(rule, 0.17056930775176020662, 0.10321737053471825028);
      add_orbit3(rule, 0.050547228317030975458, 0.032458497623198080311);
      add_orbit6(rule, 0.0083947774099576053372, 0.26311282963463811342,
                 0.027230314174434994265);
      rule.exactness = 8;
      break;
    case 10:
      rule = collapsed_product(6, 10);
      break;
    default:
      throw std::logic_error("make_rule: no rule for degree " + std::to_string(degree));
  }
  return rule;
}

}  // namespace

const QuadRule& quadrature(int exactness_degree) {
  static const QuadRule rules[] = {make_rule(1), make_rule(2), make_rule(4), make_rule(5),
                                   make_rule(6), make_rule(8), make_rule(10)};
  switch (exactness_degree) {
    case 1: return rules[0];
    case 2: return rules[1];
    case 3:
    case 4: return rules[2];
    case 5: return rules[3];
    case 6: return rules[4];
    case 7:
    case 8: return rules[5];
    case 9:
    case 10: return rules[6];
    default:
      throw std::invalid_argument("quadrature: unsupported exactness degree " +
                                  std::to_string(exactness_degree) + " (bundled: 1..10)");
  }
}

}  // namespace nsb
