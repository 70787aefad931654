#include <gtest/gtest.h>

#include <cmath>

#include "nsb/quadrature.hpp"

using namespace nsb;

namespace {

double factorial(int k) { return std::tgamma(k + 1.0); }

// Exact integral of xi^a eta^b over the reference triangle.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

double apply(const QuadRule& q, int a, int b) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += q.weights[i] * std::pow(q.points[i][1], a) * std::pow(q.points[i][2], b);
  }
  return s;
}

}  // namespace

class QuadDegrees : public ::testing::TestWithParam<int> {};

TEST_P(QuadDegrees, WeightsSumToReferenceArea) {
  const QuadRule& q = quadrature(GetParam());
  double s = 0.0;
  for (double w : q.weights) s += w;
  EXPECT_NEAR(s, 0.5, 1e-14);
  EXPECT_GE(q.exactness, GetParam());
}

TEST_P(QuadDegrees, PointsInsideTriangle) {
  const QuadRule& q = quadrature(GetParam());
  for (const auto& p : q.points) {
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-14);
    for (double l : p) EXPECT_GE(l, -1e-14);
  }
}

TEST_P(QuadDegrees, MonomialsIntegratedExactly) {
  const int d = GetParam();
  const QuadRule& q = quadrature(d);
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; a + b <= d; ++b) {
      EXPECT_NEAR(apply(q, a, b), monomial_integral(a, b), 1e-14) << "xi^" << a << " eta^" << b;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, QuadDegrees, ::testing::Range(1, 11));

TEST(Quadrature, BarycentricQuartic) {
  // l1^2 l2^2 over the reference triangle: 2! 2! 2! / 6! * 2|T| = 1/180.
  const QuadRule& q = quadrature(4);
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    s += q.weights[i] * q.points[i][1] * q.points[i][1] * q.points[i][2] * q.points[i][2];
  }
  EXPECT_NEAR(s, 1.0 / 180.0, 1e-15);
}

TEST(Quadrature, InvalidDegreeThrows) {
  EXPECT_THROW(quadrature(0), std::invalid_argument);
  EXPECT_THROW(quadrature(11), std::invalid_argument);
  EXPECT_THROW(quadrature(-1), std::invalid_argument);
}
