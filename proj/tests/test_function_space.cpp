#include <gtest/gtest.h>

#include <cmath>

#include "nsb/analysis.hpp"
#include "nsb/cases.hpp"
#include "nsb/function_space.hpp"

using namespace nsb;

TEST(FunctionSpace, DofCountsAtN160) {
  const auto mesh = make_square_mesh(160);
  const auto p1 = make_space(mesh, 1, 1);
  const auto p2 = make_space(mesh, 2, 1);
  EXPECT_EQ(p1->ndof(), 25921u);
  EXPECT_EQ(p2->ndof(), 103041u);
  // Equal-order P1 triple: 2 velocity + pressure + temperature.
  EXPECT_EQ(make_space(mesh, 1, 2)->ndof() + 2 * p1->ndof(), 103684u);
  // P2-P1-P2.
  EXPECT_EQ(make_space(mesh, 2, 2)->ndof() + p1->ndof() + p2->ndof(), 335044u);
}

TEST(FunctionSpace, P0OnSingleSquare) {
  const auto s = make_space(make_square_mesh(1), 0, 1);
  EXPECT_EQ(s->ndof(), 2u);
  EXPECT_EQ(s->local_size(), 1);
}

TEST(FunctionSpace, InvalidArguments) {
  const auto mesh = make_square_mesh(2);
  EXPECT_THROW(make_space(mesh, 3, 1), std::invalid_argument);
  EXPECT_THROW(make_space(mesh, -1, 1), std::invalid_argument);
  EXPECT_THROW(make_space(mesh, 1, 3), std::invalid_argument);
  EXPECT_THROW(make_space(mesh, 1, 0), std::invalid_argument);
}

TEST(FunctionSpace, ShapeFunctionsPartitionUnity) {
  for (int deg : {0, 1, 2}) {
    for (const auto& b : {std::array<double, 3>{1, 0, 0}, std::array<double, 3>{0.2, 0.3, 0.5},
                          std::array<double, 3>{0.6, 0.1, 0.3}}) {
      const ShapeTable s = reference_shapes(deg, b);
      double sum = 0.0, gx = 0.0, gy = 0.0;
      for (int i = 0; i < s.count; ++i) {
        sum += s.value[i];
        gx += s.grad[i][0];
        gy += s.grad[i][1];
      }
      EXPECT_NEAR(sum, 1.0, 1e-14);
      EXPECT_NEAR(gx, 0.0, 1e-13);
      EXPECT_NEAR(gy, 0.0, 1e-13);
    }
  }
}

TEST(FunctionSpace, P2NodalKronecker) {
  const auto s = make_space(make_square_mesh(3), 2, 1);
  for (std::size_t t = 0; t < s->mesh().num_triangles(); ++t) {
    const CellGeometry g(s->mesh(), t);
    const auto dofs = s->cell_dofs(t);
    for (int i = 0; i < s->local_size(); ++i) {
      const ShapeTable sh = reference_shapes(2, g.barycentric(s->node(dofs[i])));
      for (int j = 0; j < sh.count; ++j) EXPECT_NEAR(sh.value[j], i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(FunctionSpace, InterpolationReproducesLinear) {
  const auto s = make_space(make_square_mesh(5), 1, 1);
  const FEFunction f = interpolate(s, ScalarFn([](Point p) { return p.x; }));
  EXPECT_NEAR(evaluate(f, {0.3, 0.7})[0], 0.3, 1e-14);
  EXPECT_NEAR(f.value({0.123, 0.987}), 0.123, 1e-14);
  const Vec2 g = f.gradient({0.41, 0.22});
  EXPECT_NEAR(g.x, 1.0, 1e-12);
  EXPECT_NEAR(g.y, 0.0, 1e-12);
}

TEST(FunctionSpace, P2ReproducesQuadratic) {
  const auto s = make_space(make_square_mesh(4), 2, 1);
  const FEFunction f = interpolate(s, ScalarFn([](Point p) { return p.x * p.x - p.x * p.y; }));
  for (Point p : {Point{0.13, 0.77}, Point{0.5, 0.5}, Point{0.91, 0.05}}) {
    EXPECT_NEAR(f.value(p), p.x * p.x - p.x * p.y, 1e-13);
    EXPECT_NEAR(f.gradient(p).x, 2 * p.x - p.y, 1e-12);
    EXPECT_NEAR(f.gradient(p).y, -p.x, 1e-12);
  }
}

TEST(FunctionSpace, VectorInterpolation) {
  const auto s = make_space(make_square_mesh(3), 1, 2);
  const FEFunction f = interpolate(s, VectorFn([](Point p) { return Vec2{p.y, 2 * p.x + 1}; }));
  const auto v = evaluate(f, {0.35, 0.6});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0], 0.6, 1e-14);
  EXPECT_NEAR(v[1], 1.7, 1e-14);
  const Mat2 g = f.vector_gradient({0.35, 0.6});
  EXPECT_NEAR(g(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(g(1, 0), 2.0, 1e-12);
}

TEST(FunctionSpace, P0CentroidValues) {
  const auto s = make_space(make_square_mesh(2), 0, 1);
  const FEFunction f = interpolate(s, ScalarFn([](Point p) { return p.x + p.y; }));
  for (std::size_t t = 0; t < s->mesh().num_triangles(); ++t) {
    const auto& tri = s->mesh().triangle(t);
    double cx = 0, cy = 0;
    for (int v : tri) {
      cx += s->mesh().vertex(v).x / 3.0;
      cy += s->mesh().vertex(v).y / 3.0;
    }
    EXPECT_NEAR(f.value({cx, cy}), cx + cy, 1e-14);
  }
}

TEST(FunctionSpace, EvaluationOutsideDomainThrows) {
  const auto s = make_space(make_square_mesh(2), 1, 1);
  const FEFunction f(s);
  EXPECT_THROW(f.value({1.5, 0.5}), std::out_of_range);
  EXPECT_THROW(evaluate(f, {-0.1, 0.5}), std::out_of_range);
}

TEST(FunctionSpace, BoundaryDofs) {
  const auto p1 = make_space(make_square_mesh(4), 1, 1);
  EXPECT_EQ(p1->boundary_dofs().size(), 16u);
  EXPECT_EQ(p1->boundary_dofs(SideTag::Left).size(), 5u);
  const auto p2 = make_space(make_square_mesh(4), 2, 1);
  EXPECT_EQ(p2->boundary_dofs().size(), 32u);
  EXPECT_EQ(p2->boundary_dofs(SideTag::Top).size(), 9u);
  for (int d : p2->boundary_dofs(SideTag::Top)) EXPECT_DOUBLE_EQ(p2->node(d).y, 1.0);
}

TEST(FunctionSpace, InterpolationRates) {
  // Nodal interpolation of the Burggraf velocity: O(h^{k+1}) in L2.
  const AnalyticCase c = burggraf_case();
  const VectorFn u = [&](Point p) { return c.velocity(p, 0.0); };
  const TensorFn g = [&](Point p) { return c.velocity_gradient(p, 0.0); };
  for (int deg : {1, 2}) {
    double prev = 0.0;
    for (int n : {8, 16, 32}) {
      const auto s = make_space(make_square_mesh(n), deg, 2);
      const double e = error_norm(interpolate(s, u), u, g, NormKind::L2);
      if (prev > 0.0) {
        EXPECT_NEAR(std::log2(prev / e), deg + 1.0, 0.15) << "degree " << deg;
      }
      prev = e;
    }
  }
}
