#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nsb/mesh.hpp"

namespace nsb {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  double operator[](int c) const { return c == 0 ? x : y; }
  double& operator[](int c) { return c == 0 ? x : y; }
};

/// Row-major 2x2 tensor; (c, d) = d u_c / d x_d.
struct Mat2 {
  std::array<double, 4> a{};
  double operator()(int c, int d) const { return a[2 * c + d]; }
  double& operator()(int c, int d) { return a[2 * c + d]; }
};

inline constexpr int kMaxLocalDofs = 6;

/// Lagrange shape functions on the reference triangle, indexed as in
/// FunctionSpace::cell_dofs. P2 edge functions sit on local edge k joining
/// local vertices k and (k+1)%3.
struct ShapeTable {
  int count = 0;
  std::array<double, kMaxLocalDofs> value{};
  /// Gradient with respect to reference coordinates (xi, eta).
  std::array<std::array<double, 2>, kMaxLocalDofs> grad{};
};

ShapeTable reference_shapes(int degree, const std::array<double, 3>& bary);

/// Affine map of a mesh triangle.
struct CellGeometry {
  std::array<Point, 3> v;
  double det = 0.0;
  std::array<double, 4> inv{};  // row-major inverse Jacobian

  CellGeometry(const Mesh& mesh, std::size_t t);
  Point map(const std::array<double, 3>& bary) const;
  /// Physical gradient from a reference gradient.
  std::array<double, 2> physical(const std::array<double, 2>& g) const {
    return {inv[0] * g[0] + inv[2] * g[1], inv[1] * g[0] + inv[3] * g[1]};
  }
  /// Barycentric coordinates of a physical point.
  std::array<double, 3> barycentric(Point p) const;
};

/// Lagrange space of degree 0, 1 or 2 with 1 or 2 components on a mesh.
/// Scalar dof numbering: P1 dofs are vertex indices; P2 dofs are vertex
/// indices followed by num_vertices + edge index; P0 dofs are triangle
/// indices. Component c of a vector space occupies [c*scalar_ndof, (c+1)*scalar_ndof).
class FunctionSpace {
 public:
  FunctionSpace(std::shared_ptr<const Mesh> mesh, int degree, int components);

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  int local_size() const { return local_size_; }
  std::size_t scalar_ndof() const { return scalar_ndof_; }
  std::size_t ndof() const { return scalar_ndof_ * components_; }

  std::span<const int> cell_dofs(std::size_t t) const {
    return {dof_map_.data() + t * local_size_, static_cast<std::size_t>(local_size_)};
  }
  /// Nodal point of a scalar dof.
  Point node(std::size_t scalar_dof) const { return nodes_[scalar_dof]; }

  /// Scalar dofs whose nodes lie on a boundary edge with the given tag.
  std::vector<int> boundary_dofs(SideTag side) const;
  /// Scalar dofs on any boundary edge, ascending.
  std::vector<int> boundary_dofs() const;

  bool same_mesh(const FunctionSpace& other) const { return mesh_ == other.mesh_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  int components_;
  int local_size_;
  std::size_t scalar_ndof_;
  std::vector<int> dof_map_;
  std::vector<Point> nodes_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

/// Throws std::invalid_argument for degree outside {0,1,2} or components outside {1,2}.
SpacePtr make_space(std::shared_ptr<const Mesh> mesh, int degree, int components);

using ScalarFn = std::function<double(Point)>;
using VectorFn = std::function<Vec2(Point)>;
using TensorFn = std::function<Mat2(Point)>;
using GradientFn = std::function<Vec2(Point)>;

class FEFunction {
 public:
  /// Empty placeholder without a space.
  FEFunction() = default;
  explicit FEFunction(SpacePtr space);
  FEFunction(SpacePtr space, std::vector<double> coefficients);

  const FunctionSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }
  std::vector<double>& data() { return coeffs_; }
  const std::vector<double>& data() const { return coeffs_; }

  /// Component c at p. Throws std::out_of_range outside the domain.
  double value(Point p, int component = 0) const;
  Vec2 vector_value(Point p) const;
  /// Gradient of component c at p (piecewise; an adjacent cell on edges).
  Vec2 gradient(Point p, int component = 0) const;
  Mat2 vector_gradient(Point p) const;

  /// Local evaluation inside a known cell.
  double value_in_cell(std::size_t t, const ShapeTable& shapes, int component = 0) const;

 private:
  SpacePtr space_;
  std::vector<double> coeffs_;
};

/// Nodal interpolation (P0: centroid values).
FEFunction interpolate(SpacePtr space, const ScalarFn& field);
FEFunction interpolate(SpacePtr space, const VectorFn& field);

/// Point evaluation; vector spaces return both components.
std::vector<double> evaluate(const FEFunction& f, Point p);

}  // namespace nsb
