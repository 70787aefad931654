#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

namespace nsb {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class SideTag { Left, Right, Top, Bottom };

const char* to_string(SideTag side);

/// Structured triangulation of the unit square.
///
/// Vertices are numbered lexicographically (i fastest). Every cell
/// [i/n, (i+1)/n] x [j/n, (j+1)/n] is split along its bottom-left to
/// top-right diagonal into triangles 2c (below the diagonal) and 2c+1
/// (above), c = j*n + i, both counter-clockwise.
class Mesh {
 public:
  using Triangle = std::array<int, 3>;
  using EdgeVertices = std::array<int, 2>;

  int subdivisions() const { return n_; }
  double h() const { return 1.0 / n_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  /// Edge vertex pairs, smaller index first.
  std::span<const EdgeVertices> edges() const { return edges_; }
  /// Local edge k of a triangle joins its local vertices k and (k+1)%3.
  const std::array<int, 3>& triangle_edges(std::size_t t) const { return triangle_edges_[t]; }
  /// Boundary edges in ascending edge order.
  std::span<const int> boundary_edges() const { return boundary_edges_; }

  const Point& vertex(std::size_t v) const { return vertices_[v]; }
  const Triangle& triangle(std::size_t t) const { return triangles_[t]; }

  double signed_area(std::size_t t) const;

  /// Triangle containing p. Points on shared edges resolve to one of the
  /// neighbours. Throws std::out_of_range outside the closed square.
  int locate(Point p) const;

  void dump(std::ostream& os) const;

 private:
  friend Mesh build_uniform_square_mesh(int n);

  int n_ = 0;
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<EdgeVertices> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<int> boundary_edges_;
};

/// Throws std::invalid_argument for n < 1.
Mesh build_uniform_square_mesh(int n);

inline std::shared_ptr<const Mesh> make_square_mesh(int n) {
  return std::make_shared<const Mesh>(build_uniform_square_mesh(n));
}

/// Tags every boundary edge with the side its midpoint lies on.
std::map<int, SideTag> classify_boundary(const Mesh& mesh);

}  // namespace nsb
