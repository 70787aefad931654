#include "nsb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace nsb {

const char* to_string(SideTag side) {
  switch (side) {
    case SideTag::Left: return "left";
    case SideTag::Right: return "right";
    case SideTag::Top: return "top";
    case SideTag::Bottom: return "bottom";
  }
  return "?";
}

Mesh build_uniform_square_mesh(int n) {
  if (n < 1) {
    throw std::invalid_argument("build_uniform_square_mesh: n must be >= 1, got " +
                                std::to_string(n));
  }
  Mesh mesh;
  mesh.n_ = n;
  const int np = n + 1;
  mesh.vertices_.reserve(static_cast<std::size_t>(np) * np);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices_.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }
  // Pin the far boundary to exactly 1.0.
  for (auto& v : mesh.vertices_) {
    if (std::abs(v.x - 1.0) < 1e-14) v.x = 1.0;
    if (std::abs(v.y - 1.0) < 1e-14) v.y = 1.0;
  }

  mesh.triangles_.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * np + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + np;
      const int v11 = v01 + 1;
      mesh.triangles_.push_back({v00, v10, v11});
      mesh.triangles_.push_back({v00, v11, v01});
    }
  }

  std::unordered_map<long long, int> edge_ids;
  edge_ids.reserve(mesh.triangles_.size() * 2);
  std::vector<int> edge_use;
  mesh.triangle_edges_.resize(mesh.triangles_.size());
  const long long nv = static_cast<long long>(mesh.vertices_.size());
  for (std::size_t t = 0; t < mesh.triangles_.size(); ++t) {
    const auto& tri = mesh.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = std::min(tri[k], tri[(k + 1) % 3]);
      const int b = std::max(tri[k], tri[(k + 1) % 3]);
      const long long key = a * nv + b;
      auto [it, inserted] = edge_ids.try_emplace(key, static_cast<int>(mesh.edges_.size()));
      if (inserted) {
        mesh.edges_.push_back({a, b});
        edge_use.push_back(0);
      }
      ++edge_use[it->second];
      mesh.triangle_edges_[t][k] = it->second;
    }
  }
  for (std::size_t e = 0; e < mesh.edges_.size(); ++e) {
    if (edge_use[e] == 1) mesh.boundary_edges_.push_back(static_cast<int>(e));
  }
  return mesh;
}

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

int Mesh::locate(Point p) const {
  constexpr double tol = 1e-12;
  if (!(p.x >= -tol && p.x <= 1.0 + tol && p.y >= -tol && p.y <= 1.0 + tol)) {
    throw std::out_of_range("Mesh::locate: point (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") lies outside the unit square");
  }
  const double sx = std::clamp(p.x, 0.0, 1.0) * n_;
  const double sy = std::clamp(p.y, 0.0, 1.0) * n_;
  const int i = std::min(static_cast<int>(sx), n_ - 1);
  const int j = std::min(static_cast<int>(sy), n_ - 1);
  const double lx = sx - i;
  const double ly = sy - j;
  const int cell = j * n_ + i;
  return 2 * cell + (lx >= ly ? 0 : 1);
}

void Mesh::dump(std::ostream& os) const {
  os << "# vertices " << vertices_.size() << "\n";
  for (const auto& v : vertices_) os << v.x << ' ' << v.y << '\n';
  os << "# triangles " << triangles_.size() << "\n";
  for (const auto& t : triangles_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

std::map<int, SideTag> classify_boundary(const Mesh& mesh) {
  std::map<int, SideTag> tags;
  for (int e : mesh.boundary_edges()) {
    const auto& ev = mesh.edges()[e];
    const Point& a = mesh.vertex(ev[0]);
    const Point& b = mesh.vertex(ev[1]);
    const double mx = 0.5 * (a.x + b.x);
    const double my = 0.5 * (a.y + b.y);
    SideTag side;
    if (mx == 0.0) side = SideTag::Left;
    else if (mx == 1.0) side = SideTag::Right;
    else if (my == 0.0) side = SideTag::Bottom;
    else if (my == 1.0) side = SideTag::Top;
    else throw std::logic_error("classify_boundary: boundary edge off the square boundary");
    tags.emplace(e, side);
  }
  return tags;
}

}  // namespace nsb
