#include "nsb/function_space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nsb {

ShapeTable reference_shapes(int degree, const std::array<double, 3>& l) {
  static constexpr std::array<std::array<double, 2>, 3> dl = {{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
  ShapeTable s;
  switch (degree) {
    case 0:
      s.count = 1;
      s.value[0] = 1.0;
      s.grad[0] = {0.0, 0.0};
      break;
    case 1:
      s.count = 3;
      for (int i = 0; i < 3; ++i) {
        s.value[i] = l[i];
        s.grad[i] = dl[i];
      }
      break;
    case 2:
      s.count = 6;
      for (int i = 0; i < 3; ++i) {
        s.value[i] = l[i] * (2.0 * l[i] - 1.0);
        const double f = 4.0 * l[i] - 1.0;
        s.grad[i] = {f * dl[i][0], f * dl[i][1]};
      }
      for (int k = 0; k < 3; ++k) {
        const int i = k;
        const int j = (k + 1) % 3;
        s.value[3 + k] = 4.0 * l[i] * l[j];
        s.grad[3 + k] = {4.0 * (l[j] * dl[i][0] + l[i] * dl[j][0]),
                         4.0 * (l[j] * dl[i][1] + l[i] * dl[j][1])};
      }
      break;
    default:
      throw std::invalid_argument("reference_shapes: unsupported degree " + std::to_string(degree));
  }
  return s;
}

CellGeometry::CellGeometry(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangle(t);
  for (int k = 0; k < 3; ++k) v[k] = mesh.vertex(tri[k]);
  const double j00 = v[1].x - v[0].x;
  const double j01 = v[2].x - v[0].x;
  const double j10 = v[1].y - v[0].y;
  const double j11 = v[2].y - v[0].y;
  det = j00 * j11 - j01 * j10;
  const double r = 1.0 / det;
  inv = {j11 * r, -j01 * r, -j10 * r, j00 * r};
}

Point CellGeometry::map(const std::array<double, 3>& b) const {
  return {b[0] * v[0].x + b[1] * v[1].x + b[2] * v[2].x,
          b[0] * v[0].y + b[1] * v[1].y + b[2] * v[2].y};
}

std::array<double, 3> CellGeometry::barycentric(Point p) const {
  const double dx = p.x - v[0].x;
  const double dy = p.y - v[0].y;
  const double xi = inv[0] * dx + inv[1] * dy;
  const double eta = inv[2] * dx + inv[3] * dy;
  return {1.0 - xi - eta, xi, eta};
}

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, int degree, int components)
    : mesh_(std::move(mesh)), degree_(degree), components_(components) {
  if (!mesh_) throw std::invalid_argument("FunctionSpace: null mesh");
  if (degree < 0 || degree > 2) {
    throw std::invalid_argument("FunctionSpace: unsupported degree " + std::to_string(degree));
  }
  if (components < 1 || components > 2) {
    throw std::invalid_argument("FunctionSpace: unsupported component count " +
                                std::to_string(components));
  }
  const Mesh& m = *mesh_;
  const std::size_t nt = m.num_triangles();
  const std::size_t nv = m.num_vertices();
  local_size_ = degree == 0 ? 1 : (degree == 1 ? 3 : 6);
  dof_map_.resize(nt * local_size_);
  switch (degree) {
    case 0:
      scalar_ndof_ = nt;
      nodes_.resize(nt);
      for (std::size_t t = 0; t < nt; ++t) {
        dof_map_[t] = static_cast<int>(t);
        const auto& tri = m.triangle(t);
        const Point& a = m.vertex(tri[0]);
        const Point& b = m.vertex(tri[1]);
        const Point& c = m.vertex(tri[2]);
        nodes_[t] = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
      }
      break;
    case 1:
      scalar_ndof_ = nv;
      nodes_.assign(m.vertices().begin(), m.vertices().end());
      for (std::size_t t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) dof_map_[3 * t + k] = m.triangle(t)[k];
      }
      break;
    case 2:
      scalar_ndof_ = nv + m.num_edges();
      nodes_.assign(m.vertices().begin(), m.vertices().end());
      for (const auto& e : m.edges()) {
        const Point& a = m.vertex(e[0]);
        const Point& b = m.vertex(e[1]);
        nodes_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      }
      for (std::size_t t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
          dof_map_[6 * t + k] = m.triangle(t)[k];
          dof_map_[6 * t + 3 + k] = static_cast<int>(nv) + m.triangle_edges(t)[k];
        }
      }
      break;
  }
}

std::vector<int> FunctionSpace::boundary_dofs(SideTag side) const {
  std::vector<int> dofs;
  if (degree_ == 0) return dofs;
  const Mesh& m = *mesh_;
  for (const auto& [edge, tag] : classify_boundary(m)) {
    if (tag != side) continue;
    dofs.push_back(m.edges()[edge][0]);
    dofs.push_back(m.edges()[edge][1]);
    if (degree_ == 2) dofs.push_back(static_cast<int>(m.num_vertices()) + edge);
  }
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  return dofs;
}

std::vector<int> FunctionSpace::boundary_dofs() const {
  std::vector<int> dofs;
  for (SideTag s : {SideTag::Left, SideTag::Right, SideTag::Top, SideTag::Bottom}) {
    auto d = boundary_dofs(s);
    dofs.insert(dofs.end(), d.begin(), d.end());
  }
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  return dofs;
}

SpacePtr make_space(std::shared_ptr<const Mesh> mesh, int degree, int components) {
  return std::make_shared<const FunctionSpace>(std::move(mesh), degree, components);
}

FEFunction::FEFunction(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("FEFunction: null space");
  coeffs_.assign(space_->ndof(), 0.0);
}

FEFunction::FEFunction(SpacePtr space, std::vector<double> coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (!space_) throw std::invalid_argument("FEFunction: null space");
  if (coeffs_.size() != space_->ndof()) {
    throw std::invalid_argument("FEFunction: coefficient length " + std::to_string(coeffs_.size()) +
                                " does not match ndof " + std::to_string(space_->ndof()));
  }
}

double FEFunction::value_in_cell(std::size_t t, const ShapeTable& shapes, int component) const {
  const auto dofs = space_->cell_dofs(t);
  const std::size_t off = component * space_->scalar_ndof();
  double s = 0.0;
  for (int i = 0; i < shapes.count; ++i) s += shapes.value[i] * coeffs_[off + dofs[i]];
  return s;
}

double FEFunction::value(Point p, int component) const {
  const Mesh& m = space_->mesh();
  const int t = m.locate(p);
  const CellGeometry geo(m, t);
  const ShapeTable shapes = reference_shapes(space_->degree(), geo.barycentric(p));
  return value_in_cell(t, shapes, component);
}

Vec2 FEFunction::vector_value(Point p) const {
  const Mesh& m = space_->mesh();
  const int t = m.locate(p);
  const CellGeometry geo(m, t);
  const ShapeTable shapes = reference_shapes(space_->degree(), geo.barycentric(p));
  return {value_in_cell(t, shapes, 0), value_in_cell(t, shapes, 1)};
}

Vec2 FEFunction::gradient(Point p, int component) const {
  const Mesh& m = space_->mesh();
  const int t = m.locate(p);
  const CellGeometry geo(m, t);
  const ShapeTable shapes = reference_shapes(space_->degree(), geo.barycentric(p));
  const auto dofs = space_->cell_dofs(t);
  const std::size_t off = component * space_->scalar_ndof();
  Vec2 g;
  for (int i = 0; i < shapes.count; ++i) {
    const auto pg = geo.physical(shapes.grad[i]);
    g.x += pg[0] * coeffs_[off + dofs[i]];
    g.y += pg[1] * coeffs_[off + dofs[i]];
  }
  return g;
}

Mat2 FEFunction::vector_gradient(Point p) const {
  Mat2 m;
  for (int c = 0; c < 2; ++c) {
    const Vec2 g = gradient(p, c);
    m(c, 0) = g.x;
    m(c, 1) = g.y;
  }
  return m;
}

FEFunction interpolate(SpacePtr space, const ScalarFn& field) {
  FEFunction f(space);
  const std::size_t n = space->scalar_ndof();
  for (int c = 0; c < space->components(); ++c) {
    for (std::size_t i = 0; i < n; ++i) f.data()[c * n + i] = field(space->node(i));
  }
  return f;
}

FEFunction interpolate(SpacePtr space, const VectorFn& field) {
  if (space->components() != 2) {
    throw std::invalid_argument("interpolate: vector field needs a 2-component space");
  }
  FEFunction f(space);
  const std::size_t n = space->scalar_ndof();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 v = field(space->node(i));
    f.data()[i] = v.x;
    f.data()[n + i] = v.y;
  }
  return f;
}

std::vector<double> evaluate(const FEFunction& f, Point p) {
  if (f.space().components() == 1) return {f.value(p)};
  const Vec2 v = f.vector_value(p);
  return {v.x, v.y};
}

}  // namespace nsb
