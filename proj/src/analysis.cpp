#include "nsb/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "nsb/assembly.hpp"

namespace nsb {

namespace {

std::array<double, 2> cell_gradient(const FEFunction& f, std::size_t t, const CellGeometry& geo,
                                    const ShapeTable& s, int component) {
  const FunctionSpace& sp = f.space();
  const auto dofs = sp.cell_dofs(t);
  const std::size_t off = component * sp.scalar_ndof();
  std::array<double, 2> ref{0.0, 0.0};
  for (int i = 0; i < sp.local_size(); ++i) {
    const double c = f.data()[off + dofs[i]];
    ref[0] += c * s.grad[i][0];
    ref[1] += c * s.grad[i][1];
  }
  return geo.physical(ref);
}

void require_gradient(NormKind kind, bool present) {
  if (kind != NormKind::L2 && !present) {
    throw std::invalid_argument("error_norm: H1 norms need the exact gradient");
  }
}

}  // namespace

double error_norm(const FEFunction& f, const ScalarFn& exact, const GradientFn& exact_gradient,
                  NormKind kind, int component) {
  require_gradient(kind, static_cast<bool>(exact_gradient));
  const FunctionSpace& sp = f.space();
  if (component < 0 || component >= sp.components()) {
    throw std::invalid_argument("error_norm: component out of range");
  }
  const Mesh& mesh = sp.mesh();
  const QuadRule& rule = quadrature(kErrorQuadDegree);
  const auto shapes = tabulate(sp.degree(), rule);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const CellGeometry geo(mesh, t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * std::abs(geo.det);
      const Point x = geo.map(rule.points[q]);
      if (kind != NormKind::H1_seminorm) {
        const double e = f.value_in_cell(t, shapes[q], component) - exact(x);
        sum += w * e * e;
      }
      if (kind != NormKind::L2) {
        const auto g = cell_gradient(f, t, geo, shapes[q], component);
        const Vec2 ge = exact_gradient(x);
        sum += w * ((g[0] - ge.x) * (g[0] - ge.x) + (g[1] - ge.y) * (g[1] - ge.y));
      }
    }
  }
  return std::sqrt(sum);
}

double error_norm(const FEFunction& f, const VectorFn& exact, const TensorFn& exact_gradient,
                  NormKind kind) {
  if (f.space().components() != 2) throw std::invalid_argument("error_norm: not a vector field");
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    GradientFn g;
    if (exact_gradient) {
      g = [&, c](Point p) {
        const Mat2 m = exact_gradient(p);
        return Vec2{m(c, 0), m(c, 1)};
      };
    }
    const double e = error_norm(f, ScalarFn([&, c](Point p) { return exact(p)[c]; }), g, kind, c);
    sum += e * e;
  }
  return std::sqrt(sum);
}

double mean_value(const FEFunction& f, int component) {
  const FunctionSpace& sp = f.space();
  const Mesh& mesh = sp.mesh();
  const QuadRule& rule = quadrature(kErrorQuadDegree);
  const auto shapes = tabulate(sp.degree(), rule);
  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double jw = 2.0 * std::abs(mesh.signed_area(t));
    for (std::size_t q = 0; q < rule.size(); ++q)
      total += rule.weights[q] * jw * f.value_in_cell(t, shapes[q], component);
  }
  return total;
}

PressureError pressure_error(const FEFunction& p, const ScalarFn& exact, double exact_mean) {
  const double discrete_mean = mean_value(p);
  PressureError e;
  e.raw = error_norm(p, exact, {}, NormKind::L2);
  FEFunction shifted = p;
  for (double& v : shifted.data()) v -= discrete_mean;
  e.mean_subtracted =
      error_norm(shifted, ScalarFn([&](Point x) { return exact(x) - exact_mean; }), {}, NormKind::L2);
  return e;
}

// ---------------------------------------------------------------------------

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::L2_u: return "L2_u";
    case Quantity::H1_u: return "H1_u";
    case Quantity::L2_p: return "L2_p";
    case Quantity::L2_p_raw: return "L2_p_raw";
    case Quantity::L2_theta: return "L2_theta";
  }
  return "?";
}

Quantity parse_quantity(std::string_view text) {
  for (Quantity q : {Quantity::L2_u, Quantity::H1_u, Quantity::L2_p, Quantity::L2_p_raw,
                     Quantity::L2_theta}) {
    if (text == to_string(q)) return q;
  }
  throw std::invalid_argument("unknown norm '" + std::string(text) + "'");
}

std::vector<std::optional<double>> convergence_rates(const std::vector<ErrorRecord>& records) {
  std::vector<std::optional<double>> rates(records.size());
  int ok = 0;
  for (const auto& r : records) ok += r.ok() ? 1 : 0;
  if (ok < 2) return rates;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const ErrorRecord& a = records[i - 1];
    const ErrorRecord& b = records[i];
    if (!a.ok() || !b.ok() || *a.error <= 0.0 || *b.error <= 0.0 || a.h == b.h) continue;
    rates[i] = std::log(*a.error / *b.error) / std::log(a.h / b.h);
  }
  return rates;
}

TableFormat parse_table_format(std::string_view text) {
  if (text == "csv") return TableFormat::csv;
  if (text == "markdown" || text == "md") return TableFormat::markdown;
  throw std::invalid_argument("unknown format '" + std::string(text) + "' (csv or markdown)");
}

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", v);
  return buf;
}

namespace {

std::string format_rate(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r);
  return buf;
}

}  // namespace

std::string emit_table(const ConvergenceTable& table, TableFormat format) {
  std::vector<std::vector<std::optional<double>>> rates;
  for (const auto& col : table.columns) rates.push_back(convergence_rates(col));
  std::ostringstream os;
  const bool md = format == TableFormat::markdown;
  if (md) {
    os << "**" << table.case_id << "** " << table.elements << ", " << to_string(table.quantity)
       << "\n\n| h |";
    for (const auto& p : table.policies) os << " gamma=" << p << " | rate |";
    os << "\n|---|";
    for (std::size_t i = 0; i < table.policies.size(); ++i) os << "---|---|";
    os << '\n';
  } else {
    os << "n,h";
    for (const auto& p : table.policies) os << ',' << p << " err," << p << " rate";
    os << '\n';
  }
  for (std::size_t r = 0; r < table.subdivisions.size(); ++r) {
    const int n = table.subdivisions[r];
    if (md) {
      os << "| 1/" << n << " |";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", 1.0 / n);
      os << n << ',' << buf;
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const ErrorRecord* rec = r < table.columns[c].size() ? &table.columns[c][r] : nullptr;
      const std::string err = rec && rec->ok() ? format_sci(*rec->error) : "";
      const std::string rate = rates[c].size() > r && rates[c][r] ? format_rate(*rates[c][r]) : "";
      if (md) {
        os << ' ' << err << " | " << rate << " |";
      } else {
        os << ',' << err << ',' << rate;
      }
    }
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

ConvergenceTable parse_table_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  ConvergenceTable table;
  if (!std::getline(in, line)) throw std::invalid_argument("parse_table_csv: empty input");
  const auto header = split_line(line);
  if (header.size() < 2 || header[0] != "n" || header.size() % 2 != 0) {
    throw std::invalid_argument("parse_table_csv: unexpected header");
  }
  for (std::size_t k = 2; k < header.size(); k += 2) {
    const std::string& h = header[k];
    table.policies.push_back(h.size() > 4 ? h.substr(0, h.size() - 4) : h);
  }
  table.columns.resize(table.policies.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != header.size()) throw std::invalid_argument("parse_table_csv: ragged row");
    const int n = std::stoi(f[0]);
    table.subdivisions.push_back(n);
    for (std::size_t c = 0; c < table.policies.size(); ++c) {
      ErrorRecord rec;
      rec.h = std::stod(f[1]);
      const std::string& e = f[2 + 2 * c];
      if (e.empty()) {
        rec.status = CellStatus::solver_failed;
      } else {
        rec.error = std::stod(e);
      }
      table.columns[c].push_back(rec);
    }
  }
  return table;
}

std::vector<std::pair<double, double>> centerline_profile(const SystemState& state, int samples,
                                                          double y_line) {
  if (samples < 2) throw std::invalid_argument("centerline_profile: need at least 2 samples");
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / (samples - 1);
    out.emplace_back(x, state.u.value({x, y_line}, 1));
  }
  return out;
}

double profile_difference(const std::vector<std::pair<double, double>>& a,
                          const std::vector<std::pair<double, double>>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("profile_difference: profiles differ in length");
  }
  double s = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double d0 = a[i - 1].second - b[i - 1].second;
    const double d1 = a[i].second - b[i].second;
    s += 0.5 * (a[i].first - a[i - 1].first) * (d0 * d0 + d1 * d1);
  }
  return std::sqrt(s);
}

}  // namespace nsb
