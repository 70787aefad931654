#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nsb/function_space.hpp"
#include "nsb/mesh.hpp"

namespace nsb {

/// Dimensionless groups. Buoyancy force is (Ra / (Pr Re^2)) theta e_y.
struct PhysicalParams {
  double rayleigh = 1.0;
  double prandtl = 1.0;
  double reynolds = 1.0;

  double buoyancy_coefficient() const { return rayleigh / (prandtl * reynolds * reynolds); }
  double thermal_diffusivity() const { return 1.0 / (reynolds * prandtl); }
  /// Re = sqrt(Ra / Pr).
  static PhysicalParams from_rayleigh_prandtl(double ra, double pr);
  /// Throws std::invalid_argument unless all groups are positive.
  void validate() const;
};

using SpaceTimeScalar = std::function<double(Point, double)>;
using SpaceTimeVector = std::function<Vec2(Point, double)>;
using SpaceTimeTensor = std::function<Mat2(Point, double)>;

/// Exact fields, forcing, boundary and initial data of one benchmark.
/// Fields that a case does not define are left empty.
struct AnalyticCase {
  std::string name;
  PhysicalParams params;
  bool steady = false;
  double t_final = 0.0;

  SpaceTimeVector velocity;
  SpaceTimeTensor velocity_gradient;
  SpaceTimeScalar pressure;
  /// Mean of the exact pressure over the unit square.
  std::function<double(double)> pressure_mean;
  SpaceTimeScalar temperature;
  SpaceTimeVector temperature_gradient;

  SpaceTimeVector momentum_source;
  SpaceTimeScalar heat_source;

  /// Dirichlet velocity imposed on the whole boundary.
  SpaceTimeVector velocity_boundary;
  /// Dirichlet temperature per side; absent sides are adiabatic.
  std::map<SideTag, SpaceTimeScalar> temperature_boundary;

  SpaceTimeVector initial_velocity;
  SpaceTimeScalar initial_temperature;

  bool has_exact_solution() const { return static_cast<bool>(velocity); }
  bool has_temperature() const { return static_cast<bool>(initial_temperature); }
};

// ---------------------------------------------------------------------------
// Burggraf recirculating flow.

struct BurggrafParams {
  double reynolds = 1.0;
  double chi = 8.0;
};

/// Exact Burggraf velocity and the un-normalized pressure p~, templated on the
/// scalar type so tests can differentiate them automatically.
template <class T>
void burggraf_fields(const BurggrafParams& prm, const T& x, const T& y, T& u1, T& u2, T& p_tilde) {
  const T g = x * x * x * x * x / 5.0 - x * x * x * x / 2.0 + x * x * x / 3.0;
  const T g1 = x * x * x * x - 2.0 * x * x * x + x * x;
  const T g2 = 4.0 * x * x * x - 6.0 * x * x + 2.0 * x;
  const T h = y * y * y * y - y * y;
  const T h1 = 4.0 * y * y * y - 2.0 * y;
  const T h2 = 12.0 * y * y - 2.0;
  const T h3 = 24.0 * y;
  const double chi = prm.chi;
  u1 = chi * g1 * h1;
  u2 = -chi * g2 * h;
  p_tilde = (chi / prm.reynolds) * (h3 * g + g2 * h1) + 0.5 * chi * chi * g1 * g1 * (h * h2 - h1 * h1);
}

/// Mean of p~ over the unit square (tensor Gauss-Legendre, exact for the polynomial).
double burggraf_pressure_mean(const BurggrafParams& prm);

/// Steady Burggraf case. The exact pair satisfies the Stokes part used by the
/// projection study; momentum_source holds -(1/Re) lap u + (u.grad)u + grad p,
/// the body force implied by the printed pressure.
AnalyticCase burggraf_case(double reynolds = 1.0, double chi = 8.0);

// ---------------------------------------------------------------------------
// Time-dependent manufactured natural convection solution.

struct NourgalievParams {
  double gamma1 = 0.1;
  double gamma2 = 0.1;
  double p_bar = 0.0;
  double theta_bar = 1.0;
  double delta_p0 = 0.1;
  double delta_theta0 = 1.0;
  double delta_u0 = 1.0;
  double alpha_p = 0.05;
  double alpha_u = 0.4;
  double alpha_t = 0.1;
  double rayleigh = 1e6;
  double prandtl = 0.71;
  /// Diffusion scaling K of the heat source.
  double k = 1.0;
  /// Use alpha_u inside the temperature and pressure amplitudes of the
  /// sources, as typeset in the source listing. Off by default: those
  /// amplitudes are inconsistent with the fields.
  bool literal_source_amplitudes = false;
};

template <class T>
void nourgaliev_fields(const NourgalievParams& c, const T& x, const T& y, const T& t, T& u1, T& u2,
                       T& p, T& theta) {
  using std::cos;
  using std::sin;
  const T a = x + c.gamma1 * t;
  const T b = y + c.gamma2 * t;
  const T uc = c.delta_u0 + c.alpha_u * sin(t);
  const T tc = c.delta_theta0 + c.alpha_t * sin(t);
  const T pc = c.delta_p0 + c.alpha_p * sin(t);
  u1 = uc * cos(a) * sin(b);
  u2 = -uc * sin(a) * cos(b);
  theta = c.theta_bar + tc * cos(a) * sin(b);
  p = c.p_bar + pc * sin(a) * cos(b);
}

struct NourgalievSources {
  double fu1 = 0.0;
  double fu2 = 0.0;
  double ftheta = 0.0;
};

/// Momentum and heat sources evaluated term by term from the closed-form listing.
NourgalievSources nourgaliev_sources(const NourgalievParams& c, double x, double y, double t);

AnalyticCase nourgaliev_case(const NourgalievParams& params = {});

// ---------------------------------------------------------------------------
// Differentially heated square cavity (no exact solution).

AnalyticCase cavity_case(double rayleigh = 1e4, double prandtl = 0.71);

/// Looks a case up by CLI name: mp-bur, nc-nour, nc-sq. Throws std::invalid_argument.
AnalyticCase case_by_name(std::string_view name);

// ---------------------------------------------------------------------------
// Penalty parameter policies.

struct GammaPolicy {
  enum class Kind { constant, power_law };
  Kind kind = Kind::constant;
  double coefficient = 1.0;  // constant value, or prefactor of Re^a h^b
  double re_exponent = 0.0;
  double h_exponent = 0.0;

  static GammaPolicy constant(double value) { return {Kind::constant, value, 0.0, 0.0}; }
  static GammaPolicy power_law(double re_exponent, double h_exponent, double coefficient = 1.0) {
    return {Kind::power_law, coefficient, re_exponent, h_exponent};
  }
  /// Accepts "1e-7" style constants, the short names re13h23, re12h, reh2,
  /// or "pow:c,a,b" for c Re^a h^b. Throws std::invalid_argument.
  static GammaPolicy parse(std::string_view text);
  /// Short machine name (round-trips through parse).
  std::string name() const;
  /// Column header, e.g. "Re^1/2 h".
  std::string label() const;
};

double gamma_value(const GammaPolicy& policy, double h, double reynolds);

/// The four policies of the convergence tables, in column order.
std::vector<GammaPolicy> standard_gamma_policies();

}  // namespace nsb
