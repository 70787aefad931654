#include "nsb/cases.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nsb {

PhysicalParams PhysicalParams::from_rayleigh_prandtl(double ra, double pr) {
  PhysicalParams p{ra, pr, std::sqrt(ra / pr)};
  p.validate();
  return p;
}

void PhysicalParams::validate() const {
  if (!(rayleigh > 0.0 && prandtl > 0.0 && reynolds > 0.0)) {
    throw std::invalid_argument("PhysicalParams: Ra, Pr and Re must be positive");
  }
}

// ---------------------------------------------------------------------------

double burggraf_pressure_mean(const BurggrafParams& prm) {
  // 6-point Gauss-Legendre on [0,1] is exact to degree 11 per direction.
  static constexpr double nodes[6] = {0.033765242898423986, 0.16939530676686776,
                                      0.38069040695840156,  0.61930959304159844,
                                      0.83060469323313224,  0.96623475710157601};
  static constexpr double weights[6] = {0.085662246189585173, 0.18038078652406930,
                                        0.23395696728634552,  0.23395696728634552,
                                        0.18038078652406930,  0.085662246189585173};
  double mean = 0.0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      double u1, u2, p;
      burggraf_fields(prm, nodes[i], nodes[j], u1, u2, p);
      mean += weights[i] * weights[j] * p;
    }
  }
  return mean;
}

namespace {

struct BurggrafPolys {
  double g, g1, g2, g3, g4, h, h1, h2, h3, h4;
  BurggrafPolys(double x, double y) {
    g = std::pow(x, 5) / 5.0 - std::pow(x, 4) / 2.0 + std::pow(x, 3) / 3.0;
    g1 = std::pow(x, 4) - 2.0 * std::pow(x, 3) + x * x;
    g2 = 4.0 * x * x * x - 6.0 * x * x + 2.0 * x;
    g3 = 12.0 * x * x - 12.0 * x + 2.0;
    g4 = 24.0 * x - 12.0;
    h = std::pow(y, 4) - y * y;
    h1 = 4.0 * y * y * y - 2.0 * y;
    h2 = 12.0 * y * y - 2.0;
    h3 = 24.0 * y;
    h4 = 24.0;
  }
};

}  // namespace

AnalyticCase burggraf_case(double reynolds, double chi) {
  if (!(reynolds > 0.0 && chi > 0.0)) {
    throw std::invalid_argument("burggraf_case: Re and chi must be positive");
  }
  const BurggrafParams prm{reynolds, chi};
  const double mean = burggraf_pressure_mean(prm);

  AnalyticCase c;
  c.name = "mp-bur";
  c.params = {1.0, 1.0, reynolds};
  c.steady = true;
  c.velocity = [prm](Point p, double) {
    double u1, u2, pt;
    burggraf_fields(prm, p.x, p.y, u1, u2, pt);
    return Vec2{u1, u2};
  };
  c.velocity_gradient = [chi](Point p, double) {
    const BurggrafPolys f(p.x, p.y);
    Mat2 m;
    m(0, 0) = chi * f.g2 * f.h1;
    m(0, 1) = chi * f.g1 * f.h2;
    m(1, 0) = -chi * f.g3 * f.h;
    m(1, 1) = -chi * f.g2 * f.h1;
    return m;
  };
  c.pressure = [prm, mean](Point p, double) {
    double u1, u2, pt;
    burggraf_fields(prm, p.x, p.y, u1, u2, pt);
    return pt - mean;
  };
  c.pressure_mean = [](double) { return 0.0; };
  c.momentum_source = [chi, reynolds](Point p, double) {
    const BurggrafPolys f(p.x, p.y);
    const double u1 = chi * f.g1 * f.h1;
    const double u2 = -chi * f.g2 * f.h;
    const double lap1 = chi * (f.g3 * f.h1 + f.g1 * f.h3);
    const double lap2 = -chi * (f.g4 * f.h + f.g2 * f.h2);
    const double dpx = chi / reynolds * (f.h3 * f.g1 + f.g3 * f.h1) +
                       chi * chi * f.g1 * f.g2 * (f.h * f.h2 - f.h1 * f.h1);
    const double dpy = chi / reynolds * (f.h4 * f.g + f.g2 * f.h2) +
                       0.5 * chi * chi * f.g1 * f.g1 * (f.h * f.h3 - f.h1 * f.h2);
    const double conv1 = u1 * chi * f.g2 * f.h1 + u2 * chi * f.g1 * f.h2;
    const double conv2 = u1 * (-chi * f.g3 * f.h) + u2 * (-chi * f.g2 * f.h1);
    return Vec2{-lap1 / reynolds + conv1 + dpx, -lap2 / reynolds + conv2 + dpy};
  };
  c.velocity_boundary = c.velocity;
  c.initial_velocity = c.velocity;
  return c;
}

// ---------------------------------------------------------------------------

NourgalievSources nourgaliev_sources(const NourgalievParams& c, double x, double y, double t) {
  const double a = x + c.gamma1 * t;
  const double b = y + c.gamma2 * t;
  const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
  const double uc = c.delta_u0 + c.alpha_u * std::sin(t);
  const double tc = c.delta_theta0 + (c.literal_source_amplitudes ? c.alpha_u : c.alpha_t) * std::sin(t);
  const double pc = c.delta_p0 + (c.literal_source_amplitudes ? c.alpha_u : c.alpha_p) * std::sin(t);
  const PhysicalParams prm = PhysicalParams::from_rayleigh_prandtl(c.rayleigh, c.prandtl);
  const double re = prm.reynolds;
  const double u1 = uc * ca * sb;
  const double u2 = -uc * sa * cb;
  const double theta = c.theta_bar + (c.delta_theta0 + c.alpha_t * std::sin(t)) * ca * sb;

  NourgalievSources s;
  s.fu1 = c.alpha_u * std::cos(t) * ca * sb - uc * c.gamma1 * sa * sb + uc * c.gamma2 * ca * cb -
          uc * u1 * sa * sb + uc * u2 * ca * cb + pc * ca * cb + 2.0 / re * u1;
  s.fu2 = -c.alpha_u * std::cos(t) * sa * cb - uc * c.gamma1 * ca * cb + uc * c.gamma2 * sa * sb -
          uc * u1 * ca * cb + uc * u2 * sa * sb - pc * sa * sb + 2.0 / re * u2 -
          prm.buoyancy_coefficient() * theta;
  s.ftheta = c.alpha_t * std::cos(t) * ca * sb - tc * c.gamma1 * sa * sb + tc * c.gamma2 * ca * cb -
             tc * u1 * sa * sb + tc * u2 * ca * cb + 2.0 * c.k / (re * c.prandtl) * tc * ca * sb;
  return s;
}

AnalyticCase nourgaliev_case(const NourgalievParams& prm) {
  AnalyticCase c;
  c.name = "nc-nour";
  c.params = PhysicalParams::from_rayleigh_prandtl(prm.rayleigh, prm.prandtl);
  c.steady = false;
  c.t_final = std::numbers::pi / 2.0;
  c.velocity = [prm](Point p, double t) {
    double u1, u2, pr, th;
    nourgaliev_fields(prm, p.x, p.y, t, u1, u2, pr, th);
    return Vec2{u1, u2};
  };
  c.velocity_gradient = [prm](Point p, double t) {
    const double a = p.x + prm.gamma1 * t;
    const double b = p.y + prm.gamma2 * t;
    const double uc = prm.delta_u0 + prm.alpha_u * std::sin(t);
    Mat2 m;
    m(0, 0) = -uc * std::sin(a) * std::sin(b);
    m(0, 1) = uc * std::cos(a) * std::cos(b);
    m(1, 0) = -uc * std::cos(a) * std::cos(b);
    m(1, 1) = uc * std::sin(a) * std::sin(b);
    return m;
  };
  c.pressure = [prm](Point p, double t) {
    double u1, u2, pr, th;
    nourgaliev_fields(prm, p.x, p.y, t, u1, u2, pr, th);
    return pr;
  };
  c.pressure_mean = [prm](double t) {
    const double pc = prm.delta_p0 + prm.alpha_p * std::sin(t);
    const double ix = std::cos(prm.gamma1 * t) - std::cos(1.0 + prm.gamma1 * t);
    const double iy = std::sin(1.0 + prm.gamma2 * t) - std::sin(prm.gamma2 * t);
    return prm.p_bar + pc * ix * iy;
  };
  c.temperature = [prm](Point p, double t) {
    double u1, u2, pr, th;
    nourgaliev_fields(prm, p.x, p.y, t, u1, u2, pr, th);
    return th;
  };
  c.temperature_gradient = [prm](Point p, double t) {
    const double a = p.x + prm.gamma1 * t;
    const double b = p.y + prm.gamma2 * t;
    const double tc = prm.delta_theta0 + prm.alpha_t * std::sin(t);
    return Vec2{-tc * std::sin(a) * std::sin(b), tc * std::cos(a) * std::cos(b)};
  };
  c.momentum_source = [prm](Point p, double t) {
    const auto s = nourgaliev_sources(prm, p.x, p.y, t);
    return Vec2{s.fu1, s.fu2};
  };
  c.heat_source = [prm](Point p, double t) { return nourgaliev_sources(prm, p.x, p.y, t).ftheta; };
  c.velocity_boundary = c.velocity;
  for (SideTag s : {SideTag::Left, SideTag::Right, SideTag::Top, SideTag::Bottom}) {
    c.temperature_boundary[s] = c.temperature;
  }
  c.initial_velocity = c.velocity;
  c.initial_temperature = c.temperature;
  return c;
}

// ---------------------------------------------------------------------------

AnalyticCase cavity_case(double rayleigh, double prandtl) {
  AnalyticCase c;
  c.name = "nc-sq";
  c.params = PhysicalParams::from_rayleigh_prandtl(rayleigh, prandtl);
  c.steady = true;
  c.momentum_source = [](Point, double) { return Vec2{}; };
  c.heat_source = [](Point, double) { return 0.0; };
  c.velocity_boundary = [](Point, double) { return Vec2{}; };
  c.temperature_boundary[SideTag::Left] = [](Point, double) { return 0.5; };
  c.temperature_boundary[SideTag::Right] = [](Point, double) { return -0.5; };
  c.initial_velocity = [](Point, double) { return Vec2{}; };
  c.initial_temperature = [](Point p, double) { return 0.5 - p.x; };
  return c;
}

AnalyticCase case_by_name(std::string_view name) {
  if (name == "mp-bur") return burggraf_case();
  if (name == "nc-nour") return nourgaliev_case();
  if (name == "nc-sq") return cavity_case();
  throw std::invalid_argument("unknown case '" + std::string(name) +
                              "' (expected mp-bur, mp-nc, nc-nour or nc-sq)");
}

// ---------------------------------------------------------------------------

namespace {

double parse_double(std::string_view s) {
  std::string str(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != str.size() || str.empty()) {
    throw std::invalid_argument("GammaPolicy: cannot parse number '" + str + "'");
  }
  return v;
}

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

GammaPolicy GammaPolicy::parse(std::string_view text) {
  if (text == "re13h23") return power_law(1.0 / 3.0, 2.0 / 3.0);
  if (text == "re12h") return power_law(0.5, 1.0);
  if (text == "reh2") return power_law(1.0, 2.0);
  if (text.starts_with("pow:")) {
    std::vector<double> parts;
    std::string_view rest = text.substr(4);
    while (true) {
      const auto comma = rest.find(',');
      parts.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (parts.size() != 3) throw std::invalid_argument("GammaPolicy: expected pow:c,a,b");
    return power_law(parts[1], parts[2], parts[0]);
  }
  if (text.starts_with("const:")) text = text.substr(6);
  const double v = parse_double(text);
  if (v < 0.0) throw std::invalid_argument("GammaPolicy: negative penalty");
  return constant(v);
}

std::string GammaPolicy::name() const {
  std::ostringstream os;
  if (kind == Kind::constant) {
    os << coefficient;
    return os.str();
  }
  if (near(coefficient, 1.0)) {
    if (near(re_exponent, 1.0 / 3.0) && near(h_exponent, 2.0 / 3.0)) return "re13h23";
    if (near(re_exponent, 0.5) && near(h_exponent, 1.0)) return "re12h";
    if (near(re_exponent, 1.0) && near(h_exponent, 2.0)) return "reh2";
  }
  os.precision(17);
  os << "pow:" << coefficient << ',' << re_exponent << ',' << h_exponent;
  return os.str();
}

std::string GammaPolicy::label() const {
  if (kind == Kind::constant) return name();
  const std::string n = name();
  if (n == "re13h23") return "Re^1/3 h^2/3";
  if (n == "re12h") return "Re^1/2 h";
  if (n == "reh2") return "Re h^2";
  std::ostringstream os;
  os << coefficient << " Re^" << re_exponent << " h^" << h_exponent;
  return os.str();
}

double gamma_value(const GammaPolicy& policy, double h, double reynolds) {
  if (policy.kind == GammaPolicy::Kind::constant) return policy.coefficient;
  if (!(h > 0.0 && reynolds > 0.0)) throw std::invalid_argument("gamma_value: h and Re must be positive");
  return policy.coefficient * std::pow(reynolds, policy.re_exponent) * std::pow(h, policy.h_exponent);
}

std::vector<GammaPolicy> standard_gamma_policies() {
  return {GammaPolicy::constant(1e-7), GammaPolicy::power_law(1.0 / 3.0, 2.0 / 3.0),
          GammaPolicy::power_law(0.5, 1.0), GammaPolicy::power_law(1.0, 2.0)};
}

}  // namespace nsb
