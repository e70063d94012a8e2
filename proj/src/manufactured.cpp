#include "sbm/manufactured.hpp"

#include <cmath>

namespace sbm {

namespace {
constexpr double kPi = M_PI;
}

ManufacturedSolution manufactured_library(const std::string& name,
                                          const ManufacturedParams& params) {
  ManufacturedSolution s;
  s.name = name;
  if (name == "disk") {
    const double R = params.disk_radius;
    const Point c = params.disk_center;
    const double u0 = params.disk_u0;
    s.value = [R, c, u0](const Point& p, int) {
      const double r2 = (p[0] - c[0]) * (p[0] - c[0]) + (p[1] - c[1]) * (p[1] - c[1]);
      return 0.25 * (R * R - r2) + u0;
    };
    s.gradient = [c](const Point& p, int) {
      return Point{-0.5 * (p[0] - c[0]), -0.5 * (p[1] - c[1]), 0};
    };
    s.forcing = [](const Point&, int) { return 1.0; };
    return s;
  }
  if (name == "star") {
    s.kind = PdeKind::Elasticity;
    s.components = 2;
    s.value = [](const Point& p, int comp) {
      return comp == 0 ? std::sin(kPi * p[0]) * std::cos(kPi * p[1]) / 10.0
                       : std::cos(kPi * p[0]) * std::sin(kPi * p[1]) / 10.0;
    };
    s.gradient = [](const Point& p, int comp) {
      if (comp == 0)
        return Point{kPi * std::cos(kPi * p[0]) * std::cos(kPi * p[1]) / 10.0,
                     -kPi * std::sin(kPi * p[0]) * std::sin(kPi * p[1]) / 10.0, 0};
      return Point{-kPi * std::sin(kPi * p[0]) * std::sin(kPi * p[1]) / 10.0,
                   kPi * std::cos(kPi * p[0]) * std::cos(kPi * p[1]) / 10.0, 0};
    };
    // -div(C eps(u)) collapses to 2 pi^2 E/(1-nu^2) u for this field.
    const double scale = 2.0 * kPi * kPi * params.youngs_modulus /
                         (1.0 - params.poisson_ratio * params.poisson_ratio);
    auto value = s.value;
    s.forcing = [scale, value](const Point& p, int comp) { return scale * value(p, comp); };
    return s;
  }
  if (name == "bunny" || name == "icosphere") {
    s.value = [](const Point& p, int) {
      return std::cos(kPi * p[0]) * p[1] * std::sin(kPi * p[2]);
    };
    s.gradient = [](const Point& p, int) {
      return Point{-kPi * std::sin(kPi * p[0]) * p[1] * std::sin(kPi * p[2]),
                   std::cos(kPi * p[0]) * std::sin(kPi * p[2]),
                   kPi * std::cos(kPi * p[0]) * p[1] * std::cos(kPi * p[2])};
    };
    auto value = s.value;
    s.forcing = [value](const Point& p, int) { return 2.0 * kPi * kPi * value(p, 0); };
    return s;
  }
  if (name == "moai" || name == "eiffel") {
    s.value = [](const Point& p, int) {
      return (1.0 - p[0]) * (1.0 - p[1]) * std::cos(3.0 * kPi * p[2]);
    };
    s.gradient = [](const Point& p, int) {
      return Point{-(1.0 - p[1]) * std::cos(3.0 * kPi * p[2]),
                   -(1.0 - p[0]) * std::cos(3.0 * kPi * p[2]),
                   -3.0 * kPi * (1.0 - p[0]) * (1.0 - p[1]) * std::sin(3.0 * kPi * p[2])};
    };
    auto value = s.value;
    s.forcing = [value](const Point& p, int) { return 9.0 * kPi * kPi * value(p, 0); };
    return s;
  }
  if (name == "armadillo") {
    s.value = [](const Point& p, int) {
      return std::cos(kPi * p[0]) * (1.0 - p[1]) * std::sin(kPi * p[2]);
    };
    s.gradient = [](const Point& p, int) {
      return Point{-kPi * std::sin(kPi * p[0]) * (1.0 - p[1]) * std::sin(kPi * p[2]),
                   -std::cos(kPi * p[0]) * std::sin(kPi * p[2]),
                   kPi * std::cos(kPi * p[0]) * (1.0 - p[1]) * std::cos(kPi * p[2])};
    };
    auto value = s.value;
    s.forcing = [value](const Point& p, int) { return 2.0 * kPi * kPi * value(p, 0); };
    return s;
  }
  throw ConfigError("manufactured_library: unknown solution '" + name + "'");
}

std::function<double(const Point&, int)> derive_forcing(
    std::function<double(const Point&, int)> value, PdeKind kind, int dim,
    double youngs_modulus, double poisson_ratio, double step) {
  if (kind == PdeKind::Poisson) {
    return [value, dim, step](const Point& p, int) {
      double lap = 0;
      for (int a = 0; a < dim; ++a) {
        Point pp = p, pm = p;
        pp[a] += step;
        pm[a] -= step;
        lap += (value(pp, 0) - 2.0 * value(p, 0) + value(pm, 0)) / (step * step);
      }
      return -lap;
    };
  }
  const ElasticTensor C = ElasticTensor::plane_stress(youngs_modulus, poisson_ratio);
  // sigma(y) from finite-difference strains, then b = -div sigma by a second
  // central difference.
  auto stress = [value, C, step](const Point& y, double out[3]) {
    double grad[2][2];
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a) {
        Point pp = y, pm = y;
        pp[a] += step;
        pm[a] -= step;
        grad[c][a] = (value(pp, c) - value(pm, c)) / (2.0 * step);
      }
    const double eps[3] = {grad[0][0], grad[1][1], grad[0][1] + grad[1][0]};
    for (int r = 0; r < 3; ++r)
      out[r] = C.c[r][0] * eps[0] + C.c[r][1] * eps[1] + C.c[r][2] * eps[2];
  };
  return [stress, step](const Point& p, int comp) {
    double div = 0;
    for (int a = 0; a < 2; ++a) {
      Point pp = p, pm = p;
      pp[a] += step;
      pm[a] -= step;
      double sp[3], sm[3];
      stress(pp, sp);
      stress(pm, sm);
      // Row comp of sigma: [s_xx, s_xy] or [s_xy, s_yy] in Voigt storage.
      const int idx = (comp == 0) ? (a == 0 ? 0 : 2) : (a == 0 ? 2 : 1);
      div += (sp[idx] - sm[idx]) / (2.0 * step);
    }
    return -div;
  };
}

}  // namespace sbm
