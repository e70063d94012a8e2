#pragma once

#include <functional>
#include <string>

#include "sbm/assembly.hpp"

namespace sbm {

/// Closed-form exact solution with matching forcing and Dirichlet data.
struct ManufacturedSolution {
  std::string name;
  PdeKind kind = PdeKind::Poisson;
  int components = 1;
  std::function<double(const Point&, int)> value;
  std::function<Point(const Point&, int)> gradient;
  std::function<double(const Point&, int)> forcing;
};

struct ManufacturedParams {
  double disk_radius = 0.5;
  Point disk_center{0.5, 0.5, 0};
  double disk_u0 = 0.01;
  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;
};

/// Library of the benchmark solutions: "disk" (radial Poisson), "star"
/// (plane-stress displacement pair), "bunny"/"icosphere", "moai",
/// "armadillo", "eiffel" (3D Poisson fields). Unknown names raise
/// ConfigError.
ManufacturedSolution manufactured_library(const std::string& name,
                                          const ManufacturedParams& params = {});

/// Forcing derived from an exact field by central finite differences:
/// -laplacian(u) for Poisson, -div(C eps(u)) for plane stress. Cross-checks
/// the closed forms carried by the library.
std::function<double(const Point&, int)> derive_forcing(
    std::function<double(const Point&, int)> value, PdeKind kind, int dim,
    double youngs_modulus = 1.0, double poisson_ratio = 0.3, double step = 1e-4);

}  // namespace sbm
