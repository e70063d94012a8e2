#pragma once

#include <string>
#include <vector>

#include "sbm/core.hpp"

namespace sbm::cli {

/// Flat key-value experiment configuration. Every field has a documented
/// key; unknown keys are rejected so typos fail loudly.
struct RunConfig {
  std::string experiment = "solve";  // solve | convergence | lambda-sweep | rms-gap
  std::string pde = "poisson";       // poisson | elasticity
  std::string solution;              // manufactured solution; empty = by geometry
  std::string geometry = "circle";   // circle | polygon | rotated-square | star | stl

  Point circle_center{0.5, 0.5, 0};
  double circle_radius = 0.5;
  double disk_u0 = 0.01;

  Point rotated_square_center{0, 0, 0};
  double rotated_square_half_side = 0.5;
  double rotated_square_angle_deg = 15.0;

  Point star_center{0, 0, 0};
  double star_outer_radius = 1.0;
  double star_inner_radius = 0.45;
  int star_points = 5;
  double star_rotation_deg = 0.0;

  std::string polygon_path;
  std::string stl_path;

  bool bbox_explicit = false;
  Point bbox_lo{0, 0, 0};
  Point bbox_hi{0, 0, 0};
  double bbox_padding = 0.05;

  int level_min = 6;
  int level_max = 6;
  std::vector<double> lambdas{0.5};

  double alpha = 400.0;
  double gamma = 400.0;
  double young = 1.0;
  double nu = 0.3;

  double solver_tol = 1e-12;
  int solver_maxiter = 0;  // 0 = automatic
  std::string solver_precond = "auto";  // auto | jacobi | ilu0
  int kdtree_k = 32;
  bool carve = true;
  int volume_fraction_points = 5;
  int error_points = 5;
  double grid_max_nodes = double(std::size_t(1) << 26);
  bool rms_weighted = true;

  bool output_vtk = false;
  bool output_markers_csv = false;
  std::string out_dir = ".";
  int threads = 0;  // 0 = library default
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

RunConfig parse_config_file(const std::string& path);
void write_effective_config(const RunConfig& config, const std::string& path);

}  // namespace sbm::cli
