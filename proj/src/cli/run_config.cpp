#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace sbm::cli {

namespace {

std::vector<double> parse_doubles(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  std::vector<double> out;
  double x;
  while (in >> x) out.push_back(x);
  std::string rest;
  if (in.clear(), in >> rest)
    throw ConfigError("config: non-numeric value for '" + key + "': " + value);
  if (out.empty()) throw ConfigError("config: empty value for '" + key + "'");
  return out;
}

double parse_double(const std::string& value, const std::string& key) {
  auto v = parse_doubles(value, key);
  if (v.size() != 1) throw ConfigError("config: expected one number for '" + key + "'");
  return v[0];
}

int parse_int(const std::string& value, const std::string& key) {
  const double d = parse_double(value, key);
  const int i = static_cast<int>(d);
  if (double(i) != d) throw ConfigError("config: expected an integer for '" + key + "'");
  return i;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  throw ConfigError("config: expected true/false for '" + key + "': " + value);
}

Point parse_point(const std::string& value, const std::string& key) {
  auto v = parse_doubles(value, key);
  if (v.size() != 2 && v.size() != 3)
    throw ConfigError("config: expected 2 or 3 numbers for '" + key + "'");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
  const std::set<std::string> experiments{"solve", "convergence", "lambda-sweep", "rms-gap"};
  if (!experiments.count(experiment))
    throw ConfigError("config: unknown experiment '" + experiment + "'");
  if (pde != "poisson" && pde != "elasticity")
    throw ConfigError("config: pde must be poisson or elasticity");
  const std::set<std::string> geometries{"circle", "polygon", "rotated-square", "star", "stl"};
  if (!geometries.count(geometry))
    throw ConfigError("config: unknown geometry '" + geometry + "'");
  if (level_min < 1 || level_max < level_min)
    throw ConfigError("config: level range must satisfy 1 <= min <= max");
  if (lambdas.empty()) throw ConfigError("config: lambda list must be nonempty");
  for (double l : lambdas)
    if (l < 0.0 || l > 1.0) throw ConfigError("config: lambda must be in [0,1]");
  if (bbox_padding < 0) throw ConfigError("config: bbox.padding must be >= 0");
  if (kdtree_k < 1) throw ConfigError("config: kdtree.k must be >= 1");
  if (solver_precond != "auto" && solver_precond != "ilu0" && solver_precond != "jacobi")
    throw ConfigError("config: solver.precond must be auto, ilu0, or jacobi");
  if (volume_fraction_points < 1 || volume_fraction_points > 10)
    throw ConfigError("config: volume_fraction.points must be in [1,10]");
  if (error_points < 1 || error_points > 10)
    throw ConfigError("config: error.points must be in [1,10]");
  if (grid_max_nodes < 8) throw ConfigError("config: grid.max_nodes too small");
  if (geometry == "polygon" && polygon_path.empty())
    throw ConfigError("config: polygon.path is required for polygon geometry");
  if (geometry == "stl" && stl_path.empty())
    throw ConfigError("config: stl.path is required for stl geometry");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: missing '=' at " + path + ":" + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw ConfigError("config: empty value for '" + key + "' at " + path + ":" +
                        std::to_string(lineno));

    if (key == "experiment") c.experiment = value;
    else if (key == "pde") c.pde = value;
    else if (key == "solution") c.solution = value;
    else if (key == "geometry") c.geometry = value;
    else if (key == "circle.center") c.circle_center = parse_point(value, key);
    else if (key == "circle.radius") c.circle_radius = parse_double(value, key);
    else if (key == "disk.u0") c.disk_u0 = parse_double(value, key);
    else if (key == "rotated_square.center") c.rotated_square_center = parse_point(value, key);
    else if (key == "rotated_square.half_side")
      c.rotated_square_half_side = parse_double(value, key);
    else if (key == "rotated_square.angle_deg")
      c.rotated_square_angle_deg = parse_double(value, key);
    else if (key == "star.center") c.star_center = parse_point(value, key);
    else if (key == "star.outer_radius") c.star_outer_radius = parse_double(value, key);
    else if (key == "star.inner_radius") c.star_inner_radius = parse_double(value, key);
    else if (key == "star.points") c.star_points = parse_int(value, key);
    else if (key == "star.rotation_deg") c.star_rotation_deg = parse_double(value, key);
    else if (key == "polygon.path") c.polygon_path = value;
    else if (key == "stl.path") c.stl_path = value;
    else if (key == "bbox.lo") { c.bbox_lo = parse_point(value, key); c.bbox_explicit = true; }
    else if (key == "bbox.hi") { c.bbox_hi = parse_point(value, key); c.bbox_explicit = true; }
    else if (key == "bbox.padding") c.bbox_padding = parse_double(value, key);
    else if (key == "level") { c.level_min = c.level_max = parse_int(value, key); }
    else if (key == "levels") {
      auto v = parse_doubles(value, key);
      if (v.size() != 2) throw ConfigError("config: 'levels' wants \"min max\"");
      c.level_min = static_cast<int>(v[0]);
      c.level_max = static_cast<int>(v[1]);
    }
    else if (key == "lambda") c.lambdas = parse_doubles(value, key);
    else if (key == "alpha") c.alpha = parse_double(value, key);
    else if (key == "gamma") c.gamma = parse_double(value, key);
    else if (key == "young") c.young = parse_double(value, key);
    else if (key == "nu") c.nu = parse_double(value, key);
    else if (key == "solver.tol") c.solver_tol = parse_double(value, key);
    else if (key == "solver.maxiter") c.solver_maxiter = parse_int(value, key);
    else if (key == "solver.precond") c.solver_precond = value;
    else if (key == "kdtree.k") c.kdtree_k = parse_int(value, key);
    else if (key == "carve") c.carve = parse_bool(value, key);
    else if (key == "volume_fraction.points") c.volume_fraction_points = parse_int(value, key);
    else if (key == "error.points") c.error_points = parse_int(value, key);
    else if (key == "grid.max_nodes") c.grid_max_nodes = parse_double(value, key);
    else if (key == "rms.weighted") c.rms_weighted = parse_bool(value, key);
    else if (key == "output.vtk") c.output_vtk = parse_bool(value, key);
    else if (key == "output.markers_csv") c.output_markers_csv = parse_bool(value, key);
    else if (key == "out") c.out_dir = value;
    else if (key == "threads") c.threads = parse_int(value, key);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_double(value, key));
    else
      throw ConfigError("config: unknown key '" + key + "' at " + path + ":" +
                        std::to_string(lineno));
  }
  c.validate();
  return c;
}

void write_effective_config(const RunConfig& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f.precision(17);
  auto point = [](const Point& p) {
    std::ostringstream s;
    s.precision(17);
    s << p[0] << " " << p[1] << " " << p[2];
    return s.str();
  };
  f << "experiment = " << c.experiment << "\n";
  f << "pde = " << c.pde << "\n";
  if (!c.solution.empty()) f << "solution = " << c.solution << "\n";
  f << "geometry = " << c.geometry << "\n";
  f << "circle.center = " << point(c.circle_center) << "\n";
  f << "circle.radius = " << c.circle_radius << "\n";
  f << "disk.u0 = " << c.disk_u0 << "\n";
  f << "rotated_square.center = " << point(c.rotated_square_center) << "\n";
  f << "rotated_square.half_side = " << c.rotated_square_half_side << "\n";
  f << "rotated_square.angle_deg = " << c.rotated_square_angle_deg << "\n";
  f << "star.center = " << point(c.star_center) << "\n";
  f << "star.outer_radius = " << c.star_outer_radius << "\n";
  f << "star.inner_radius = " << c.star_inner_radius << "\n";
  f << "star.points = " << c.star_points << "\n";
  f << "star.rotation_deg = " << c.star_rotation_deg << "\n";
  if (!c.polygon_path.empty()) f << "polygon.path = " << c.polygon_path << "\n";
  if (!c.stl_path.empty()) f << "stl.path = " << c.stl_path << "\n";
  if (c.bbox_explicit) {
    f << "bbox.lo = " << point(c.bbox_lo) << "\n";
    f << "bbox.hi = " << point(c.bbox_hi) << "\n";
  }
  f << "bbox.padding = " << c.bbox_padding << "\n";
  f << "levels = " << c.level_min << " " << c.level_max << "\n";
  f << "lambda =";
  for (double l : c.lambdas) f << " " << l;
  f << "\n";
  f << "alpha = " << c.alpha << "\n";
  f << "gamma = " << c.gamma << "\n";
  f << "young = " << c.young << "\n";
  f << "nu = " << c.nu << "\n";
  f << "solver.tol = " << c.solver_tol << "\n";
  f << "solver.maxiter = " << c.solver_maxiter << "\n";
  f << "solver.precond = " << c.solver_precond << "\n";
  f << "kdtree.k = " << c.kdtree_k << "\n";
  f << "carve = " << (c.carve ? "true" : "false") << "\n";
  f << "volume_fraction.points = " << c.volume_fraction_points << "\n";
  f << "error.points = " << c.error_points << "\n";
  f << "grid.max_nodes = " << c.grid_max_nodes << "\n";
  f << "rms.weighted = " << (c.rms_weighted ? "true" : "false") << "\n";
  f << "output.vtk = " << (c.output_vtk ? "true" : "false") << "\n";
  f << "output.markers_csv = " << (c.output_markers_csv ? "true" : "false") << "\n";
  f << "out = " << c.out_dir << "\n";
  f << "threads = " << c.threads << "\n";
  f << "seed = " << c.seed << "\n";
}

}  // namespace sbm::cli
