#include "experiments.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "sbm/manufactured.hpp"
#include "sbm/reference.hpp"
#include "sbm/solve.hpp"
#include "sbm/vtk.hpp"

namespace sbm::cli {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string lambda_label(double lambda) {
  std::ostringstream s;
  s << lambda;
  std::string out = s.str();
  for (char& ch : out)
    if (ch == '.') ch = 'p';
  return out;
}

struct MetricNames {
  std::vector<std::string> l2n, slope, improvement;
};

MetricNames metric_names(int ncomp) {
  if (ncomp == 1) return {{"L2N"}, {"slope"}, {"I2lambda"}};
  return {{"L2N_ux", "L2N_uy"}, {"slope_ux", "slope_uy"}, {"I2lambda_ux", "I2lambda_uy"}};
}

}  // namespace

std::unique_ptr<Geometry> make_geometry(const RunConfig& c) {
  if (c.geometry == "circle") return std::make_unique<Circle>(c.circle_center, c.circle_radius);
  if (c.geometry == "rotated-square")
    return std::make_unique<Polygon>(make_rotated_square(
        c.rotated_square_center, c.rotated_square_half_side, c.rotated_square_angle_deg));
  if (c.geometry == "star")
    return std::make_unique<Polygon>(make_star(c.star_center, c.star_outer_radius,
                                                c.star_inner_radius, c.star_points,
                                                c.star_rotation_deg));
  if (c.geometry == "polygon") return std::make_unique<Polygon>(load_polygon(c.polygon_path));
  if (c.geometry == "stl")
    return std::make_unique<TriangleSoupGeometry>(load_stl(c.stl_path), c.kdtree_k);
  throw ConfigError("unknown geometry '" + c.geometry + "'");
}

namespace {

std::string default_solution(const RunConfig& c) {
  if (!c.solution.empty()) return c.solution;
  if (c.geometry == "circle") return "disk";
  if (c.geometry == "star") return "star";
  if (c.geometry == "stl") return "bunny";
  throw ConfigError("config: 'solution' is required for geometry '" + c.geometry + "'");
}

BoundingBox grid_bbox(const RunConfig& c, const Geometry& g) {
  if (c.bbox_explicit) {
    BoundingBox b;
    b.dim = g.dim();
    b.lo = c.bbox_lo;
    b.hi = c.bbox_hi;
    b.validate();
    return b;
  }
  return pad_and_squarify(g.bounds(), c.bbox_padding);
}

void write_rows(const RunOutputs& out, const std::string& dir) {
  {
    std::ofstream f(dir + "/results.csv");
    if (!f) throw IoError("cannot write results.csv under " + dir);
    f.precision(17);
    f << kResultHeader << "\n";
    for (const ResultRow& r : out.rows)
      f << r.experiment << "," << r.geometry << "," << r.level << "," << r.h << "," << r.lambda
        << "," << r.metric << "," << r.value << "," << r.walltime_seconds << "\n";
  }
  {
    std::ofstream f(dir + "/timings.csv");
    if (!f) throw IoError("cannot write timings.csv under " + dir);
    f.precision(17);
    f << kTimingHeader << "\n";
    for (const TimingRow& t : out.timings)
      f << t.experiment << "," << t.geometry << "," << t.level << "," << t.lambda << ","
        << t.stage << "," << t.seconds << "\n";
  }
}

}  // namespace

RunOutputs run_experiment(const RunConfig& config) {
  config.validate();
#ifdef _OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
  std::filesystem::create_directories(config.out_dir);
  write_effective_config(config, config.out_dir + "/config.effective.txt");

  const std::unique_ptr<Geometry> geometry = make_geometry(config);
  const BoundingBox bbox = grid_bbox(config, *geometry);
  const bool solving = config.experiment != "rms-gap";

  SurrogateOptions sopt;
  sopt.volume_fraction_points = config.volume_fraction_points;

  ManufacturedSolution solution;
  PdeSpec spec;
  if (solving) {
    ManufacturedParams params;
    params.disk_radius = config.circle_radius;
    params.disk_center = config.circle_center;
    params.disk_u0 = config.disk_u0;
    params.youngs_modulus = config.young;
    params.poisson_ratio = config.nu;
    solution = manufactured_library(default_solution(config), params);
    spec.kind = config.pde == "poisson" ? PdeKind::Poisson : PdeKind::Elasticity;
    if (spec.kind == PdeKind::Elasticity && geometry->dim() != 2)
      throw ConfigError("config: elasticity requires a 2D geometry");
    const int want = spec.kind == PdeKind::Poisson ? 1 : geometry->dim();
    if (solution.components != want)
      throw ConfigError("config: solution '" + solution.name + "' has " +
                        std::to_string(solution.components) + " components, pde wants " +
                        std::to_string(want));
    spec.penalty = spec.kind == PdeKind::Poisson ? config.alpha : config.gamma;
    spec.youngs_modulus = config.young;
    spec.poisson_ratio = config.nu;
    spec.forcing = solution.forcing;
    spec.dirichlet = solution.value;
  }

  RunOutputs out;
  const MetricNames names = metric_names(solving ? solution.components : 1);
  // reports[lambda index][level index]
  std::map<int, std::map<int, ErrorReport>> reports;
  const auto t_experiment = std::chrono::steady_clock::now();

  for (int level = config.level_min; level <= config.level_max; ++level) {
    auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = build_grid(bbox, level, geometry.get(), config.carve,
                                 static_cast<std::size_t>(config.grid_max_nodes));
    const double t_grid = seconds_since(t0);

    for (std::size_t li = 0; li < config.lambdas.size(); ++li) {
      const double lambda = config.lambdas[li];
      auto push_timing = [&](const std::string& stage, double s) {
        out.timings.push_back(
            {config.experiment, config.geometry, level, lambda, stage, s});
      };
      push_timing("grid_build", t_grid);

      t0 = std::chrono::steady_clock::now();
      SurrogateResult sur = identify_surrogate(mesh, *geometry, lambda, sopt);
      const double t_surrogate = seconds_since(t0);
      push_timing("surrogate_identify", t_surrogate);

      if (config.output_markers_csv)
        export_markers_csv(mesh, sur.markers,
                           config.out_dir + "/markers_L" + std::to_string(level) + "_lam" +
                               lambda_label(lambda) + ".csv");
      if (config.output_vtk)
        export_boundary_vtk(mesh, sur.boundary,
                            config.out_dir + "/boundary_L" + std::to_string(level) + "_lam" +
                                lambda_label(lambda) + ".vtk");

      if (!solving) {
        out.rows.push_back({config.experiment, config.geometry, level, mesh.h(), lambda,
                            "rms_gap", rms_gap(sur.boundary, config.rms_weighted),
                            t_grid + t_surrogate});
        continue;
      }

      t0 = std::chrono::steady_clock::now();
      const SparseSystem system =
          spec.kind == PdeKind::Poisson
              ? assemble_poisson(mesh, sur.markers, sur.boundary, spec)
              : assemble_elasticity(mesh, sur.markers, sur.boundary, spec);
      const double t_assemble = seconds_since(t0);
      push_timing("assemble", t_assemble);

      t0 = std::chrono::steady_clock::now();
      SolveStats stats;
      std::vector<double> x =
          solve(system, config.solver_tol, config.solver_maxiter, &stats,
                config.solver_precond == "jacobi"
                    ? SolverPrecond::Jacobi
                    : (config.solver_precond == "ilu0" ? SolverPrecond::Ilu0
                                                       : SolverPrecond::Auto));
      const double t_solve = seconds_since(t0);
      push_timing("solve", t_solve);

      const SolutionField field = make_solution(mesh, sur.markers, sur.boundary, system, std::move(x));
      t0 = std::chrono::steady_clock::now();
      const ErrorReport rep = l2_error(field, solution.value, *geometry, config.error_points);
      const double t_error = seconds_since(t0);
      push_timing("error", t_error);

      const double walltime = t_grid + t_surrogate + t_assemble + t_solve + t_error;
      for (int c = 0; c < rep.ncomp; ++c)
        out.rows.push_back({config.experiment, config.geometry, level, mesh.h(), lambda,
                            names.l2n[c], rep.l2n[c], walltime});
      reports[int(li)][level] = rep;

      if (config.output_vtk)
        export_vtk(mesh, sur.markers, &field,
                   config.out_dir + "/field_L" + std::to_string(level) + "_lam" +
                       lambda_label(lambda) + ".vtk");
    }
  }

  if (solving) {
    // Improvement factors against lambda = 1 when present in the sweep.
    std::int64_t ref_li = -1;
    for (std::size_t li = 0; li < config.lambdas.size(); ++li)
      if (config.lambdas[li] == 1.0) ref_li = static_cast<std::int64_t>(li);
    if (ref_li >= 0) {
      for (std::size_t li = 0; li < config.lambdas.size(); ++li)
        for (const auto& [level, rep] : reports[int(li)]) {
          const ErrorReport& ref = reports[int(ref_li)].at(level);
          for (int c = 0; c < rep.ncomp; ++c)
            out.rows.push_back({config.experiment, config.geometry, level, rep.h,
                                config.lambdas[li], names.improvement[c],
                                improvement_factor(rep, ref, c), 0.0});
        }
    }
    // Fitted slopes per lambda over the level range.
    if (config.level_max - config.level_min + 1 >= 3) {
      for (std::size_t li = 0; li < config.lambdas.size(); ++li) {
        ConvergenceTable table;
        for (const auto& [level, rep] : reports[int(li)]) table.rows.push_back(rep);
        for (int c = 0; c < table.rows.front().ncomp; ++c)
          out.rows.push_back({config.experiment, config.geometry, config.level_max,
                              table.rows.back().h, config.lambdas[li], names.slope[c],
                              fit_slope(table, c), 0.0});
      }
    }
  }

  out.timings.push_back({config.experiment, config.geometry, 0, 0.0, "total",
                         seconds_since(t_experiment)});
  write_rows(out, config.out_dir);
  return out;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Shifted-boundary finite element experiments on Cartesian grids"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path, out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  bool have_out = false, have_threads = false, have_seed = false;
  run->add_option("config", config_path, "flat key-value config file")->required();
  CLI::Option* o1 = run->add_option("--out", out_dir, "output directory");
  CLI::Option* o2 = run->add_option("--threads", threads, "OpenMP thread count");
  CLI::Option* o3 = run->add_option("--seed", seed, "seed recorded with the run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  have_out = o1->count() > 0;
  have_threads = o2->count() > 0;
  have_seed = o3->count() > 0;

  try {
    RunConfig config = parse_config_file(config_path);
    if (have_out) config.out_dir = out_dir;
    if (have_threads) config.threads = threads;
    if (have_seed) config.seed = seed;
    run_experiment(config);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sbm::cli
