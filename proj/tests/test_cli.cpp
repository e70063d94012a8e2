#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "experiments.hpp"
#include "sbm/surrogate.hpp"
#include "sbm/vtk.hpp"
#include "support/fixtures.hpp"

using namespace sbm;
using namespace sbm::cli;

namespace {

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = test::scratch_dir() + "/" + name;
  std::ofstream f(path);
  f << body;
  return path;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("rms-gap sweep finds the optimal threshold at one half") {
  RunConfig c;
  c.experiment = "rms-gap";
  c.geometry = "rotated-square";
  c.rotated_square_half_side = 0.5;
  c.rotated_square_angle_deg = 15.0;
  c.level_min = c.level_max = 5;
  c.lambdas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  c.out_dir = test::scratch_dir() + "/rms";
  const RunOutputs out = run_experiment(c);
  REQUIRE(out.rows.size() == 11);
  double best_lambda = -1, best = 1e300;
  for (const ResultRow& r : out.rows) {
    CHECK(r.metric == "rms_gap");
    if (r.value < best) {
      best = r.value;
      best_lambda = r.lambda;
    }
  }
  CHECK(best_lambda == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("convergence experiment emits error, improvement, and slope rows") {
  RunConfig c;
  c.experiment = "convergence";
  c.geometry = "circle";
  c.circle_center = {0.5, 0.5, 0};
  c.circle_radius = 0.5;
  c.level_min = 3;
  c.level_max = 5;
  c.lambdas = {0.5, 1.0};
  c.out_dir = test::scratch_dir() + "/conv";
  const RunOutputs out = run_experiment(c);

  std::map<std::string, int> metric_counts;
  for (const ResultRow& r : out.rows) metric_counts[r.metric] += 1;
  CHECK(metric_counts["L2N"] == 6);
  CHECK(metric_counts["I2lambda"] == 6);
  CHECK(metric_counts["slope"] == 2);

  for (const ResultRow& r : out.rows)
    if (r.metric == "I2lambda" && r.lambda == 1.0)
      CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));

  // Stage timings cover every stage for every (level, lambda) run.
  std::map<std::string, int> stage_counts;
  for (const TimingRow& t : out.timings) stage_counts[t.stage] += 1;
  CHECK(stage_counts["grid_build"] == 6);
  CHECK(stage_counts["surrogate_identify"] == 6);
  CHECK(stage_counts["assemble"] == 6);
  CHECK(stage_counts["solve"] == 6);
  CHECK(stage_counts["error"] == 6);
  CHECK(stage_counts["total"] == 1);
}

TEST_CASE("results.csv carries the golden header and round-trips") {
  RunConfig c;
  c.experiment = "lambda-sweep";
  c.geometry = "circle";
  c.level_min = c.level_max = 4;
  c.lambdas = {0.0, 0.5, 1.0};
  c.out_dir = test::scratch_dir() + "/sweep_a";
  run_experiment(c);

  const auto csv_a = read_csv(c.out_dir + "/results.csv");
  REQUIRE_FALSE(csv_a.empty());
  std::string header;
  for (std::size_t i = 0; i < csv_a[0].size(); ++i)
    header += (i ? "," : "") + csv_a[0][i];
  // Golden schema: changing it breaks downstream consumers.
  CHECK(header == "experiment,geometry,level,h,lambda,metric,value,walltime_seconds");

  // Re-running from the dumped effective config reproduces every row except
  // the wall-time column.
  RunConfig again = parse_config_file(c.out_dir + "/config.effective.txt");
  again.out_dir = test::scratch_dir() + "/sweep_b";
  run_experiment(again);
  const auto csv_b = read_csv(again.out_dir + "/results.csv");
  REQUIRE(csv_a.size() == csv_b.size());
  for (std::size_t r = 0; r < csv_a.size(); ++r) {
    REQUIRE(csv_a[r].size() == csv_b[r].size());
    for (std::size_t col = 0; col + 1 < csv_a[r].size(); ++col)
      CHECK(csv_a[r][col] == csv_b[r][col]);
  }
}

TEST_CASE("marker dump histogram matches the in-memory classification") {
  RunConfig c;
  c.experiment = "solve";
  c.geometry = "circle";
  c.level_min = c.level_max = 4;
  c.lambdas = {0.5};
  c.output_markers_csv = true;
  c.out_dir = test::scratch_dir() + "/markers";
  run_experiment(c);

  const auto csv = read_csv(c.out_dir + "/markers_L4_lam0p5.csv");
  REQUIRE(csv.size() > 1);
  std::map<std::string, std::size_t> histogram;
  for (std::size_t r = 1; r < csv.size(); ++r) histogram[csv[r][1]] += 1;

  const Circle circle({0.5, 0.5, 0}, 0.5);
  const BoundingBox bbox = pad_and_squarify(circle.bounds(), 0.05);
  const Mesh mesh = build_grid(bbox, 4, &circle, true);
  const SurrogateResult sur = identify_surrogate(mesh, circle, 0.5);
  for (const Marker m : {Marker::Interior, Marker::Exterior, Marker::Intercepted,
                         Marker::FalseIntercepted, Marker::NeighborsFalseIntercepted})
    CHECK(histogram[marker_name(m)] == sur.markers.count(m));
}

TEST_CASE("VTK dumps are structurally consistent") {
  RunConfig c;
  c.experiment = "solve";
  c.geometry = "circle";
  c.level_min = c.level_max = 3;
  c.lambdas = {0.5};
  c.output_vtk = true;
  c.out_dir = test::scratch_dir() + "/vtk";
  run_experiment(c);

  std::ifstream f(c.out_dir + "/field_L3_lam0p5.vtk");
  REQUIRE(f.good());
  std::string tok;
  std::size_t n_points = 0, n_cells = 0, cell_ints = 0;
  while (f >> tok) {
    if (tok == "POINTS") {
      f >> n_points;
      f >> tok;  // type
      for (std::size_t i = 0; i < 3 * n_points; ++i) {
        double v;
        REQUIRE((f >> v));
      }
    } else if (tok == "CELLS") {
      f >> n_cells >> cell_ints;
      REQUIRE(cell_ints == n_cells * 5);
      for (std::size_t i = 0; i < cell_ints; ++i) {
        long v;
        REQUIRE((f >> v));
        if (i % 5 == 0) REQUIRE(v == 4);
      }
    } else if (tok == "CELL_TYPES") {
      std::size_t n;
      f >> n;
      REQUIRE(n == n_cells);
    } else if (tok == "POINT_DATA") {
      std::size_t n;
      f >> n;
      REQUIRE(n == n_points);
    }
  }
  CHECK(n_points > 0);
  CHECK(n_cells > 0);
}

TEST_CASE("unwritable dump paths raise IO errors") {
  const Circle circle({0.5, 0.5, 0}, 0.5);
  const BoundingBox bbox = pad_and_squarify(circle.bounds(), 0.05);
  const Mesh mesh = build_grid(bbox, 3, &circle, true);
  const SurrogateResult sur = identify_surrogate(mesh, circle, 0.5);
  CHECK_THROWS_AS(export_markers_csv(mesh, sur.markers, "/nonexistent_dir/markers.csv"),
                  IoError);
  CHECK_THROWS_AS(export_boundary_vtk(mesh, sur.boundary, "/nonexistent_dir/boundary.vtk"),
                  IoError);
}

TEST_CASE("elasticity VTK carries two-component vectors") {
  RunConfig c;
  c.experiment = "solve";
  c.pde = "elasticity";
  c.geometry = "star";
  c.star_center = {0, 0, 0};
  c.star_outer_radius = 1.0;
  c.star_inner_radius = 0.45;
  c.bbox_explicit = true;
  c.bbox_lo = {-1.2, -1.2, 0};
  c.bbox_hi = {1.2, 1.2, 0};
  c.level_min = c.level_max = 4;
  c.lambdas = {0.5};
  c.output_vtk = true;
  c.out_dir = test::scratch_dir() + "/vtk_elas";
  run_experiment(c);
  std::ifstream f(c.out_dir + "/field_L4_lam0p5.vtk");
  REQUIRE(f.good());
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(content.find("VECTORS u double") != std::string::npos);
}

TEST_CASE("solve on a grid-aligned polygon runs the d=0 path end to end") {
  // The square's edges lie on grid lines, so every shift vector vanishes and
  // the run reduces to a body-fitted Nitsche solve (the assembly suite pins
  // that equivalence entry-wise).
  const std::string loop = test::scratch_dir() + "/aligned_square.txt";
  {
    std::ofstream f(loop);
    f << "0.25 0.25\n0.75 0.25\n0.75 0.75\n0.25 0.75\n";
  }
  RunConfig c;
  c.experiment = "solve";
  c.geometry = "polygon";
  c.polygon_path = loop;
  c.solution = "disk";  // the radial field solves -lap u = 1 on any domain
  c.bbox_explicit = true;
  c.bbox_lo = {0, 0, 0};
  c.bbox_hi = {1, 1, 0};
  c.level_min = c.level_max = 5;
  c.lambdas = {0.5};
  c.out_dir = test::scratch_dir() + "/aligned";
  const RunOutputs out = run_experiment(c);
  REQUIRE(out.rows.size() == 1);
  CHECK(out.rows[0].metric == "L2N");
  CHECK(out.rows[0].value < 2e-4);  // second-order accurate at h = 1/32
  CHECK(out.rows[0].value > 0);
}

TEST_CASE("cli entry point and exit codes") {
  SUBCASE("successful run") {
    const std::string config = write_config("ok.cfg",
                                            "experiment = rms-gap\n"
                                            "geometry = rotated-square\n"
                                            "level = 4\n"
                                            "lambda = 0.5\n");
    const std::string out = test::scratch_dir() + "/cli_ok";
    const char* argv[] = {"sbm", "run", config.c_str(), "--out", out.c_str(), "--threads", "2"};
    CHECK(run_cli(7, argv) == 0);
    CHECK(std::filesystem::exists(out + "/results.csv"));
  }
  SUBCASE("config errors exit 2") {
    const std::string config = write_config("bad.cfg", "experiment = warp-drive\n");
    const char* argv[] = {"sbm", "run", config.c_str()};
    CHECK(run_cli(3, argv) == 2);
    const std::string config2 = write_config("bad2.cfg", "unknown_key = 1\n");
    const char* argv2[] = {"sbm", "run", config2.c_str()};
    CHECK(run_cli(3, argv2) == 2);
    const char* argv3[] = {"sbm", "run", "/nonexistent/path.cfg"};
    CHECK(run_cli(3, argv3) == 2);
  }
  SUBCASE("solver failures exit 3") {
    const std::string config = write_config("stuck.cfg",
                                            "experiment = solve\n"
                                            "geometry = circle\n"
                                            "level = 4\n"
                                            "lambda = 0.5\n"
                                            "solver.maxiter = 2\n");
    const std::string out = test::scratch_dir() + "/cli_stuck";
    const char* argv[] = {"sbm", "run", config.c_str(), "--out", out.c_str()};
    CHECK(run_cli(5, argv) == 3);
  }
  SUBCASE("geometry errors exit 4") {
    const std::string config = write_config("nostl.cfg",
                                            "experiment = solve\n"
                                            "geometry = stl\n"
                                            "stl.path = /nonexistent/shape.stl\n"
                                            "solution = bunny\n"
                                            "level = 3\n"
                                            "lambda = 0.5\n");
    const std::string out = test::scratch_dir() + "/cli_nostl";
    const char* argv[] = {"sbm", "run", config.c_str(), "--out", out.c_str()};
    CHECK(run_cli(5, argv) == 4);
  }
}
