// Compares the OpenMP kernels against the serial reference implementations
// on a mid-size problem and prints wall times.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sbm/reference.hpp"
#include "sbm/solve.hpp"

using namespace sbm;

namespace {

template <typename F>
double time_s(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double t_ref, double t_par) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, 1e3 * t_ref, 1e3 * t_par,
              t_ref / t_par);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; both columns run serial code paths\n");
#endif
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial ref", "parallel", "speedup");

  // 2D disk pipeline.
  Circle disk({0.5, 0.5, 0}, 0.5);
  const BoundingBox bbox = pad_and_squarify(disk.bounds(), 0.05);
  const Mesh mesh = build_grid(bbox, 8, &disk, true);

  MarkerField markers_par, markers_ref;
  report("generate_markers (disk L8)",
         time_s([&] { markers_ref = ref::generate_markers(mesh, disk, 0.5); }),
         time_s([&] { markers_par = generate_markers(mesh, disk, 0.5); }));

  mark_neighbors_of_false_intercepted(mesh, markers_par);
  SurrogateBoundary boundary = extract_boundary(mesh, markers_par, disk);

  PdeSpec spec;
  spec.kind = PdeKind::Poisson;
  spec.penalty = 400.0;
  spec.forcing = [](const Point&, int) { return 1.0; };
  spec.dirichlet = [](const Point&, int) { return 0.01; };

  SparseSystem sys_ref, sys_par;
  report("assemble_poisson (disk L8)",
         time_s([&] { sys_ref = ref::assemble_poisson(mesh, markers_par, boundary, spec); }),
         time_s([&] { sys_par = assemble_poisson(mesh, markers_par, boundary, spec); }));

  std::vector<double> x = solve(sys_par, 1e-10);
  const SolutionField field = make_solution(mesh, markers_par, boundary, sys_par, std::move(x));
  auto exact = [](const Point& p, int) {
    const double r2 = (p[0] - 0.5) * (p[0] - 0.5) + (p[1] - 0.5) * (p[1] - 0.5);
    return 0.25 * (0.25 - r2) + 0.01;
  };
  ErrorReport rep_ref, rep_par;
  report("l2_error (disk L8)",
         time_s([&] { rep_ref = ref::l2_error(field, exact, disk); }),
         time_s([&] { rep_par = l2_error(field, exact, disk); }));

  // 3D distance queries on an icosphere.
  TriangleSoup soup;
  soup.triangles = make_icosphere({0, 0, 0}, 1.0, 2);
  soup.bounds = BoundingBox{{-1, -1, -1}, {1, 1, 1}, 3};
  TriangleSoupGeometry sphere(std::move(soup), 32);

  std::vector<Point> queries;
  std::uint64_t state = 12345;
  auto rnd = [&state]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return 2.6 * double(state >> 11) / double(1ull << 53) - 1.3;
  };
  for (int i = 0; i < 20000; ++i) queries.push_back({rnd(), rnd(), rnd()});

  std::vector<double> dist_ref(queries.size()), dist_par(queries.size());
  const double t_brute = time_s([&] {
    for (std::size_t i = 0; i < queries.size(); ++i)
      dist_ref[i] = brute_force_distance(sphere.soup(), queries[i]).distance();
  });
  const double t_kd = time_s([&] {
    const std::int64_t n = static_cast<std::int64_t>(queries.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      dist_par[i] =
          nearest_triangle_distance(sphere.soup(), sphere.kdtree(), queries[i], 32).distance();
  });
  report("distance x20k (icosphere)", t_brute, t_kd);

  double max_diff = 0;
  for (std::size_t i = 0; i < queries.size(); ++i)
    max_diff = std::max(max_diff, std::abs(dist_ref[i] - dist_par[i]));
  std::printf("\nchecks: distance max |ref-par| = %.3e, L2N ref/par diff = %.3e\n", max_diff,
              std::abs(rep_ref.l2n[0] - rep_par.l2n[0]));
  return 0;
}
