#pragma once

#include <functional>

#include "sbm/assembly.hpp"

namespace sbm {

/// Nodal solution over active dofs, together with everything needed to
/// evaluate it anywhere in the true domain.
struct SolutionField {
  const Mesh* mesh = nullptr;
  const MarkerField* markers = nullptr;
  const SurrogateBoundary* boundary = nullptr;
  int ncomp = 1;
  std::vector<std::int64_t> node_dof;
  std::vector<double> values;
};

SolutionField make_solution(const Mesh& mesh, const MarkerField& markers,
                            const SurrogateBoundary& boundary, const SparseSystem& system,
                            std::vector<double> x);

struct EvalResult {
  std::array<double, 2> value{};
  std::array<Point, 2> gradient{};
};

/// Value and gradient at p. Active elements interpolate; elsewhere the field
/// is extended by a first-order Taylor expansion from the nearest surrogate
/// boundary point, using the adjacent active element's polynomial. Points in
/// carved or exterior cells farther than 2h from any surrogate face raise
/// EvaluationError.
EvalResult evaluate(const SolutionField& field, const Point& p);

struct ErrorReport {
  int level = 0;
  double h = 0;
  double lambda = 0;
  int ncomp = 1;
  std::array<double, 2> l2{};   // ||e|| per component
  double sqrt_measure = 0;      // sqrt of the true-domain measure
  std::array<double, 2> l2n{};  // normalized error per component
};

/// L2 error against the exact field, integrated over the true domain: the
/// 5^dim-point rule on every grid cell intersecting the domain, keeping only
/// quadrature points that lie inside. The solution is smoothly extended over
/// cells outside the active domain.
ErrorReport l2_error(const SolutionField& field,
                     const std::function<double(const Point&, int)>& exact,
                     const Geometry& geometry, int points_per_axis = 5);

/// L2N(lambda) / L2N(lambda = 1) for one component.
double improvement_factor(const ErrorReport& report, const ErrorReport& report_lambda1,
                          int comp = 0);

struct ConvergenceTable {
  std::vector<ErrorReport> rows;  // ordered by increasing level
};

/// Least-squares slope of log L2N against log h; needs at least 3 levels.
double fit_slope(const ConvergenceTable& table, int comp = 0);

}  // namespace sbm
