#include "sbm/analyze.hpp"

#include <algorithm>
#include <cmath>

namespace sbm {

SolutionField make_solution(const Mesh& mesh, const MarkerField& markers,
                            const SurrogateBoundary& boundary, const SparseSystem& system,
                            std::vector<double> x) {
  if (x.size() != system.n_dofs())
    throw std::invalid_argument("make_solution: dof length mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw InternalError("make_solution: non-finite solution value");
  SolutionField f;
  f.mesh = &mesh;
  f.markers = &markers;
  f.boundary = &boundary;
  f.ncomp = system.ncomp;
  f.node_dof = system.node_dof;
  f.values = std::move(x);
  return f;
}

namespace {

EvalResult interpolate_in_element(const SolutionField& f, std::uint32_t e, const Point& p) {
  const Mesh& mesh = *f.mesh;
  const ShapeEval se = shape_eval(mesh.to_reference(e, p), mesh.dim());
  const std::uint32_t* nodes = mesh.element_nodes(e);
  const double scale = 2.0 / mesh.h();
  EvalResult out;
  for (int c = 0; c < f.ncomp; ++c) {
    double v = 0;
    Point g{0, 0, 0};
    for (int l = 0; l < se.n_nodes; ++l) {
      const double nv = f.values[f.node_dof[nodes[l]] + c];
      v += nv * se.value[l];
      g = g + (nv * scale) * se.gradient[l];
    }
    out.value[c] = v;
    out.gradient[c] = g;
  }
  return out;
}

/// Closest point on any surrogate face (axis-aligned rectangle clamp);
/// deterministic tie-break on face order.
bool nearest_face_point(const SolutionField& f, const Point& p, Point& best_pt,
                        std::uint32_t& best_owner, double& best_d2) {
  const Mesh& mesh = *f.mesh;
  const double h = mesh.h();
  best_d2 = std::numeric_limits<double>::max();
  for (const SurrogateFace& face : f.boundary->faces) {
    const Point anchor = mesh.element_anchor(face.owner);
    Point q{0, 0, 0};
    for (int a = 0; a < mesh.dim(); ++a) {
      if (a == face.axis)
        q[a] = anchor[a] + (face.side > 0 ? h : 0.0);
      else
        q[a] = std::clamp(p[a], anchor[a], anchor[a] + h);
    }
    const double d2 = norm2(q - p);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_pt = q;
      best_owner = face.owner;
    }
  }
  return best_d2 != std::numeric_limits<double>::max();
}

EvalResult evaluate_impl(const SolutionField& field, const Point& p, bool cap_extension) {
  const Mesh& mesh = *field.mesh;
  std::uint32_t ci, cj, ck;
  mesh.locate_cell(p, ci, cj, ck);
  const std::optional<std::uint32_t> elem = mesh.element_at_cell(ci, cj, ck);
  if (elem && field.markers->active(*elem)) return interpolate_in_element(field, *elem, p);

  const bool false_intercepted =
      elem && field.markers->tag(*elem) == Marker::FalseIntercepted;
  Point anchor_pt;
  std::uint32_t owner = 0;
  double d2 = 0;
  if (!nearest_face_point(field, p, anchor_pt, owner, d2))
    throw EvaluationError("evaluate: no surrogate faces available");
  if (cap_extension && !false_intercepted) {
    const double cap = 2.0 * mesh.h();
    if (d2 > cap * cap)
      throw EvaluationError("evaluate: point in carved region with no surrogate face within 2h");
  }
  const EvalResult at_face = interpolate_in_element(field, owner, anchor_pt);
  EvalResult out = at_face;
  const Point offset = p - anchor_pt;
  for (int c = 0; c < field.ncomp; ++c)
    out.value[c] = at_face.value[c] + dot(at_face.gradient[c], offset);
  return out;
}

}  // namespace

EvalResult evaluate(const SolutionField& field, const Point& p) {
  return evaluate_impl(field, p, true);
}

ErrorReport l2_error(const SolutionField& field,
                     const std::function<double(const Point&, int)>& exact,
                     const Geometry& geometry, int points_per_axis) {
  const Mesh& mesh = *field.mesh;
  const int dim = mesh.dim();
  const double h = mesh.h();
  const QuadratureRule rule = gauss_rule(points_per_axis, dim);
  const double jac = std::pow(0.5 * h, dim);
  const int ncomp = field.ncomp;

  // Integration runs over the full virtual grid so cells carved from the
  // mesh still contribute where they intersect the domain.
  const std::uint64_t n = mesh.cells_per_axis();
  const std::uint64_t nz = dim == 3 ? n : 1;
  const std::int64_t total = static_cast<std::int64_t>(n * n * nz);

  const BoundingBox gb = geometry.bounds();
  const Point lo = mesh.bbox().lo;

  std::vector<double> err_part(static_cast<std::size_t>(total) * ncomp, 0.0);
  std::vector<double> vol_part(total, 0.0);

  ParallelErrorCollector errs;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t cell = 0; cell < total; ++cell) {
    if (errs.failed()) continue;
    try {
      const std::uint64_t i = cell % n;
      const std::uint64_t j = (cell / n) % n;
      const std::uint64_t k = dim == 3 ? cell / (n * n) : 0;
      Point a{lo[0] + h * i, lo[1] + h * j, dim == 3 ? lo[2] + h * k : 0.0};
      bool overlap = true;
      for (int ax = 0; ax < dim; ++ax)
        overlap = overlap && a[ax] <= gb.hi[ax] && a[ax] + h >= gb.lo[ax];
      if (!overlap) continue;
      double e2[2] = {0, 0};
      double vol = 0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Point x = a;
        for (int ax = 0; ax < dim; ++ax) x[ax] += 0.5 * h * (rule.points[q][ax] + 1.0);
        if (!geometry.inside(x)) continue;
        const double w = rule.weights[q] * jac;
        const EvalResult ev = evaluate_impl(field, x, false);
        for (int c = 0; c < ncomp; ++c) {
          const double diff = ev.value[c] - exact(x, c);
          e2[c] += w * diff * diff;
        }
        vol += w;
      }
      for (int c = 0; c < ncomp; ++c) err_part[cell * ncomp + c] = e2[c];
      vol_part[cell] = vol;
    } catch (...) {
      errs.capture();
    }
  }
  errs.rethrow();

  ErrorReport rep;
  rep.level = mesh.level();
  rep.h = h;
  rep.lambda = field.boundary->lambda;
  rep.ncomp = ncomp;
  const double measure = pairwise_sum(vol_part.data(), vol_part.size());
  rep.sqrt_measure = std::sqrt(measure);
  if (ncomp == 1) {
    rep.l2[0] = std::sqrt(pairwise_sum(err_part.data(), err_part.size()));
  } else {
    // Deinterleave per component for a deterministic ordered sum.
    std::vector<double> comp_part(total);
    for (int c = 0; c < ncomp; ++c) {
      for (std::int64_t cell = 0; cell < total; ++cell)
        comp_part[cell] = err_part[cell * ncomp + c];
      rep.l2[c] = std::sqrt(pairwise_sum(comp_part.data(), comp_part.size()));
    }
  }
  for (int c = 0; c < ncomp; ++c) rep.l2n[c] = rep.l2[c] / rep.sqrt_measure;
  return rep;
}

double improvement_factor(const ErrorReport& report, const ErrorReport& report_lambda1,
                          int comp) {
  if (report_lambda1.l2n[comp] == 0.0)
    throw std::domain_error("improvement_factor: zero reference error");
  return report.l2n[comp] / report_lambda1.l2n[comp];
}

double fit_slope(const ConvergenceTable& table, int comp) {
  const std::size_t n = table.rows.size();
  if (n < 3) throw std::invalid_argument("fit_slope: need at least 3 levels");
  for (std::size_t i = 1; i < n; ++i)
    if (table.rows[i].level <= table.rows[i - 1].level)
      throw std::invalid_argument("fit_slope: levels must be strictly increasing");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const ErrorReport& r : table.rows) {
    const double x = std::log(r.h);
    const double y = std::log(r.l2n[comp]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sbm
