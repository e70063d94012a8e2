#include "sbm/reference.hpp"

#include <cmath>
#include <map>

namespace sbm::ref {

MarkerField generate_markers(const Mesh& mesh, const Geometry& geometry, double lambda,
                             const SurrogateOptions& options) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("generate_markers: lambda must be in [0,1]");
  MarkerField mf;
  mf.lambda = lambda;
  mf.node_interior.assign(mesh.n_nodes(), 0);
  mf.node_false_intercepted.assign(mesh.n_nodes(), 0);
  mf.base.assign(mesh.n_elements(), Marker::Exterior);
  mf.neighbors_fi.assign(mesh.n_elements(), 0);

  for (std::uint32_t v = 0; v < mesh.n_nodes(); ++v)
    mf.node_interior[v] = geometry.inside(mesh.node_coord(v)) ? 1 : 0;

  const QuadratureRule rule = gauss_rule(options.volume_fraction_points, mesh.dim());
  const int npe = mesh.nodes_per_element();
  for (std::uint32_t e = 0; e < mesh.n_elements(); ++e) {
    const std::uint32_t* nodes = mesh.element_nodes(e);
    int count = 0;
    for (int l = 0; l < npe; ++l) count += mf.node_interior[nodes[l]];
    if (count == npe) {
      mf.base[e] = Marker::Interior;
    } else if (count == 0) {
      mf.base[e] = Marker::Exterior;
    } else {
      mf.base[e] = Marker::Intercepted;
      int inside_count = 0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        if (geometry.inside(mesh.from_reference(e, rule.points[q]))) ++inside_count;
      const double lambda_c = double(inside_count) / double(rule.size());
      if (1.0 - lambda_c > lambda) mf.base[e] = Marker::FalseIntercepted;
    }
  }
  return mf;
}

SparseSystem assemble_poisson(const Mesh& mesh, const MarkerField& markers,
                              const SurrogateBoundary& boundary, const PdeSpec& spec) {
  spec.validate();
  SparseSystem sys;
  sys.ncomp = 1;
  build_dof_map(mesh, markers, 1, sys.node_dof, sys.dof_node);
  sys.b.assign(sys.dof_node.size(), 0.0);

  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const double h = mesh.h();
  const QuadratureRule rule = gauss_rule(2, dim);
  const double jac = std::pow(0.5 * h, dim);

  // Local matrices accumulate over quadrature first (as in the parallel
  // path), then insert into an ordered map in element order, so the summed
  // values match the stable COO merge bit for bit.
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> entries;

  for (std::uint32_t e : boundary.active_ids) {
    const std::uint32_t* nodes = mesh.element_nodes(e);
    double ke[8][8] = {};
    double fe[8] = {};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeEval se = shape_eval(rule.points[q], dim);
      const double w = rule.weights[q] * jac;
      Point grad[8];
      for (int l = 0; l < npe; ++l) grad[l] = (2.0 / h) * se.gradient[l];
      for (int i = 0; i < npe; ++i)
        for (int j = 0; j < npe; ++j) ke[i][j] += w * dot(grad[i], grad[j]);
      const double f = spec.forcing(mesh.from_reference(e, rule.points[q]), 0);
      for (int i = 0; i < npe; ++i) fe[i] += w * f * se.value[i];
    }
    for (int i = 0; i < npe; ++i) {
      for (int j = 0; j < npe; ++j)
        entries[{std::uint32_t(sys.node_dof[nodes[i]]),
                 std::uint32_t(sys.node_dof[nodes[j]])}] += ke[i][j];
      sys.b[sys.node_dof[nodes[i]]] += fe[i];
    }
  }

  const double alpha_h = spec.penalty / h;
  for (const SurrogateFace& f : boundary.faces) {
    if (!markers.active(f.owner))
      throw InternalError("assemble_poisson: face references inactive owner");
    const std::uint32_t* nodes = mesh.element_nodes(f.owner);
    double ke[8][8] = {};
    double fe[8] = {};
    for (const SurrogateFacePoint& q : f.qp) {
      const ShapeEval se = shape_eval(mesh.to_reference(f.owner, q.x), dim);
      Point grad[8];
      double shifted[8], grad_n[8];
      for (int l = 0; l < npe; ++l) {
        grad[l] = (2.0 / h) * se.gradient[l];
        shifted[l] = se.value[l] + dot(grad[l], q.d);
        grad_n[l] = dot(grad[l], f.normal);
      }
      const double ud = spec.dirichlet(q.x + q.d, 0);
      for (int i = 0; i < npe; ++i) {
        for (int j = 0; j < npe; ++j)
          ke[i][j] += q.w * (-grad_n[j] * se.value[i] - shifted[j] * grad_n[i] +
                             alpha_h * shifted[j] * shifted[i]);
        fe[i] += q.w * (-ud * grad_n[i] + alpha_h * ud * shifted[i]);
      }
    }
    for (int i = 0; i < npe; ++i) {
      for (int j = 0; j < npe; ++j)
        entries[{std::uint32_t(sys.node_dof[nodes[i]]),
                 std::uint32_t(sys.node_dof[nodes[j]])}] += ke[i][j];
      sys.b[sys.node_dof[nodes[i]]] += fe[i];
    }
  }

  sys.A.n = sys.dof_node.size();
  sys.A.row_ptr.assign(sys.A.n + 1, 0);
  for (const auto& [rc, v] : entries) {
    sys.A.col.push_back(rc.second);
    sys.A.val.push_back(v);
    sys.A.row_ptr[rc.first + 1] += 1;
  }
  for (std::size_t r = 0; r < sys.A.n; ++r) sys.A.row_ptr[r + 1] += sys.A.row_ptr[r];
  return sys;
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

  const std::uint64_t n = mesh.cells_per_axis();
  const std::uint64_t nz = dim == 3 ? n : 1;
  const Point lo = mesh.bbox().lo;

  double e2[2] = {0, 0};
  double vol = 0;
  for (std::uint64_t k = 0; k < nz; ++k)
    for (std::uint64_t j = 0; j < n; ++j)
      for (std::uint64_t i = 0; i < n; ++i) {
        Point a{lo[0] + h * i, lo[1] + h * j, dim == 3 ? lo[2] + h * k : 0.0};
        for (std::size_t q = 0; q < rule.size(); ++q) {
          Point x = a;
          for (int ax = 0; ax < dim; ++ax) x[ax] += 0.5 * h * (rule.points[q][ax] + 1.0);
          if (!geometry.inside(x)) continue;
          const double w = rule.weights[q] * jac;
          EvalResult ev;
          const auto elem = mesh.locate(x);
          if (elem && field.markers->active(*elem)) {
            ev = evaluate(field, x);
          } else {
            // Taylor extension from the nearest surrogate point, same rule
            // as the parallel path but without the carved-region cap.
            double best = std::numeric_limits<double>::max();
            Point bp{};
            std::uint32_t owner = 0;
            for (const SurrogateFace& face : field.boundary->faces) {
              const Point anchor = mesh.element_anchor(face.owner);
              Point qq{0, 0, 0};
              for (int ax = 0; ax < dim; ++ax) {
                if (ax == face.axis)
                  qq[ax] = anchor[ax] + (face.side > 0 ? h : 0.0);
                else
                  qq[ax] = std::clamp(x[ax], anchor[ax], anchor[ax] + h);
              }
              const double d2 = norm2(qq - x);
              if (d2 < best) {
                best = d2;
                bp = qq;
                owner = face.owner;
              }
            }
            const ShapeEval se = shape_eval(mesh.to_reference(owner, bp), dim);
            const std::uint32_t* nodes = mesh.element_nodes(owner);
            for (int c = 0; c < ncomp; ++c) {
              double v = 0;
              Point g{0, 0, 0};
              for (int l = 0; l < se.n_nodes; ++l) {
                const double nv = field.values[field.node_dof[nodes[l]] + c];
                v += nv * se.value[l];
                g = g + (nv * 2.0 / h) * se.gradient[l];
              }
              ev.value[c] = v + dot(g, x - bp);
            }
          }
          for (int c = 0; c < ncomp; ++c) {
            const double diff = ev.value[c] - exact(x, c);
            e2[c] += w * diff * diff;
          }
          vol += w;
        }
      }

  ErrorReport rep;
  rep.level = mesh.level();
  rep.h = h;
  rep.lambda = field.boundary->lambda;
  rep.ncomp = ncomp;
  rep.sqrt_measure = std::sqrt(vol);
  for (int c = 0; c < ncomp; ++c) {
    rep.l2[c] = std::sqrt(e2[c]);
    rep.l2n[c] = rep.l2[c] / rep.sqrt_measure;
  }
  return rep;
}

}  // namespace sbm::ref
