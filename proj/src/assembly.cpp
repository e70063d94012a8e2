#include "sbm/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace sbm {

void PdeSpec::validate() const {
  if (!(penalty > 0)) throw std::invalid_argument("PdeSpec: penalty must be positive");
  if (kind == PdeKind::Elasticity) {
    if (!(youngs_modulus > 0)) throw std::invalid_argument("PdeSpec: E must be positive");
    if (poisson_ratio < 0 || poisson_ratio >= 0.5)
      throw std::invalid_argument("PdeSpec: nu must satisfy 0 <= nu < 0.5");
  }
  if (!forcing) throw std::invalid_argument("PdeSpec: forcing field missing");
  if (!dirichlet) throw std::invalid_argument("PdeSpec: dirichlet field missing");
}

void CsrMatrix::matvec(const double* x, double* y) const {
  const std::int64_t rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < rows; ++r) {
    double s = 0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

void build_dof_map(const Mesh& mesh, const MarkerField& markers, int ncomp,
                   std::vector<std::int64_t>& node_dof, std::vector<std::uint32_t>& dof_node) {
  std::vector<std::uint8_t> active_node(mesh.n_nodes(), 0);
  const int npe = mesh.nodes_per_element();
  for (std::uint32_t e = 0; e < mesh.n_elements(); ++e) {
    if (!markers.active(e)) continue;
    const std::uint32_t* nodes = mesh.element_nodes(e);
    for (int l = 0; l < npe; ++l) active_node[nodes[l]] = 1;
  }
  node_dof.assign(mesh.n_nodes(), -1);
  dof_node.clear();
  std::int64_t next = 0;
  for (std::uint32_t v = 0; v < mesh.n_nodes(); ++v) {
    if (!active_node[v]) continue;
    node_dof[v] = next;
    for (int c = 0; c < ncomp; ++c) dof_node.push_back(v);
    next += ncomp;
  }
}

namespace {

struct Triplet {
  std::uint32_t r, c;
  double v;
};

// Deterministic COO -> CSR merge: duplicates are summed in their original
// insertion order, so the result is independent of thread count and
// bit-identical to a serial pass.
CsrMatrix coo_to_csr(std::size_t n, std::vector<Triplet>& trip) {
  std::stable_sort(trip.begin(), trip.end(), [](const Triplet& a, const Triplet& b) {
    return a.r < b.r || (a.r == b.r && a.c < b.c);
  });
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < trip.size();) {
    std::size_t j = i;
    double s = 0;
    while (j < trip.size() && trip[j].r == trip[i].r && trip[j].c == trip[i].c) s += trip[j++].v;
    m.col.push_back(trip[i].c);
    m.val.push_back(s);
    m.row_ptr[trip[i].r + 1] += 1;
    i = j;
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

struct FaceBasis {
  ShapeEval shape;       // at the face quadrature point
  Point grad_phys[8];    // physical gradients
  double shifted[8];     // phi + grad . d
  double grad_n[8];      // grad . n
};

FaceBasis face_basis(const Mesh& mesh, const SurrogateFace& f, const SurrogateFacePoint& q) {
  FaceBasis fb;
  const Point ref = mesh.to_reference(f.owner, q.x);
  fb.shape = shape_eval(ref, mesh.dim());
  const double scale = 2.0 / mesh.h();
  for (int l = 0; l < fb.shape.n_nodes; ++l) {
    fb.grad_phys[l] = scale * fb.shape.gradient[l];
    fb.shifted[l] = shift_scalar(fb.shape.value[l], fb.grad_phys[l], q.d);
    fb.grad_n[l] = dot(fb.grad_phys[l], f.normal);
  }
  return fb;
}

}  // namespace

SparseSystem assemble_poisson(const Mesh& mesh, const MarkerField& markers,
                              const SurrogateBoundary& boundary, const PdeSpec& spec,
                              const AssemblyOptions& options) {
  spec.validate();
  if (spec.kind != PdeKind::Poisson)
    throw std::invalid_argument("assemble_poisson: spec.kind must be Poisson");

  SparseSystem sys;
  sys.ncomp = 1;
  build_dof_map(mesh, markers, 1, sys.node_dof, sys.dof_node);
  const std::size_t n_dofs = sys.dof_node.size();
  sys.b.assign(n_dofs, 0.0);

  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const double h = mesh.h();
  const double vol_jac = std::pow(0.5 * h, dim);
  const QuadratureRule vol_rule = gauss_rule(2, dim);

  const std::vector<std::uint32_t>& active = boundary.active_ids;
  const std::size_t per_elem = std::size_t(npe) * npe;
  std::vector<Triplet> trip(active.size() * per_elem + boundary.faces.size() * per_elem);
  std::vector<double> rhs_local(active.size() * npe + boundary.faces.size() * npe, 0.0);

  // Volume terms over the active elements (FalseIntercepted and Exterior
  // elements are skipped by construction of active_ids).
  const std::int64_t n_active = static_cast<std::int64_t>(active.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t ai = 0; ai < n_active; ++ai) {
    const std::uint32_t e = active[ai];
    const std::uint32_t* nodes = mesh.element_nodes(e);
    double ke[8][8] = {};
    double fe[8] = {};
    for (std::size_t q = 0; q < vol_rule.size(); ++q) {
      const ShapeEval se = shape_eval(vol_rule.points[q], dim);
      const double w = vol_rule.weights[q] * vol_jac;
      Point grad[8];
      for (int l = 0; l < npe; ++l) grad[l] = (2.0 / h) * se.gradient[l];
      if (options.volume)
        for (int i = 0; i < npe; ++i)
          for (int j = 0; j < npe; ++j) ke[i][j] += w * dot(grad[i], grad[j]);
      const double fval = spec.forcing(mesh.from_reference(e, vol_rule.points[q]), 0);
      for (int i = 0; i < npe; ++i) fe[i] += w * fval * se.value[i];
    }
    Triplet* out = trip.data() + std::size_t(ai) * per_elem;
    for (int i = 0; i < npe; ++i)
      for (int j = 0; j < npe; ++j)
        out[i * npe + j] = {static_cast<std::uint32_t>(sys.node_dof[nodes[i]]),
                            static_cast<std::uint32_t>(sys.node_dof[nodes[j]]), ke[i][j]};
    double* rl = rhs_local.data() + std::size_t(ai) * npe;
    for (int i = 0; i < npe; ++i) rl[i] = fe[i];
  }

  // Surrogate-face terms: consistency, adjoint consistency, penalty, and the
  // Dirichlet data contributions, with u_D evaluated at the mapped point
  // x + d on the true boundary.
  const double alpha_h = spec.penalty / h;
  const std::size_t face_trip_base = active.size() * per_elem;
  const std::size_t face_rhs_base = active.size() * npe;
  const std::int64_t n_faces = static_cast<std::int64_t>(boundary.faces.size());
  for (const SurrogateFace& f : boundary.faces)
    if (!markers.active(f.owner))
      throw InternalError("assemble_poisson: face references inactive owner");
#pragma omp parallel for schedule(static)
  for (std::int64_t fi = 0; fi < n_faces; ++fi) {
    const SurrogateFace& f = boundary.faces[fi];
    const std::uint32_t* nodes = mesh.element_nodes(f.owner);
    double ke[8][8] = {};
    double fe[8] = {};
    for (const SurrogateFacePoint& q : f.qp) {
      const FaceBasis fb = face_basis(mesh, f, q);
      const double ud = spec.dirichlet(q.x + q.d, 0);
      for (int i = 0; i < npe; ++i) {
        for (int j = 0; j < npe; ++j) {
          double a = 0;
          if (options.consistency) a -= fb.grad_n[j] * fb.shape.value[i];
          if (options.adjoint) a -= fb.shifted[j] * fb.grad_n[i];
          if (options.penalty) a += alpha_h * fb.shifted[j] * fb.shifted[i];
          ke[i][j] += q.w * a;
        }
        double r = 0;
        if (options.adjoint) r -= ud * fb.grad_n[i];
        if (options.penalty) r += alpha_h * ud * fb.shifted[i];
        fe[i] += q.w * r;
      }
    }
    Triplet* out = trip.data() + face_trip_base + std::size_t(fi) * per_elem;
    for (int i = 0; i < npe; ++i)
      for (int j = 0; j < npe; ++j)
        out[i * npe + j] = {static_cast<std::uint32_t>(sys.node_dof[nodes[i]]),
                            static_cast<std::uint32_t>(sys.node_dof[nodes[j]]), ke[i][j]};
    double* rl = rhs_local.data() + face_rhs_base + std::size_t(fi) * npe;
    for (int i = 0; i < npe; ++i) rl[i] = fe[i];
  }

  sys.A = coo_to_csr(n_dofs, trip);

  // Right-hand side accumulated serially in slot order (deterministic).
  for (std::size_t ai = 0; ai < active.size(); ++ai) {
    const std::uint32_t* nodes = mesh.element_nodes(active[ai]);
    for (int i = 0; i < npe; ++i) sys.b[sys.node_dof[nodes[i]]] += rhs_local[ai * npe + i];
  }
  for (std::size_t fi = 0; fi < boundary.faces.size(); ++fi) {
    const std::uint32_t* nodes = mesh.element_nodes(boundary.faces[fi].owner);
    for (int i = 0; i < npe; ++i)
      sys.b[sys.node_dof[nodes[i]]] += rhs_local[face_rhs_base + fi * npe + i];
  }
  return sys;
}

namespace {

// Voigt strain rows of the dof (node l, component c) basis function.
inline void basis_strain(const Point& grad, int c, double out[3]) {
  if (c == 0) {
    out[0] = grad[0];
    out[1] = 0;
    out[2] = grad[1];
  } else {
    out[0] = 0;
    out[1] = grad[1];
    out[2] = grad[0];
  }
}

}  // namespace

SparseSystem assemble_elasticity(const Mesh& mesh, const MarkerField& markers,
                                 const SurrogateBoundary& boundary, const PdeSpec& spec,
                                 const AssemblyOptions& options) {
  spec.validate();
  if (spec.kind != PdeKind::Elasticity)
    throw std::invalid_argument("assemble_elasticity: spec.kind must be Elasticity");
  if (mesh.dim() != 2)
    throw std::invalid_argument("assemble_elasticity: only plane stress (2D) is supported");

  const ElasticTensor C = ElasticTensor::plane_stress(spec.youngs_modulus, spec.poisson_ratio);
  SparseSystem sys;
  sys.ncomp = 2;
  build_dof_map(mesh, markers, 2, sys.node_dof, sys.dof_node);
  const std::size_t n_dofs = sys.dof_node.size();
  sys.b.assign(n_dofs, 0.0);

  const int dim = 2;
  const int npe = mesh.nodes_per_element();
  const int ndof = npe * 2;
  const double h = mesh.h();
  const double vol_jac = 0.25 * h * h;
  const QuadratureRule vol_rule = gauss_rule(2, dim);

  auto apply_C = [&C](const double e[3], double s[3]) {
    for (int r = 0; r < 3; ++r) s[r] = C.c[r][0] * e[0] + C.c[r][1] * e[1] + C.c[r][2] * e[2];
  };

  const std::vector<std::uint32_t>& active = boundary.active_ids;
  const std::size_t per_elem = std::size_t(ndof) * ndof;
  std::vector<Triplet> trip(active.size() * per_elem + boundary.faces.size() * per_elem);
  std::vector<double> rhs_local(active.size() * ndof + boundary.faces.size() * ndof, 0.0);

  const std::int64_t n_active = static_cast<std::int64_t>(active.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t ai = 0; ai < n_active; ++ai) {
    const std::uint32_t e = active[ai];
    const std::uint32_t* nodes = mesh.element_nodes(e);
    double ke[8][8] = {};
    double fe[8] = {};
    for (std::size_t q = 0; q < vol_rule.size(); ++q) {
      const ShapeEval se = shape_eval(vol_rule.points[q], dim);
      const double w = vol_rule.weights[q] * vol_jac;
      Point grad[4];
      for (int l = 0; l < npe; ++l) grad[l] = (2.0 / h) * se.gradient[l];
      if (options.volume) {
        double strain[8][3], stress[8][3];
        for (int i = 0; i < ndof; ++i) {
          basis_strain(grad[i / 2], i % 2, strain[i]);
          apply_C(strain[i], stress[i]);
        }
        for (int i = 0; i < ndof; ++i)
          for (int j = 0; j < ndof; ++j)
            ke[i][j] += w * (stress[j][0] * strain[i][0] + stress[j][1] * strain[i][1] +
                             stress[j][2] * strain[i][2]);
      }
      const Point x = mesh.from_reference(e, vol_rule.points[q]);
      const double bx = spec.forcing(x, 0);
      const double by = spec.forcing(x, 1);
      for (int l = 0; l < npe; ++l) {
        fe[2 * l + 0] += w * bx * se.value[l];
        fe[2 * l + 1] += w * by * se.value[l];
      }
    }
    Triplet* out = trip.data() + std::size_t(ai) * per_elem;
    for (int i = 0; i < ndof; ++i)
      for (int j = 0; j < ndof; ++j)
        out[i * ndof + j] = {
            static_cast<std::uint32_t>(sys.node_dof[nodes[i / 2]] + i % 2),
            static_cast<std::uint32_t>(sys.node_dof[nodes[j / 2]] + j % 2), ke[i][j]};
    double* rl = rhs_local.data() + std::size_t(ai) * ndof;
    for (int i = 0; i < ndof; ++i) rl[i] = fe[i];
  }

  const double gamma_h = spec.penalty / h;
  const std::size_t face_trip_base = active.size() * per_elem;
  const std::size_t face_rhs_base = active.size() * ndof;
  const std::int64_t n_faces = static_cast<std::int64_t>(boundary.faces.size());
  for (const SurrogateFace& f : boundary.faces)
    if (!markers.active(f.owner))
      throw InternalError("assemble_elasticity: face references inactive owner");
#pragma omp parallel for schedule(static)
  for (std::int64_t fi = 0; fi < n_faces; ++fi) {
    const SurrogateFace& f = boundary.faces[fi];
    const std::uint32_t* nodes = mesh.element_nodes(f.owner);
    double ke[8][8] = {};
    double fe[8] = {};
    for (const SurrogateFacePoint& q : f.qp) {
      const FaceBasis fb = face_basis(mesh, f, q);
      // Traction of each dof basis function and its vector shift.
      double traction[8][2];
      double shifted[8];  // scalar factor of the shifted vector basis
      for (int i = 0; i < ndof; ++i) {
        double strain[3], stress[3];
        basis_strain(fb.grad_phys[i / 2], i % 2, strain);
        apply_C(strain, stress);
        traction[i][0] = stress[0] * f.normal[0] + stress[2] * f.normal[1];
        traction[i][1] = stress[2] * f.normal[0] + stress[1] * f.normal[1];
        shifted[i] = fb.shifted[i / 2];
      }
      const Point xg = q.x + q.d;
      const double ud[2] = {spec.dirichlet(xg, 0), spec.dirichlet(xg, 1)};
      for (int i = 0; i < ndof; ++i) {
        const int ci = i % 2;
        for (int j = 0; j < ndof; ++j) {
          const int cj = j % 2;
          double a = 0;
          if (options.consistency) a -= traction[j][ci] * fb.shape.value[i / 2];
          if (options.adjoint) a += shifted[j] * traction[i][cj];
          if (options.penalty && ci == cj) a += gamma_h * shifted[j] * shifted[i];
          ke[i][j] += q.w * a;
        }
        double r = 0;
        if (options.adjoint) r += ud[0] * traction[i][0] + ud[1] * traction[i][1];
        if (options.penalty) r += gamma_h * ud[ci] * shifted[i];
        fe[i] += q.w * r;
      }
    }
    Triplet* out = trip.data() + face_trip_base + std::size_t(fi) * per_elem;
    for (int i = 0; i < ndof; ++i)
      for (int j = 0; j < ndof; ++j)
        out[i * ndof + j] = {
            static_cast<std::uint32_t>(sys.node_dof[nodes[i / 2]] + i % 2),
            static_cast<std::uint32_t>(sys.node_dof[nodes[j / 2]] + j % 2), ke[i][j]};
    double* rl = rhs_local.data() + face_rhs_base + std::size_t(fi) * ndof;
    for (int i = 0; i < ndof; ++i) rl[i] = fe[i];
  }

  sys.A = coo_to_csr(n_dofs, trip);

  for (std::size_t ai = 0; ai < active.size(); ++ai) {
    const std::uint32_t* nodes = mesh.element_nodes(active[ai]);
    for (int i = 0; i < ndof; ++i)
      sys.b[sys.node_dof[nodes[i / 2]] + i % 2] += rhs_local[ai * ndof + i];
  }
  for (std::size_t fi = 0; fi < boundary.faces.size(); ++fi) {
    const std::uint32_t* nodes = mesh.element_nodes(boundary.faces[fi].owner);
    for (int i = 0; i < ndof; ++i)
      sys.b[sys.node_dof[nodes[i / 2]] + i % 2] += rhs_local[face_rhs_base + fi * ndof + i];
  }
  return sys;
}

}  // namespace sbm
