#pragma once

#include <functional>
#include <vector>

#include "sbm/surrogate.hpp"

namespace sbm {

enum class PdeKind { Poisson, Elasticity };

/// First-order Taylor shift mapping a surrogate-boundary value to the true
/// boundary: S_h v = v + grad(v) . d.
inline double shift_scalar(double value, const Point& gradient, const Point& d) {
  return value + dot(gradient, d);
}

/// Plane-stress elastic tensor in Voigt form acting on (e_xx, e_yy, g_xy).
struct ElasticTensor {
  double c[3][3] = {};

  static ElasticTensor plane_stress(double youngs_modulus, double poisson_ratio) {
    ElasticTensor t;
    const double k = youngs_modulus / (1.0 - poisson_ratio * poisson_ratio);
    t.c[0][0] = k;
    t.c[0][1] = k * poisson_ratio;
    t.c[1][0] = k * poisson_ratio;
    t.c[1][1] = k;
    t.c[2][2] = k * (1.0 - poisson_ratio) / 2.0;
    return t;
  }
};

/// Problem definition: fields are evaluable anywhere relevant; the Dirichlet
/// datum is evaluated at mapped points on the true boundary.
struct PdeSpec {
  PdeKind kind = PdeKind::Poisson;
  double penalty = 400.0;  // alpha (Poisson) or gamma (elasticity)
  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;
  std::function<double(const Point&, int)> forcing;    // f or body force components
  std::function<double(const Point&, int)> dirichlet;  // u_D components

  int components(int dim) const { return kind == PdeKind::Poisson ? 1 : dim; }
  void validate() const;
};

/// Term-family switches, used by tests to attribute matrix entries.
struct AssemblyOptions {
  bool volume = true;
  bool consistency = true;
  bool adjoint = true;
  bool penalty = true;
};

struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  void matvec(const double* x, double* y) const;
  std::size_t nnz() const { return val.size(); }
};

struct SparseSystem {
  CsrMatrix A;
  std::vector<double> b;
  int ncomp = 1;
  std::vector<std::int64_t> node_dof;   // node -> first dof, -1 when inactive
  std::vector<std::uint32_t> dof_node;  // dof -> node

  std::size_t n_dofs() const { return A.n; }
};

/// Degrees of freedom over nodes of active elements, numbered by ascending
/// node id with components interleaved.
void build_dof_map(const Mesh& mesh, const MarkerField& markers, int ncomp,
                   std::vector<std::int64_t>& node_dof, std::vector<std::uint32_t>& dof_node);

/// Galerkin system for the Poisson problem on the surrogate domain with
/// shifted Dirichlet conditions on the surrogate faces.
SparseSystem assemble_poisson(const Mesh& mesh, const MarkerField& markers,
                              const SurrogateBoundary& boundary, const PdeSpec& spec,
                              const AssemblyOptions& options = {});

/// Plane-stress linear elasticity counterpart (2D only).
SparseSystem assemble_elasticity(const Mesh& mesh, const MarkerField& markers,
                                 const SurrogateBoundary& boundary, const PdeSpec& spec,
                                 const AssemblyOptions& options = {});

}  // namespace sbm
