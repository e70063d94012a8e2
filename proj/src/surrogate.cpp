#include "sbm/surrogate.hpp"

#include <algorithm>
#include <map>

namespace sbm {

const char* marker_name(Marker m) {
  switch (m) {
    case Marker::Interior: return "Interior";
    case Marker::Exterior: return "Exterior";
    case Marker::Intercepted: return "Intercepted";
    case Marker::FalseIntercepted: return "FalseIntercepted";
    case Marker::NeighborsFalseIntercepted: return "NeighborsFalseIntercepted";
  }
  return "?";
}

std::size_t MarkerField::count(Marker m) const {
  std::size_t c = 0;
  for (std::uint32_t e = 0; e < base.size(); ++e)
    if (tag(e) == m) ++c;
  return c;
}

MarkerField generate_markers(const Mesh& mesh, const Geometry& geometry, double lambda,
                             const SurrogateOptions& options) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("generate_markers: lambda must be in [0,1]");
  MarkerField mf;
  mf.lambda = lambda;
  const std::int64_t n_nodes = static_cast<std::int64_t>(mesh.n_nodes());
  const std::int64_t n_elems = static_cast<std::int64_t>(mesh.n_elements());
  mf.node_interior.assign(n_nodes, 0);
  mf.node_false_intercepted.assign(n_nodes, 0);
  mf.base.assign(n_elems, Marker::Exterior);
  mf.neighbors_fi.assign(n_elems, 0);

  ParallelErrorCollector errs;
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < n_nodes; ++v) {
    if (errs.failed()) continue;
    try {
      mf.node_interior[v] =
          geometry.inside(mesh.node_coord(static_cast<std::uint32_t>(v))) ? 1 : 0;
    } catch (...) {
      errs.capture();
    }
  }
  errs.rethrow();

  const QuadratureRule vf_rule = gauss_rule(options.volume_fraction_points, mesh.dim());
  const int npe = mesh.nodes_per_element();

#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t ei = 0; ei < n_elems; ++ei) {
    if (errs.failed()) continue;
    const std::uint32_t e = static_cast<std::uint32_t>(ei);
    const std::uint32_t* nodes = mesh.element_nodes(e);
    int count = 0;
    for (int l = 0; l < npe; ++l) count += mf.node_interior[nodes[l]];
    if (count == npe) {
      mf.base[e] = Marker::Interior;
      continue;
    }
    if (count == 0) {
      mf.base[e] = Marker::Exterior;
      continue;
    }
    mf.base[e] = Marker::Intercepted;
    // Interior volume fraction from the sampling rule; the element leaves
    // the surrogate domain when the exterior fraction exceeds lambda.
    try {
      int inside_count = 0;
      for (std::size_t q = 0; q < vf_rule.size(); ++q)
        if (geometry.inside(mesh.from_reference(e, vf_rule.points[q]))) ++inside_count;
      const double lambda_c = double(inside_count) / double(vf_rule.size());
      if (1.0 - lambda_c > lambda) mf.base[e] = Marker::FalseIntercepted;
    } catch (...) {
      errs.capture();
    }
  }
  errs.rethrow();
  return mf;
}

void mark_neighbors_of_false_intercepted(const Mesh& mesh, MarkerField& markers) {
  const std::int64_t n_elems = static_cast<std::int64_t>(mesh.n_elements());
  const int npe = mesh.nodes_per_element();
  std::fill(markers.node_false_intercepted.begin(), markers.node_false_intercepted.end(), 0);
  // Scatter: nodes of FalseIntercepted elements get flagged. In a
  // distributed setting this is the ghost write/read pair; here both are
  // identity operations.
  for (std::int64_t e = 0; e < n_elems; ++e) {
    if (markers.base[e] != Marker::FalseIntercepted) continue;
    const std::uint32_t* nodes = mesh.element_nodes(static_cast<std::uint32_t>(e));
    for (int l = 0; l < npe; ++l) markers.node_false_intercepted[nodes[l]] = 1;
  }
  // Gather: any active element touching a flagged node is re-tagged.
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < n_elems; ++e) {
    markers.neighbors_fi[e] = 0;
    if (markers.base[e] == Marker::FalseIntercepted || markers.base[e] == Marker::Exterior)
      continue;
    const std::uint32_t* nodes = mesh.element_nodes(static_cast<std::uint32_t>(e));
    for (int l = 0; l < npe; ++l)
      if (markers.node_false_intercepted[nodes[l]]) {
        markers.neighbors_fi[e] = 1;
        break;
      }
  }
}

namespace {

/// Per-element face qualification bits per the two node rules.
std::uint8_t qualify_faces(const Mesh& mesh, const MarkerField& mf, std::uint32_t e) {
  const Marker t = mf.tag(e);
  if (t != Marker::Intercepted && t != Marker::NeighborsFalseIntercepted) return 0;
  std::uint8_t bits = 0;
  const std::uint32_t* nodes = mesh.element_nodes(e);
  int local[4];
  int count = 0;
  for (int axis = 0; axis < mesh.dim(); ++axis)
    for (int side : {-1, +1}) {
      mesh.face_local_nodes(axis, side, local, count);
      bool ok = true;
      for (int i = 0; i < count && ok; ++i) {
        const std::uint32_t nd = nodes[local[i]];
        if (t == Marker::Intercepted) {
          ok = !mf.node_interior[nd];
        } else {
          ok = !mf.node_interior[nd] || mf.node_false_intercepted[nd];
        }
      }
      if (ok) bits |= std::uint8_t(1u << (2 * axis + (side > 0 ? 1 : 0)));
    }
  return bits;
}

std::uint64_t face_key(const Mesh& mesh, std::uint32_t e, int axis, int side) {
  std::uint32_t c[3];
  mesh.element_cell(e, c[0], c[1], c[2]);
  const std::uint64_t n = mesh.cells_per_axis();
  const std::uint64_t plane = c[axis] + (side > 0 ? 1 : 0);
  std::uint64_t c1 = 0, c2 = 0;
  int idx = 0;
  for (int a = 0; a < mesh.dim(); ++a) {
    if (a == axis) continue;
    (idx++ == 0 ? c1 : c2) = c[a];
  }
  return ((std::uint64_t(axis) * (n + 1) + plane) * n + c1) * n + c2;
}

}  // namespace

SurrogateBoundary extract_boundary(const Mesh& mesh, MarkerField& markers,
                                   const Geometry& geometry, const SurrogateOptions& options) {
  const std::int64_t n_elems = static_cast<std::int64_t>(mesh.n_elements());
  const int dim = mesh.dim();
  std::vector<std::uint8_t> bits(n_elems, 0);

  SurrogateBoundary out;
  out.lambda = markers.lambda;

  const std::size_t max_iter = mesh.n_elements() + 2;
  std::size_t iter = 0;
  while (true) {
    if (++iter > max_iter)
      throw InternalError("extract_boundary: cycle fix did not reach a fixed point");
#pragma omp parallel for schedule(static)
    for (std::int64_t e = 0; e < n_elems; ++e)
      bits[e] = qualify_faces(mesh, markers, static_cast<std::uint32_t>(e));

    // Cycle fix: both faces of one axis on the boundary would self-intersect
    // the cycle, so the element leaves the surrogate domain and the neighbor
    // pass reruns.
    bool changed = false;
    for (std::int64_t e = 0; e < n_elems; ++e) {
      if (!bits[e]) continue;
      for (int axis = 0; axis < dim; ++axis) {
        const std::uint8_t pair = std::uint8_t(0b11u << (2 * axis));
        if ((bits[e] & pair) == pair) {
          markers.base[e] = Marker::FalseIntercepted;
          changed = true;
          break;
        }
      }
    }
    if (!changed) break;
    mark_neighbors_of_false_intercepted(mesh, markers);
  }
  out.fixed_point_iterations = static_cast<int>(iter);

  // Collect faces; a geometric face emitted from both owners is interior to
  // the active set (a point pinch) and is dropped from both sides.
  struct Candidate {
    std::uint64_t key;
    std::uint32_t owner;
    std::uint8_t axis, side;
  };
  std::vector<Candidate> cand;
  for (std::int64_t e = 0; e < n_elems; ++e) {
    if (!bits[e]) continue;
    for (int axis = 0; axis < dim; ++axis)
      for (int side : {-1, +1}) {
        if (!(bits[e] & (1u << (2 * axis + (side > 0 ? 1 : 0))))) continue;
        cand.push_back({face_key(mesh, static_cast<std::uint32_t>(e), axis, side),
                        static_cast<std::uint32_t>(e), std::uint8_t(axis),
                        std::uint8_t(side > 0 ? 1 : 0)});
      }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    return a.key < b.key || (a.key == b.key && a.owner < b.owner);
  });
  std::vector<Candidate> kept;
  kept.reserve(cand.size());
  for (std::size_t i = 0; i < cand.size();) {
    if (i + 1 < cand.size() && cand[i + 1].key == cand[i].key) {
      out.dropped_interior_pairs += 1;
      i += 2;
      continue;
    }
    kept.push_back(cand[i]);
    ++i;
  }

  // Face quadrature and distance vectors.
  const QuadratureRule face_rule = gauss_rule(options.face_quadrature_points, dim - 1);
  const double h = mesh.h();
  const double jac = std::pow(0.5 * h, dim - 1);
  out.faces.resize(kept.size());
  const std::int64_t n_faces = static_cast<std::int64_t>(kept.size());
  ParallelErrorCollector errs;
#pragma omp parallel for schedule(dynamic, 32)
  for (std::int64_t fi = 0; fi < n_faces; ++fi) {
    if (errs.failed()) continue;
    const Candidate& c = kept[fi];
    SurrogateFace& f = out.faces[fi];
    f.owner = c.owner;
    f.axis = c.axis;
    f.side = c.side ? +1 : -1;
    f.normal = {0, 0, 0};
    f.normal[f.axis] = double(f.side);
    const Point anchor = mesh.element_anchor(c.owner);
    f.qp.resize(face_rule.size());
    try {
      for (std::size_t q = 0; q < face_rule.size(); ++q) {
        Point x{0, 0, 0};
        int cross_idx = 0;
        for (int a = 0; a < dim; ++a) {
          if (a == f.axis) {
            x[a] = anchor[a] + (f.side > 0 ? h : 0.0);
          } else {
            x[a] = anchor[a] + 0.5 * h * (face_rule.points[q][cross_idx] + 1.0);
            ++cross_idx;
          }
        }
        f.qp[q].x = x;
        f.qp[q].w = face_rule.weights[q] * jac;
        f.qp[q].d = geometry.distance_to_true_boundary(x).d;
      }
    } catch (...) {
      errs.capture();
    }
  }
  errs.rethrow();

  for (std::int64_t e = 0; e < n_elems; ++e)
    if (markers.active(static_cast<std::uint32_t>(e)))
      out.active_ids.push_back(static_cast<std::uint32_t>(e));
  return out;
}

SurrogateResult identify_surrogate(const Mesh& mesh, const Geometry& geometry, double lambda,
                                   const SurrogateOptions& options) {
  SurrogateResult r;
  r.markers = generate_markers(mesh, geometry, lambda, options);
  mark_neighbors_of_false_intercepted(mesh, r.markers);
  r.boundary = extract_boundary(mesh, r.markers, geometry, options);
  return r;
}

double rms_gap(const SurrogateBoundary& boundary, bool quadrature_weighted) {
  if (boundary.faces.empty()) throw std::invalid_argument("rms_gap: empty boundary");
  double num = 0, den = 0;
  for (const SurrogateFace& f : boundary.faces)
    for (const SurrogateFacePoint& q : f.qp) {
      const double gap = dot(q.d, f.normal);
      const double w = quadrature_weighted ? q.w : 1.0;
      num += w * gap * gap;
      den += w;
    }
  return std::sqrt(num / den);
}

Point divergence_sum(const Mesh& mesh, const SurrogateBoundary& boundary) {
  const double area = std::pow(mesh.h(), mesh.dim() - 1);
  Point s{0, 0, 0};
  for (const SurrogateFace& f : boundary.faces) s = s + area * f.normal;
  return s;
}

double active_volume_by_elements(const Mesh& mesh, const SurrogateBoundary& boundary) {
  return double(boundary.active_ids.size()) * std::pow(mesh.h(), mesh.dim());
}

double active_volume_by_divergence(const Mesh& mesh, const SurrogateBoundary& boundary) {
  double v = 0;
  for (const SurrogateFace& f : boundary.faces)
    for (const SurrogateFacePoint& q : f.qp) v += q.w * dot(q.x, f.normal);
  return v / mesh.dim();
}

bool single_cycle_condition(const Mesh& mesh, const SurrogateBoundary& boundary) {
  // Count incidences on the node grid: 2D boundary edges meet at vertices,
  // 3D boundary quads meet at grid edges.
  const std::uint64_t npa = std::uint64_t(mesh.cells_per_axis()) + 1;
  auto vkey = [&](std::uint64_t i, std::uint64_t j, std::uint64_t k) {
    return (k * npa + j) * npa + i;
  };
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> incidence;
  for (const SurrogateFace& f : boundary.faces) {
    std::uint32_t c[3];
    mesh.element_cell(f.owner, c[0], c[1], c[2]);
    std::uint64_t base[3] = {c[0], c[1], c[2]};
    base[f.axis] += f.side > 0 ? 1 : 0;
    if (mesh.dim() == 2) {
      const int cross = f.axis == 0 ? 1 : 0;
      std::uint64_t a[3] = {base[0], base[1], 0};
      std::uint64_t b[3] = {base[0], base[1], 0};
      b[cross] += 1;
      incidence[{vkey(a[0], a[1], 0), 0}] += 1;
      incidence[{vkey(b[0], b[1], 0), 0}] += 1;
    } else {
      // Four edges of the quad face; an edge key is (low corner, direction).
      int cross[2], idx = 0;
      for (int a = 0; a < 3; ++a)
        if (a != f.axis) cross[idx++] = a;
      for (int eaxis : {cross[0], cross[1]}) {
        const int other = eaxis == cross[0] ? cross[1] : cross[0];
        for (int off : {0, 1}) {
          std::uint64_t lo[3] = {base[0], base[1], base[2]};
          lo[other] += off;
          incidence[{vkey(lo[0], lo[1], lo[2]), std::uint64_t(eaxis)}] += 1;
        }
      }
    }
  }
  for (const auto& [key, count] : incidence)
    if (count % 2 != 0) return false;
  return true;
}

}  // namespace sbm
