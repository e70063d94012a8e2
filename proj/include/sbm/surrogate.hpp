#pragma once

#include <cstdint>
#include <vector>

#include "sbm/geometry.hpp"
#include "sbm/mesh.hpp"

namespace sbm {

enum class Marker : std::uint8_t {
  Interior,
  Exterior,
  Intercepted,
  FalseIntercepted,
  NeighborsFalseIntercepted
};

const char* marker_name(Marker m);

/// Element and node classification. The stored per-element tag never holds
/// NeighborsFalseIntercepted directly; that state lives in an overlay so the
/// neighbor pass can be recomputed idempotently after cycle fixes re-tag
/// elements as FalseIntercepted.
struct MarkerField {
  std::vector<Marker> base;                          // per element
  std::vector<std::uint8_t> neighbors_fi;            // per element overlay
  std::vector<std::uint8_t> node_interior;           // per node
  std::vector<std::uint8_t> node_false_intercepted;  // per node
  double lambda = 0.0;

  Marker tag(std::uint32_t e) const {
    if (base[e] == Marker::FalseIntercepted) return Marker::FalseIntercepted;
    if (neighbors_fi[e]) return Marker::NeighborsFalseIntercepted;
    return base[e];
  }
  /// Part of the surrogate domain (volume integration happens here).
  bool active(std::uint32_t e) const {
    Marker t = tag(e);
    return t != Marker::Exterior && t != Marker::FalseIntercepted;
  }
  std::size_t count(Marker m) const;
};

struct SurrogateFacePoint {
  Point x{};      // physical quadrature point on the face
  double w = 0;   // weight including the face Jacobian
  Point d{};      // vector to the closest point on the true boundary
};

struct SurrogateFace {
  std::uint32_t owner = 0;
  int axis = 0;
  int side = -1;
  Point normal{};  // unit, axis-aligned, pointing away from the active domain
  std::vector<SurrogateFacePoint> qp;
};

struct SurrogateBoundary {
  std::vector<SurrogateFace> faces;
  std::vector<std::uint32_t> active_ids;  // sorted element indices
  double lambda = 0.0;
  int fixed_point_iterations = 1;
  std::size_t dropped_interior_pairs = 0;
};

struct SurrogateOptions {
  int volume_fraction_points = 5;  // per axis, for the interior-fraction estimate
  int face_quadrature_points = 2;  // per axis on boundary faces
};

/// Classify elements from node membership; Intercepted elements whose
/// sampled exterior volume fraction exceeds lambda become FalseIntercepted.
MarkerField generate_markers(const Mesh& mesh, const Geometry& geometry, double lambda,
                             const SurrogateOptions& options = {});

/// Scatter-to-gather pass: flag nodes of FalseIntercepted elements, then
/// re-tag any active element touching a flagged node. Recomputes the
/// overlay and node flags from the current base tags.
void mark_neighbors_of_false_intercepted(const Mesh& mesh, MarkerField& markers);

/// Emit boundary faces from the node rules, re-tagging elements whose
/// opposite faces both qualify and iterating the neighbor pass until a
/// fixed point. Each face carries quadrature points and distance vectors.
SurrogateBoundary extract_boundary(const Mesh& mesh, MarkerField& markers,
                                   const Geometry& geometry,
                                   const SurrogateOptions& options = {});

struct SurrogateResult {
  MarkerField markers;
  SurrogateBoundary boundary;
};

/// Full pipeline: markers, neighbor pass, boundary extraction.
SurrogateResult identify_surrogate(const Mesh& mesh, const Geometry& geometry, double lambda,
                                   const SurrogateOptions& options = {});

/// Quadrature-weighted RMS of the normal gap d·n over the boundary.
double rms_gap(const SurrogateBoundary& boundary, bool quadrature_weighted = true);

// Validation helpers used by the test suites.

/// Sum of area-weighted normals; zero for a watertight boundary.
Point divergence_sum(const Mesh& mesh, const SurrogateBoundary& boundary);

double active_volume_by_elements(const Mesh& mesh, const SurrogateBoundary& boundary);

/// Active volume via the divergence theorem applied to x/dim.
double active_volume_by_divergence(const Mesh& mesh, const SurrogateBoundary& boundary);

/// Single-cycle condition: in 2D every boundary vertex touches an even
/// number of boundary edges; in 3D every boundary-face edge is shared by an
/// even number of boundary faces.
bool single_cycle_condition(const Mesh& mesh, const SurrogateBoundary& boundary);

}  // namespace sbm
