#pragma once

#include "sbm/analyze.hpp"
#include "sbm/manufactured.hpp"

namespace sbm::ref {

// Plain serial implementations kept as references for the OpenMP kernels.
// The tests compare them against the parallel paths (bit-identical for
// marker generation and assembly, 1e-13-close for reductions); the bench
// tool compares their runtimes.

MarkerField generate_markers(const Mesh& mesh, const Geometry& geometry, double lambda,
                             const SurrogateOptions& options = {});

SparseSystem assemble_poisson(const Mesh& mesh, const MarkerField& markers,
                              const SurrogateBoundary& boundary, const PdeSpec& spec);

ErrorReport l2_error(const SolutionField& field,
                     const std::function<double(const Point&, int)>& exact,
                     const Geometry& geometry, int points_per_axis = 5);

}  // namespace sbm::ref
