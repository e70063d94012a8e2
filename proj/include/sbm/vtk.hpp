#pragma once

#include <string>

#include "sbm/analyze.hpp"

namespace sbm {

/// Legacy ASCII VTK unstructured grid with a cell marker array and, when a
/// field is given, a point solution array (scalar or 2-component vectors).
void export_vtk(const Mesh& mesh, const MarkerField& markers, const SolutionField* field,
                const std::string& path);

/// Surrogate faces as VTK lines (2D) or quads (3D).
void export_boundary_vtk(const Mesh& mesh, const SurrogateBoundary& boundary,
                         const std::string& path);

/// One "element_id,tag" row per element.
void export_markers_csv(const Mesh& mesh, const MarkerField& markers, const std::string& path);

}  // namespace sbm
