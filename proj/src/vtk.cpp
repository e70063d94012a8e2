#include "sbm/vtk.hpp"

#include <fstream>

namespace sbm {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.precision(17);
  return f;
}

}  // namespace

void export_vtk(const Mesh& mesh, const MarkerField& markers, const SolutionField* field,
                const std::string& path) {
  std::ofstream f = open_out(path);
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  // Lexicographic local corners -> VTK vertex order.
  static const int perm_quad[4] = {0, 1, 3, 2};
  static const int perm_hex[8] = {0, 1, 3, 2, 4, 5, 7, 6};
  const int* perm = dim == 2 ? perm_quad : perm_hex;

  f << "# vtk DataFile Version 3.0\nsbm grid\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << mesh.n_nodes() << " double\n";
  for (std::uint32_t v = 0; v < mesh.n_nodes(); ++v) {
    const Point p = mesh.node_coord(v);
    f << p[0] << " " << p[1] << " " << p[2] << "\n";
  }
  f << "CELLS " << mesh.n_elements() << " " << mesh.n_elements() * (npe + 1) << "\n";
  for (std::uint32_t e = 0; e < mesh.n_elements(); ++e) {
    const std::uint32_t* nodes = mesh.element_nodes(e);
    f << npe;
    for (int l = 0; l < npe; ++l) f << " " << nodes[perm[l]];
    f << "\n";
  }
  f << "CELL_TYPES " << mesh.n_elements() << "\n";
  const int cell_type = dim == 2 ? 9 : 12;
  for (std::uint32_t e = 0; e < mesh.n_elements(); ++e) f << cell_type << "\n";

  f << "CELL_DATA " << mesh.n_elements() << "\nSCALARS marker int 1\nLOOKUP_TABLE default\n";
  for (std::uint32_t e = 0; e < mesh.n_elements(); ++e)
    f << static_cast<int>(markers.tag(e)) << "\n";

  if (field) {
    f << "POINT_DATA " << mesh.n_nodes() << "\n";
    if (field->ncomp == 1) {
      f << "SCALARS u double 1\nLOOKUP_TABLE default\n";
      for (std::uint32_t v = 0; v < mesh.n_nodes(); ++v) {
        const std::int64_t dof = field->node_dof[v];
        f << (dof >= 0 ? field->values[dof] : 0.0) << "\n";
      }
    } else {
      f << "VECTORS u double\n";
      for (std::uint32_t v = 0; v < mesh.n_nodes(); ++v) {
        const std::int64_t dof = field->node_dof[v];
        const double ux = dof >= 0 ? field->values[dof] : 0.0;
        const double uy = dof >= 0 ? field->values[dof + 1] : 0.0;
        f << ux << " " << uy << " 0\n";
      }
    }
  }
}

void export_boundary_vtk(const Mesh& mesh, const SurrogateBoundary& boundary,
                         const std::string& path) {
  std::ofstream f = open_out(path);
  const int dim = mesh.dim();
  const double h = mesh.h();
  const int corners = dim == 2 ? 2 : 4;

  f << "# vtk DataFile Version 3.0\nsbm surrogate boundary\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << boundary.faces.size() * corners << " double\n";
  for (const SurrogateFace& face : boundary.faces) {
    const Point a = mesh.element_anchor(face.owner);
    const double plane = a[face.axis] + (face.side > 0 ? h : 0.0);
    int cross[2] = {-1, -1}, idx = 0;
    for (int ax = 0; ax < dim; ++ax)
      if (ax != face.axis) cross[idx++] = ax;
    // Corner order traces the face perimeter.
    static const int off2[2][1] = {{0}, {1}};
    static const int off3[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (int c = 0; c < corners; ++c) {
      Point p{0, 0, 0};
      p[face.axis] = plane;
      if (dim == 2) {
        p[cross[0]] = a[cross[0]] + h * off2[c][0];
      } else {
        p[cross[0]] = a[cross[0]] + h * off3[c][0];
        p[cross[1]] = a[cross[1]] + h * off3[c][1];
      }
      f << p[0] << " " << p[1] << " " << p[2] << "\n";
    }
  }
  f << "CELLS " << boundary.faces.size() << " " << boundary.faces.size() * (corners + 1) << "\n";
  for (std::size_t i = 0; i < boundary.faces.size(); ++i) {
    f << corners;
    for (int c = 0; c < corners; ++c) f << " " << i * corners + c;
    f << "\n";
  }
  f << "CELL_TYPES " << boundary.faces.size() << "\n";
  const int cell_type = dim == 2 ? 3 : 9;
  for (std::size_t i = 0; i < boundary.faces.size(); ++i) f << cell_type << "\n";
}

void export_markers_csv(const Mesh& mesh, const MarkerField& markers, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "element_id,tag\n";
  for (std::uint32_t e = 0; e < mesh.n_elements(); ++e)
    f << e << "," << marker_name(markers.tag(e)) << "\n";
}

}  // namespace sbm
