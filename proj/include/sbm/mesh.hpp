#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "sbm/basis.hpp"
#include "sbm/core.hpp"
#include "sbm/morton.hpp"
#include "sbm/quadrature.hpp"

namespace sbm {

class Geometry;

/// Face of an element, identified by owner plus axis and side.
struct Face {
  std::uint32_t owner = 0;
  int axis = 0;
  int side = -1;  // -1 or +1
};

/// Uniform-level Cartesian grid over a square/cubic bounding box, stored as
/// a linearized tree: sorted Morton codes plus a shared-node table. When
/// carving is enabled, elements whose nodes all lie outside the geometry are
/// omitted (incomplete tree); neighbor queries recover adjacency from code
/// arithmetic, so no adjacency is stored.
class Mesh {
 public:
  Mesh() = default;

  int dim() const { return dim_; }
  int level() const { return level_; }
  double h() const { return h_; }
  const BoundingBox& bbox() const { return bbox_; }
  std::uint32_t cells_per_axis() const { return n_cells_; }
  bool carved() const { return carved_; }

  std::size_t n_elements() const { return codes_.size(); }
  std::size_t n_nodes() const { return node_keys_.size(); }
  int nodes_per_element() const { return 1 << dim_; }

  std::uint64_t element_code(std::uint32_t e) const { return codes_[e]; }

  /// Integer cell coordinates of element e.
  void element_cell(std::uint32_t e, std::uint32_t& i, std::uint32_t& j, std::uint32_t& k) const {
    morton_decode(codes_[e], dim_, i, j, k);
  }

  /// Low corner of element e.
  Point element_anchor(std::uint32_t e) const {
    std::uint32_t i, j, k;
    element_cell(e, i, j, k);
    return {bbox_.lo[0] + h_ * i, bbox_.lo[1] + h_ * j, dim_ == 3 ? bbox_.lo[2] + h_ * k : 0.0};
  }

  Point element_center(std::uint32_t e) const {
    Point a = element_anchor(e);
    for (int d = 0; d < dim_; ++d) a[d] += 0.5 * h_;
    return a;
  }

  /// Node ids of element e in local order (x fastest: bit a of l selects
  /// the +side along axis a), matching shape_eval.
  const std::uint32_t* element_nodes(std::uint32_t e) const {
    return incidence_.data() + static_cast<std::size_t>(e) * nodes_per_element();
  }

  Point node_coord(std::uint32_t node) const {
    std::uint64_t key = node_keys_[node];
    std::uint64_t npa = n_cells_ + 1;
    std::uint32_t i = static_cast<std::uint32_t>(key % npa);
    std::uint64_t rest = key / npa;
    std::uint32_t j = static_cast<std::uint32_t>(rest % npa);
    std::uint32_t k = static_cast<std::uint32_t>(rest / npa);
    return {bbox_.lo[0] + h_ * i, bbox_.lo[1] + h_ * j, dim_ == 3 ? bbox_.lo[2] + h_ * k : 0.0};
  }

  /// Face-adjacent element at the same level, or nullopt if outside the
  /// grid or carved away.
  std::optional<std::uint32_t> neighbor(std::uint32_t e, int axis, int side) const;

  /// Element whose cell coordinates are (i,j,k), if retained.
  std::optional<std::uint32_t> element_at_cell(std::uint32_t i, std::uint32_t j,
                                               std::uint32_t k) const;

  /// Cell coordinates containing point p (clamped to the grid).
  void locate_cell(const Point& p, std::uint32_t& i, std::uint32_t& j, std::uint32_t& k) const;

  /// Element containing p, if retained.
  std::optional<std::uint32_t> locate(const Point& p) const;

  /// Map a physical point inside element e to reference coordinates.
  Point to_reference(std::uint32_t e, const Point& p) const {
    Point a = element_anchor(e);
    Point r{0, 0, 0};
    for (int d = 0; d < dim_; ++d) r[d] = 2.0 * (p[d] - a[d]) / h_ - 1.0;
    return r;
  }

  Point from_reference(std::uint32_t e, const Point& r) const {
    Point a = element_anchor(e);
    Point p{0, 0, 0};
    for (int d = 0; d < dim_; ++d) p[d] = a[d] + 0.5 * h_ * (r[d] + 1.0);
    return p;
  }

  /// Local node indices lying on the given face (2^(dim-1) of them).
  void face_local_nodes(int axis, int side, int* out, int& count) const {
    count = 0;
    const int want = side > 0 ? 1 : 0;
    for (int l = 0; l < nodes_per_element(); ++l)
      if (((l >> axis) & 1) == want) out[count++] = l;
  }

  friend Mesh build_grid(const BoundingBox& bbox, int level, const Geometry* geometry, bool carve,
                         std::size_t max_nodes);

 private:
  BoundingBox bbox_{};
  int dim_ = 2;
  int level_ = 1;
  double h_ = 0;
  std::uint32_t n_cells_ = 2;
  bool carved_ = false;
  std::vector<std::uint64_t> codes_;  // sorted
  std::unordered_map<std::uint64_t, std::uint32_t> code_index_;
  std::vector<std::uint64_t> node_keys_;  // sorted lexicographic keys
  std::vector<std::uint32_t> incidence_;
};

/// Build a uniform grid at the given refinement level. With carve enabled,
/// elements whose nodes are all outside `geometry` are dropped. A node-count
/// cap guards against runaway refinement levels.
Mesh build_grid(const BoundingBox& bbox, int level, const Geometry* geometry = nullptr,
                bool carve = false, std::size_t max_nodes = std::size_t(1) << 26);

}  // namespace sbm
