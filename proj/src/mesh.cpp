#include "sbm/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "sbm/geometry.hpp"

namespace sbm {

std::optional<std::uint32_t> Mesh::neighbor(std::uint32_t e, int axis, int side) const {
  std::uint32_t c[3];
  element_cell(e, c[0], c[1], c[2]);
  if (side < 0) {
    if (c[axis] == 0) return std::nullopt;
    c[axis] -= 1;
  } else {
    if (c[axis] + 1 >= n_cells_) return std::nullopt;
    c[axis] += 1;
  }
  return element_at_cell(c[0], c[1], c[2]);
}

std::optional<std::uint32_t> Mesh::element_at_cell(std::uint32_t i, std::uint32_t j,
                                                   std::uint32_t k) const {
  if (i >= n_cells_ || j >= n_cells_ || (dim_ == 3 && k >= n_cells_)) return std::nullopt;
  auto it = code_index_.find(morton_encode(i, j, dim_ == 3 ? k : 0, dim_));
  if (it == code_index_.end()) return std::nullopt;
  return it->second;
}

void Mesh::locate_cell(const Point& p, std::uint32_t& i, std::uint32_t& j,
                       std::uint32_t& k) const {
  auto clamp_cell = [&](double x, int axis) -> std::uint32_t {
    double t = std::floor((x - bbox_.lo[axis]) / h_);
    if (t < 0) t = 0;
    if (t > n_cells_ - 1) t = n_cells_ - 1;
    return static_cast<std::uint32_t>(t);
  };
  i = clamp_cell(p[0], 0);
  j = clamp_cell(p[1], 1);
  k = dim_ == 3 ? clamp_cell(p[2], 2) : 0;
}

std::optional<std::uint32_t> Mesh::locate(const Point& p) const {
  std::uint32_t i, j, k;
  locate_cell(p, i, j, k);
  return element_at_cell(i, j, k);
}

Mesh build_grid(const BoundingBox& bbox, int level, const Geometry* geometry, bool carve,
                std::size_t max_nodes) {
  bbox.validate();
  if (level < 1 || level > 20) throw std::invalid_argument("build_grid: level must be in [1,20]");
  const double ext = bbox.extent(0);
  for (int a = 1; a < bbox.dim; ++a)
    if (std::abs(bbox.extent(a) - ext) > 1e-12 * ext)
      throw std::invalid_argument("build_grid: bounding box must have equal extents (square cells)");
  if (carve && !geometry) throw std::invalid_argument("build_grid: carve requires a geometry");

  Mesh m;
  m.bbox_ = bbox;
  m.dim_ = bbox.dim;
  m.level_ = level;
  m.n_cells_ = 1u << level;
  m.h_ = ext / m.n_cells_;
  m.carved_ = carve;

  const std::uint64_t n = m.n_cells_;
  const std::uint64_t npa = n + 1;
  const std::uint64_t total_nodes = (m.dim_ == 2) ? npa * npa : npa * npa * npa;
  if (total_nodes > max_nodes)
    throw ResourceError("build_grid: node count " + std::to_string(total_nodes) +
                        " exceeds cap " + std::to_string(max_nodes));

  // Node membership over the full grid, needed only when carving.
  std::vector<std::uint8_t> node_inside;
  if (carve) {
    node_inside.assign(total_nodes, 0);
    const std::int64_t count = static_cast<std::int64_t>(total_nodes);
    ParallelErrorCollector errs;
#pragma omp parallel for schedule(static)
    for (std::int64_t key = 0; key < count; ++key) {
      if (errs.failed()) continue;
      try {
        std::uint64_t i = key % npa;
        std::uint64_t rest = key / npa;
        std::uint64_t j = rest % npa;
        std::uint64_t k = rest / npa;
        Point p{bbox.lo[0] + m.h_ * i, bbox.lo[1] + m.h_ * j,
                m.dim_ == 3 ? bbox.lo[2] + m.h_ * k : 0.0};
        node_inside[key] = geometry->inside(p) ? 1 : 0;
      } catch (...) {
        errs.capture();
      }
    }
    errs.rethrow();
  }

  auto node_key = [&](std::uint64_t i, std::uint64_t j, std::uint64_t k) {
    return (k * npa + j) * npa + i;
  };

  const std::uint64_t nz = (m.dim_ == 3) ? n : 1;
  const int npe = m.nodes_per_element();
  for (std::uint64_t k = 0; k < nz; ++k)
    for (std::uint64_t j = 0; j < n; ++j)
      for (std::uint64_t i = 0; i < n; ++i) {
        if (carve) {
          bool any_inside = false;
          for (int l = 0; l < npe && !any_inside; ++l)
            any_inside = node_inside[node_key(i + (l & 1), j + ((l >> 1) & 1),
                                              k + ((l >> 2) & 1))] != 0;
          if (!any_inside) continue;
        }
        m.codes_.push_back(morton_encode(static_cast<std::uint32_t>(i),
                                         static_cast<std::uint32_t>(j),
                                         static_cast<std::uint32_t>(k), m.dim_));
      }
  std::sort(m.codes_.begin(), m.codes_.end());
  m.code_index_.reserve(m.codes_.size() * 2);
  for (std::uint32_t e = 0; e < m.codes_.size(); ++e) m.code_index_[m.codes_[e]] = e;

  // Shared-node table: collect keys of retained elements, number them in
  // lexicographic key order so identical meshes number identically.
  std::vector<std::uint64_t> keys;
  keys.reserve(m.codes_.size() * npe);
  for (std::uint64_t code : m.codes_) {
    std::uint32_t i, j, k;
    morton_decode(code, m.dim_, i, j, k);
    for (int l = 0; l < npe; ++l)
      keys.push_back(node_key(i + (l & 1), j + ((l >> 1) & 1), k + ((l >> 2) & 1)));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  m.node_keys_ = std::move(keys);

  std::unordered_map<std::uint64_t, std::uint32_t> key_to_id;
  key_to_id.reserve(m.node_keys_.size() * 2);
  for (std::uint32_t id = 0; id < m.node_keys_.size(); ++id) key_to_id[m.node_keys_[id]] = id;

  m.incidence_.resize(m.codes_.size() * npe);
  for (std::uint32_t e = 0; e < m.codes_.size(); ++e) {
    std::uint32_t i, j, k;
    morton_decode(m.codes_[e], m.dim_, i, j, k);
    for (int l = 0; l < npe; ++l)
      m.incidence_[static_cast<std::size_t>(e) * npe + l] =
          key_to_id.at(node_key(i + (l & 1), j + ((l >> 1) & 1), k + ((l >> 2) & 1)));
  }
  return m;
}

}  // namespace sbm
