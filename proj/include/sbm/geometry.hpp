#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbm/core.hpp"

namespace sbm {

/// Which branch of the point-to-primitive distance query produced the
/// answer: plane projection inside (A), an edge/segment foot (B->C), or a
/// vertex after the edge foot fell outside (B->D->E).
enum class DistanceCase : std::uint8_t { A, BC, BDE };

struct DistanceResult {
  Point d{0, 0, 0};        // closest point minus query point
  Point closest{0, 0, 0};  // point on the true boundary
  std::int64_t source_id = -1;
  DistanceCase case_tag = DistanceCase::A;
  bool degenerate = false;

  double distance() const { return norm(d); }
};

struct Triangle {
  Point a, b, c;
  Point normal;    // (b-a) x (c-a), unnormalized
  Point centroid;  // (a+b+c)/3
};

Triangle make_triangle(const Point& a, const Point& b, const Point& c);

/// True when the triangle area falls below 1e-14 * (longest edge)^2.
bool triangle_degenerate(const Point& a, const Point& b, const Point& c);

struct TriangleSoup {
  std::vector<Triangle> triangles;
  BoundingBox bounds{};
  std::size_t dropped_degenerate = 0;
};

/// Parse an STL file (binary or ASCII autodetected); degenerate triangles
/// are dropped and counted.
TriangleSoup load_stl(const std::string& path);

void write_stl_ascii(const std::string& path, const std::vector<Triangle>& tris,
                     const std::string& name = "shape");
void write_stl_binary(const std::string& path, const std::vector<Triangle>& tris);

/// Triangulated sphere from recursive icosahedron subdivision;
/// 20 * 4^subdivisions triangles.
std::vector<Triangle> make_icosphere(const Point& center, double radius, int subdivisions);

std::vector<Triangle> make_cube_triangles(const Point& lo, const Point& hi);

/// Projection test of Alg.-7 style: cross products along the three edges
/// must not oppose each other; boundary counts as inside. `p` is assumed to
/// lie (near) the triangle's plane.
bool check_inside_3d_triangle(const Point& p, const Point& a, const Point& b, const Point& c);

/// Exact closest point on a closed triangle: plane projection when it lands
/// inside, otherwise the best of the three segment feet (clamped), with the
/// vertex case tagged separately.
DistanceResult closest_point_triangle(const Point& p, const Triangle& tri);

/// Balanced k-d tree over triangle centroids supporting k-nearest queries.
class CentroidKdTree {
 public:
  CentroidKdTree() = default;
  explicit CentroidKdTree(const TriangleSoup& soup, int leaf_size = 16);

  /// Ids of the k triangles with nearest centroids (unordered).
  void k_nearest(const Point& p, int k, std::vector<std::uint32_t>& out) const;

  std::size_t size() const { return ids_.size(); }

 private:
  struct KNearestQueue;
  void search(std::uint32_t node, const Point& p, KNearestQueue& q) const;

  struct Node {
    std::uint32_t left = 0, right = 0;  // children; 0 = none (root is 0 but never a child)
    std::uint32_t begin = 0, end = 0;   // leaf range into ids_
    int split_axis = -1;
    double split_value = 0;
  };
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> ids_;
  std::vector<Point> centroids_;  // indexed by triangle id
  int leaf_size_ = 16;
};

/// Closest point among the k triangles whose centroids are nearest to p;
/// with k >= soup size this is exhaustive search. Ties resolve to the lower
/// triangle id.
DistanceResult nearest_triangle_distance(const TriangleSoup& soup, const CentroidKdTree& tree,
                                         const Point& p, int k);

/// Exhaustive minimum over all triangles (reference oracle).
DistanceResult brute_force_distance(const TriangleSoup& soup, const Point& p);

/// Shape answering membership and closest-boundary-point queries.
/// Immutable after construction; the memoized distance query is safe for
/// concurrent callers.
class Geometry {
 public:
  virtual ~Geometry() = default;

  virtual int dim() const = 0;
  virtual BoundingBox bounds() const = 0;

  /// Membership in the closed domain; points on the boundary count inside.
  virtual bool inside(const Point& p) const = 0;

  /// Uncached closest-point query.
  virtual DistanceResult closest_boundary_point(const Point& p) const = 0;

  /// Memoized closest-point query; keys are coordinates quantized to 1e-12
  /// of the bounding-box diagonal.
  DistanceResult distance_to_true_boundary(const Point& p) const;

  std::size_t distance_cache_size() const;

 protected:
  void init_cache_scale();

 private:
  mutable std::unordered_map<std::uint64_t, DistanceResult> cache_;
  mutable std::shared_mutex cache_mutex_;
  double inv_quantum_ = 0;
  Point cache_origin_{0, 0, 0};
};

class Circle final : public Geometry {
 public:
  Circle(const Point& center, double radius);
  int dim() const override { return 2; }
  BoundingBox bounds() const override;
  bool inside(const Point& p) const override;
  DistanceResult closest_boundary_point(const Point& p) const override;

  const Point& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Point center_;
  double radius_;
};

/// Closed, counterclockwise, non-self-intersecting polygon.
class Polygon final : public Geometry {
 public:
  explicit Polygon(std::vector<Point> loop);
  int dim() const override { return 2; }
  BoundingBox bounds() const override;
  bool inside(const Point& p) const override;
  DistanceResult closest_boundary_point(const Point& p) const override;

  const std::vector<Point>& vertices() const { return loop_; }

 private:
  std::vector<Point> loop_;
  BoundingBox bounds_{};
};

/// Vertex loop from a plain-text file of "x y" lines.
std::vector<Point> load_polygon(const std::string& path);

std::vector<Point> make_rotated_square(const Point& center, double half_side, double angle_deg);
std::vector<Point> make_star(const Point& center, double outer_radius, double inner_radius,
                             int n_points, double rotation_deg = 0.0);

/// Watertight triangle soup queried by ray-cast parity (membership) and
/// k-d-accelerated closest-triangle search.
class TriangleSoupGeometry final : public Geometry {
 public:
  explicit TriangleSoupGeometry(TriangleSoup soup, int k_candidates = 32);

  int dim() const override { return 3; }
  BoundingBox bounds() const override { return soup_.bounds; }
  bool inside(const Point& p) const override;
  DistanceResult closest_boundary_point(const Point& p) const override;

  const TriangleSoup& soup() const { return soup_; }
  const CentroidKdTree& kdtree() const { return tree_; }
  int k_candidates() const { return k_; }

 private:
  TriangleSoup soup_;
  CentroidKdTree tree_;
  int k_;
};

}  // namespace sbm
