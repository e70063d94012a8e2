#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>

namespace sbm {

// Points and vectors share one fixed-size representation; only the first
// `dim` components are meaningful (dim is 2 or 3).
using Point = std::array<double, 3>;

inline Point make_point(double x, double y, double z = 0.0) { return {x, y, z}; }

inline Point operator+(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point operator-(const Point& a, const Point& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }

inline bool finite(const Point& a, int dim) {
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

/// Axis-aligned box spanning [lo, hi] in `dim` dimensions.
struct BoundingBox {
  Point lo{0, 0, 0};
  Point hi{0, 0, 0};
  int dim = 2;

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double diagonal() const {
    double s = 0;
    for (int a = 0; a < dim; ++a) s += extent(a) * extent(a);
    return std::sqrt(s);
  }
  bool contains(const Point& p) const {
    for (int a = 0; a < dim; ++a)
      if (p[a] < lo[a] || p[a] > hi[a]) return false;
    return true;
  }
  void validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("BoundingBox: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a)
      if (!(hi[a] > lo[a])) throw std::invalid_argument("BoundingBox: hi must exceed lo");
  }
};

/// Grow every side by `fraction` of that axis extent, then expand the
/// shorter axes about their midpoints so all extents match (square cells).
inline BoundingBox pad_and_squarify(const BoundingBox& b, double fraction) {
  BoundingBox out = b;
  double ext = 0;
  for (int a = 0; a < b.dim; ++a) {
    double pad = fraction * b.extent(a);
    out.lo[a] = b.lo[a] - pad;
    out.hi[a] = b.hi[a] + pad;
    ext = std::max(ext, out.extent(a));
  }
  for (int a = 0; a < b.dim; ++a) {
    double mid = 0.5 * (out.lo[a] + out.hi[a]);
    out.lo[a] = mid - 0.5 * ext;
    out.hi[a] = mid + 0.5 * ext;
  }
  return out;
}

// Error taxonomy. The CLI maps these onto process exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  double residual = 0.0;
  SolverError(const std::string& msg, double res) : std::runtime_error(msg), residual(res) {}
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Captures the first exception thrown inside an OpenMP loop body so it can
/// be rethrown after the parallel region (exceptions must not cross one).
class ParallelErrorCollector {
 public:
  bool failed() const { return failed_.load(std::memory_order_relaxed); }
  void capture() {
    std::lock_guard<std::mutex> g(mutex_);
    if (!failed_.exchange(true)) ep_ = std::current_exception();
  }
  void rethrow() const {
    if (failed_.load() && ep_) std::rethrow_exception(ep_);
  }

 private:
  std::atomic<bool> failed_{false};
  std::exception_ptr ep_;
  std::mutex mutex_;
};

/// Deterministic pairwise sum over a contiguous range; the result depends
/// only on the values and their order, never on thread count.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

}  // namespace sbm
