#pragma once

#include <array>

#include "sbm/core.hpp"

namespace sbm {

/// Multilinear (p = 1) basis on the reference cube [-1,1]^dim.
/// Local node l has corner offsets (l&1, (l>>1)&1, (l>>2)&1); node 0 sits
/// at (-1,-1[,-1]). Gradients are reference-space; callers apply the 2/h
/// map to physical space.
struct ShapeEval {
  std::array<double, 8> value{};
  std::array<Point, 8> gradient{};
  int n_nodes = 0;
};

inline ShapeEval shape_eval(const Point& local, int dim) {
  ShapeEval out;
  out.n_nodes = 1 << dim;
  for (int l = 0; l < out.n_nodes; ++l) {
    double v = 1.0;
    Point g{1.0, 1.0, 1.0};
    for (int a = 0; a < dim; ++a) {
      const double sign = ((l >> a) & 1) ? 1.0 : -1.0;
      const double f = 0.5 * (1.0 + sign * local[a]);
      v *= f;
      for (int b = 0; b < dim; ++b) g[b] *= (b == a) ? 0.5 * sign : f;
    }
    out.value[l] = v;
    for (int b = dim; b < 3; ++b) g[b] = 0.0;
    out.gradient[l] = g;
  }
  return out;
}

}  // namespace sbm
