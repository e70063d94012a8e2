#pragma once

#include <vector>

#include "sbm/core.hpp"

namespace sbm {

/// Tensor-product quadrature rule on the reference cube [-1,1]^dim.
struct QuadratureRule {
  int dim = 1;
  int points_per_axis = 1;
  std::vector<Point> points;    // reference coordinates
  std::vector<double> weights;  // sum to 2^dim

  std::size_t size() const { return points.size(); }
};

/// 1D Gauss-Legendre nodes and weights on [-1,1], exact for degree 2n-1.
void gauss_legendre_1d(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Tensor-product Gauss-Legendre rule with n points per axis.
QuadratureRule gauss_rule(int n_per_axis, int dim);

}  // namespace sbm
