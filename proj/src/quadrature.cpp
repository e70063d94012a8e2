#include "sbm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace sbm {

// Nodes are roots of the Legendre polynomial P_n, found by Newton iteration
// from the Chebyshev-based initial guess; weights are 2 / ((1-x^2) P_n'(x)^2).
void gauss_legendre_1d(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1 || n > 10) throw std::invalid_argument("gauss_legendre_1d: n must be in [1,10]");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Recurrence for P_n(x) and P_{n-1}(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double p = (n == 1) ? x : p1;
      double pm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * p - pm1) / (x * x - 1.0);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureRule gauss_rule(int n_per_axis, int dim) {
  if (dim != 1 && dim != 2 && dim != 3)
    throw std::invalid_argument("gauss_rule: dim must be 1, 2, or 3");
  std::vector<double> x, w;
  gauss_legendre_1d(n_per_axis, x, w);

  QuadratureRule rule;
  rule.dim = dim;
  rule.points_per_axis = n_per_axis;
  const int n = n_per_axis;
  const int total = (dim == 1) ? n : (dim == 2 ? n * n : n * n * n);
  rule.points.reserve(total);
  rule.weights.reserve(total);
  const int nz = (dim == 3) ? n : 1;
  const int ny = (dim >= 2) ? n : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < n; ++i) {
        Point p{x[i], dim >= 2 ? x[j] : 0.0, dim == 3 ? x[k] : 0.0};
        double ww = w[i] * (dim >= 2 ? w[j] : 1.0) * (dim == 3 ? w[k] : 1.0);
        rule.points.push_back(p);
        rule.weights.push_back(ww);
      }
  return rule;
}

}  // namespace sbm
