#include "sbm/solve.hpp"

#include <algorithm>
#include <cmath>

namespace sbm {

double det_dot(const double* a, const double* b, std::size_t n) {
  constexpr std::size_t kChunk = 1024;
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  if (n_chunks <= 1) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  std::vector<double> partial(n_chunks, 0.0);
  const std::int64_t nc = static_cast<std::int64_t>(n_chunks);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < nc; ++c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(begin + kChunk, n);
    double s = 0;
    for (std::size_t i = begin; i < end; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  return pairwise_sum(partial.data(), partial.size());
}

namespace {

double det_norm(const double* a, std::size_t n) { return std::sqrt(det_dot(a, a, n)); }

/// Incomplete LU factorization without fill-in on a CSR matrix with sorted
/// column indices; forward/backward solves are serial and deterministic.
class Ilu0 {
 public:
  void factor(const CsrMatrix& m) {
    matrix_ = &m;
    val_ = m.val;
    const std::size_t n = m.n;
    diag_.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
      bool found = false;
      for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
        if (m.col[k] == r) {
          diag_[r] = k;
          found = true;
        }
      if (!found) throw SolverError("solve: matrix row without diagonal entry", 0.0);
    }
    for (std::size_t r = 1; r < n; ++r) {
      for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1] && m.col[k] < r; ++k) {
        const std::size_t c = m.col[k];
        val_[k] /= pivot(c);
        std::size_t kk = k + 1, cc = diag_[c] + 1;
        while (kk < m.row_ptr[r + 1] && cc < m.row_ptr[c + 1]) {
          if (m.col[kk] == m.col[cc]) {
            val_[kk] -= val_[k] * val_[cc];
            ++kk;
            ++cc;
          } else if (m.col[kk] < m.col[cc]) {
            ++kk;
          } else {
            ++cc;
          }
        }
      }
    }
  }

  void apply(const double* b, double* x) const {
    const CsrMatrix& m = *matrix_;
    const std::size_t n = m.n;
    for (std::size_t r = 0; r < n; ++r) {
      double s = b[r];
      for (std::size_t k = m.row_ptr[r]; k < diag_[r]; ++k) s -= val_[k] * x[m.col[k]];
      x[r] = s;
    }
    for (std::size_t ri = n; ri-- > 0;) {
      double s = x[ri];
      for (std::size_t k = diag_[ri] + 1; k < m.row_ptr[ri + 1]; ++k) s -= val_[k] * x[m.col[k]];
      x[ri] = s / pivot(ri);
    }
  }

 private:
  double pivot(std::size_t r) const {
    const double p = val_[diag_[r]];
    if (std::abs(p) > 1e-14) return p;
    return p >= 0 ? 1e-14 : -1e-14;
  }
  const CsrMatrix* matrix_ = nullptr;
  std::vector<double> val_;
  std::vector<std::size_t> diag_;
};

struct JacobiPrec {
  std::vector<double> dinv;
  void apply(const double* b, double* x) const {
    for (std::size_t i = 0; i < dinv.size(); ++i) x[i] = dinv[i] * b[i];
  }
};

/// Preconditioned BiCGSTAB on A x = rhs with zero initial guess; relative
/// convergence against ||rhs||. Restarts on rho breakdown or recurrence
/// drift; throws SolverError when iterations run out.
template <typename Prec>
int bicgstab_core(const CsrMatrix& A, const std::vector<double>& rhs, const Prec& prec,
                  double tol, int maxiter, std::vector<double>& x) {
  const std::size_t n = A.n;
  x.assign(n, 0.0);
  const double bnorm = det_norm(rhs.data(), n);
  if (bnorm == 0.0) return 0;

  std::vector<double> r = rhs, rhat = rhs, p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n),
                      work(n);
  auto true_resid = [&]() {
    A.matvec(x.data(), work.data());
    for (std::size_t i = 0; i < n; ++i) work[i] = rhs[i] - work[i];
    return det_norm(work.data(), n) / bnorm;
  };
  auto restart = [&]() {
    A.matvec(x.data(), work.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - work[i];
    rhat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
  };

  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  int it = 0;
  int restarts = 0;
  const int restarts_allowed = 4;

  while (true) {
    if (it >= maxiter) {
      const double res = true_resid();
      throw SolverError("solve: BiCGSTAB exceeded " + std::to_string(maxiter) +
                            " iterations, relative residual " + std::to_string(res),
                        res);
    }
    ++it;
    const double rho = det_dot(rhat.data(), r.data(), n);
    if (std::abs(rho) < 1e-300) {
      if (restarts++ >= restarts_allowed)
        throw SolverError("solve: BiCGSTAB breakdown (rho)", true_resid());
      restart();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho / rho_prev) * (alpha / omega);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    prec.apply(p.data(), phat.data());
    A.matvec(phat.data(), v.data());
    const double rhat_v = det_dot(rhat.data(), v.data(), n);
    if (std::abs(rhat_v) < 1e-300)
      throw SolverError("solve: BiCGSTAB breakdown (rhat.v)", true_resid());
    alpha = rho / rhat_v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (det_norm(s.data(), n) / bnorm <= tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
      if (true_resid() <= tol) return it;
      if (restarts++ >= restarts_allowed) return it;
      restart();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    prec.apply(s.data(), shat.data());
    A.matvec(shat.data(), t.data());
    const double tt = det_dot(t.data(), t.data(), n);
    if (tt == 0.0) throw SolverError("solve: BiCGSTAB breakdown (t=0)", true_resid());
    omega = det_dot(t.data(), s.data(), n) / tt;
    if (omega == 0.0) throw SolverError("solve: BiCGSTAB breakdown (omega=0)", true_resid());
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i] + omega * shat[i];
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rho_prev = rho;
    if (det_norm(r.data(), n) / bnorm <= tol) {
      // Recurrence can drift near convergence; verify and restart if needed.
      if (true_resid() <= tol) return it;
      if (restarts++ >= restarts_allowed) return it;
      restart();
      rho_prev = alpha = omega = 1.0;
    }
  }
}

}  // namespace

std::vector<double> solve(const SparseSystem& system, double tol, int maxiter, SolveStats* stats,
                          SolverPrecond precond) {
  const CsrMatrix& A = system.A;
  const std::vector<double>& b = system.b;
  const std::size_t n = A.n;
  if (b.size() != n) throw std::invalid_argument("solve: rhs length mismatch");
  if (maxiter <= 0) maxiter = static_cast<int>(50.0 * std::sqrt(double(n))) + 10;

  // Symmetric diagonal equilibration: penalty rows scale like penalty/h
  // against O(1) volume rows, which otherwise degrades both preconditioners.
  std::vector<double> scale(n, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
      if (A.col[k] == r && std::abs(A.val[k]) > 1e-300)
        scale[r] = 1.0 / std::sqrt(std::abs(A.val[k]));
  CsrMatrix As;
  As.n = n;
  As.row_ptr = A.row_ptr;
  As.col = A.col;
  As.val.resize(A.val.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
      As.val[k] = A.val[k] * scale[r] * scale[A.col[k]];
  std::vector<double> bs(n);
  for (std::size_t i = 0; i < n; ++i) bs[i] = b[i] * scale[i];
  const double bnorm = det_norm(b.data(), n);

  // One attempt with a fixed preconditioner: BiCGSTAB on the scaled system
  // followed by fixed-precision iterative refinement, since convergence of
  // the equilibrated residual does not by itself pin the true relative
  // residual or the forward error.
  auto attempt = [&](auto& prec, std::vector<double>& x, int& iterations) {
    std::vector<double> y;
    iterations += bicgstab_core(As, bs, prec, tol, maxiter, y);
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = scale[i] * y[i];
    std::vector<double> work(n), rs(n), delta;
    double res = 0.0;
    for (int sweep = 0; bnorm > 0; ++sweep) {
      A.matvec(x.data(), work.data());
      for (std::size_t i = 0; i < n; ++i) work[i] = b[i] - work[i];
      res = det_norm(work.data(), n) / bnorm;
      if (sweep >= 6) break;
      if (res <= tol && sweep >= 1) break;
      for (std::size_t i = 0; i < n; ++i) rs[i] = work[i] * scale[i];
      if (det_norm(rs.data(), n) == 0.0) break;
      try {
        iterations += bicgstab_core(As, rs, prec, 1e-3, maxiter, delta);
      } catch (const SolverError&) {
        break;
      }
      for (std::size_t i = 0; i < n; ++i) x[i] += scale[i] * delta[i];
    }
    if (bnorm > 0 && res > tol * 1.01)
      throw SolverError("solve: refinement stalled at relative residual " + std::to_string(res),
                        res);
    return res;
  };

  std::vector<SolverPrecond> order;
  if (precond == SolverPrecond::Auto)
    order = {SolverPrecond::Jacobi, SolverPrecond::Ilu0};
  else
    order = {precond};

  std::vector<double> x;
  int iterations = 0;
  for (std::size_t a = 0; a < order.size(); ++a) {
    try {
      double res = 0.0;
      if (order[a] == SolverPrecond::Jacobi) {
        JacobiPrec jacobi;
        jacobi.dinv.assign(n, 1.0);
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t k = As.row_ptr[r]; k < As.row_ptr[r + 1]; ++k)
            if (As.col[k] == r && As.val[k] != 0.0) jacobi.dinv[r] = 1.0 / As.val[k];
        res = attempt(jacobi, x, iterations);
      } else {
        Ilu0 ilu;
        ilu.factor(As);
        res = attempt(ilu, x, iterations);
      }
      if (stats) {
        stats->iterations = iterations;
        stats->residual = res;
      }
      return x;
    } catch (const SolverError&) {
      if (a + 1 == order.size()) throw;
    }
  }
  throw SolverError("solve: no preconditioner attempt succeeded", 0.0);
}

std::vector<double> solve_dense(const SparseSystem& system) {
  const std::size_t n = system.A.n;
  if (n > 2000) throw std::invalid_argument("solve_dense: reserved for systems below 2000 dofs");
  std::vector<double> M(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = system.A.row_ptr[r]; k < system.A.row_ptr[r + 1]; ++k)
      M[r * n + system.A.col[k]] += system.A.val[k];
  std::vector<double> x = system.b;

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    double best = std::abs(M[perm[c] * n + c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double v = std::abs(M[perm[r] * n + c]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw SolverError("solve_dense: singular matrix", 0.0);
    std::swap(perm[c], perm[piv]);
    const double diag = M[perm[c] * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = M[perm[r] * n + c] / diag;
      if (f == 0.0) continue;
      M[perm[r] * n + c] = 0.0;
      for (std::size_t k = c + 1; k < n; ++k) M[perm[r] * n + k] -= f * M[perm[c] * n + k];
      x[perm[r]] -= f * x[perm[c]];
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = x[perm[ri]];
    for (std::size_t k = ri + 1; k < n; ++k) s -= M[perm[ri] * n + k] * out[k];
    out[ri] = s / M[perm[ri] * n + ri];
  }
  return out;
}

}  // namespace sbm
