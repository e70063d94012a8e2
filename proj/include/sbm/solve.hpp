#pragma once

#include "sbm/assembly.hpp"

namespace sbm {

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // final true relative residual
};

enum class SolverPrecond { Auto, Jacobi, Ilu0 };

/// BiCGSTAB on the diagonally equilibrated system. Auto tries the Jacobi
/// (diagonal) preconditioner first and falls back to ILU(0) when it runs
/// out of iterations; either can be forced. maxiter == 0 selects
/// 50*sqrt(dofs) per attempt. Throws SolverError carrying the final
/// residual when the last attempt breaks down or exhausts its iterations.
std::vector<double> solve(const SparseSystem& system, double tol = 1e-12, int maxiter = 0,
                          SolveStats* stats = nullptr,
                          SolverPrecond precond = SolverPrecond::Auto);

/// Dense LU with partial pivoting; test oracle for systems below 2000 dofs.
std::vector<double> solve_dense(const SparseSystem& system);

/// Deterministic dot product (chunked pairwise reduction), stable across
/// thread counts.
double det_dot(const double* a, const double* b, std::size_t n);

}  // namespace sbm
