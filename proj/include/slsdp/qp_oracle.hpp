#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "slsdp/dp.hpp"
#include "slsdp/model.hpp"
#include "slsdp/objectives.hpp"

namespace slsdp {

/// The quadratic objective decreases without bound along a feasible ray.
class UnboundedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One equality-constrained QP over the stacked trajectory
/// z = [u[0], x^[1], u[1], x[2], u[2], ..., x[T], u[T]], where x^[1] is
/// the free tail of x[1] (its leading block is pinned to vec(I) and
/// substituted out). Minimizes (1/2) z^T H z + f^T z + constant subject to
/// E z = e; the quadratic data is scaled so the optimal value equals the
/// summed per-step cost.
struct StackedProgram {
  Eigen::SparseMatrix<double> H;  // N x N
  Eigen::VectorXd f;              // N
  Eigen::SparseMatrix<double> E;  // M x N
  Eigen::VectorXd e;              // M
  double constant = 0.0;

  VectorizedSystem sys;
  Eigen::Index horizon = 0;

  Eigen::Index num_vars() const { return H.rows(); }
  Eigen::Index num_equalities() const { return E.rows(); }

  /// Offset of u[tau] within z, tau = 0..T.
  Eigen::Index u_offset(Eigen::Index tau) const;
  /// Offset of x[tau] within z, tau = 1..T. For tau = 1 this addresses the
  /// free tail (length state_dim - nx^2); otherwise the full state.
  Eigen::Index x_offset(Eigen::Index tau) const;

  /// Stacks a response into the decision-variable layout (for residual
  /// checks and cross-module tests).
  Eigen::VectorXd stack(const SystemResponse& resp) const;
};

/// Result of the KKT solve, including the achieved optimality residuals.
struct QpSolution {
  SystemResponse response;
  double objective = 0.0;
  double equality_residual = 0.0;
  double stationarity_residual = 0.0;
};

/// Builds the stacked program realizing the same FIR synthesis problem the
/// recursion solves: per-step dynamics, the coupling rows at every step,
/// the pinned first state, and the beyond-horizon boundary condition.
StackedProgram assemble(const Plant& plant, const CostToGoModel& objective,
                        Eigen::Index horizon);

/// Solves the saddle-point system [H, E^T; E, 0] [z; nu] = [-f; e].
/// A sparse LU factorization is tried first; if it fails or leaves a large
/// residual, redundant equality rows are removed at the rank threshold and
/// a dense rank-revealing factorization takes over. Throws InfeasibleError
/// when the equalities are inconsistent and UnboundedError when the
/// objective is singular along feasible directions.
QpSolution solve_kkt(const StackedProgram& prog, const Tolerance& tol = {});

}  // namespace slsdp
