#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "slsdp/linalg.hpp"

namespace slsdp {

/// State-space plant x[t+1] = A x[t] + B u[t], y[t] = C x[t].
/// Feedthrough is structurally zero; there is no D member.
struct Plant {
  Eigen::MatrixXd A;  // nx x nx
  Eigen::MatrixXd B;  // nx x nu
  Eigen::MatrixXd C;  // ny x nx

  Plant(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c);

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return B.cols(); }
  Eigen::Index ny() const { return C.rows(); }
};

/// FIR closed-loop response over horizon T. Each block holds spectral
/// components for tau = 0..T; phi_uy is the only block with a nonzero
/// tau = 0 term.
struct SystemResponse {
  Eigen::Index horizon = 0;
  std::vector<Eigen::MatrixXd> phi_xx;  // nx x nx each
  std::vector<Eigen::MatrixXd> phi_xy;  // nx x ny
  std::vector<Eigen::MatrixXd> phi_ux;  // nu x nx
  std::vector<Eigen::MatrixXd> phi_uy;  // nu x ny

  /// All-zero response of matching dimensions.
  static SystemResponse zero(const Plant& plant, Eigen::Index horizon);
  static SystemResponse zero(Eigen::Index nx, Eigen::Index nu, Eigen::Index ny,
                             Eigen::Index horizon);
};

/// Vectorized reformulation of the FIR constraints, acting on the stacked
/// state x = [vec(phi_xx); vec(phi_xy); vec(phi_ux)] and input
/// u = vec(phi_uy).
struct VectorizedSystem {
  Eigen::MatrixXd a_tilde;  // n_x x n_x
  Eigen::MatrixXd b_tilde;  // n_x x n_u
  Eigen::MatrixXd a_eq;     // nx^2 x n_x
  Eigen::MatrixXd b0;       // (nx*ny + nu*nx) x n_u
  Eigen::Index nx = 0, nu = 0, ny = 0;

  Eigen::Index state_dim() const { return nx * nx + nx * ny + nu * nx; }
  Eigen::Index input_dim() const { return nu * ny; }
};

/// Frobenius residuals of every FIR constraint for a candidate response.
struct ResidualReport {
  std::vector<double> dynamics;    // tau = 1..T-1, stacked three-block norm
  std::vector<double> transition;  // tau = 1..T
  // ||phi_xx[0]||, ||phi_xy[0]||, ||phi_ux[0]||,
  // ||phi_xx[1] - I||, ||phi_xy[1] - B phi_uy[0]||, ||phi_ux[1] - phi_uy[0] C||
  std::array<double, 6> initial{};
  double termination = 0.0;

  double max_residual() const;
};

/// Builds the Kronecker-block matrices realizing the FIR constraints.
VectorizedSystem build_vectorized(const Plant& plant);

/// Tridiagonal row-stochastic chain with mixing rate alpha in (0, 1),
/// B = [I_nu; 0] and C = [I_ny, 0].
Plant stochastic_chain(Eigen::Index nx, Eigen::Index nu, Eigen::Index ny,
                       double alpha);

/// Evaluates the matrix-form FIR constraints on a candidate response.
ResidualReport verify_response(const Plant& plant, const SystemResponse& resp);

/// Stacked state vector [vec(phi_xx[tau]); vec(phi_xy[tau]); vec(phi_ux[tau])].
Eigen::VectorXd stack_state(const SystemResponse& resp, Eigen::Index tau);

}  // namespace slsdp
