#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "slsdp/linalg.hpp"
#include "slsdp/model.hpp"
#include "slsdp/objectives.hpp"

namespace slsdp {

/// The synthesis problem admits no response for this plant and horizon.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Affine family u = H_x x + H_lambda lambda of inputs that keep the next
/// state inside its certified null space. H_lambda has orthonormal columns
/// and may have none at all when the feasible input is unique.
struct AdmissibleSet {
  Eigen::MatrixXd h_x;       // n_u x n_x
  Eigen::MatrixXd h_lambda;  // n_u x k
};

/// Certificate that viable states at a step satisfy psi_x * x = 0.
/// Rows have unit norm; zero rows means the whole space is viable.
struct NullCert {
  Eigen::MatrixXd psi_x;  // r x n_x
};

/// Admissible inputs and the propagated certificate for one recursion step.
struct BackwardStep {
  AdmissibleSet admissible;
  NullCert cert;
};

/// First-input family u[0] = w + H_lambda lambda consistent with the
/// pinned identity block of x[1].
struct InitialSet {
  Eigen::VectorXd w;
  Eigen::MatrixXd h_lambda;  // n_u x k
  double residual = 0.0;     // achieved equation residual for w
};

/// One recursion step in least-squares form: the admissible set comes from
/// a minimum-norm solve and a null-space basis of psi_next * b_tilde, and
/// the new certificate stacks the unresolved directions with the coupling
/// rows, normalized row-wise.
BackwardStep backward_step_stable(const NullCert& cert_next,
                                  const VectorizedSystem& sys,
                                  const Tolerance& tol = {});

/// Reference form of the same step built from an explicit pseudo-inverse of
/// [-b_tilde, basis(null(psi_next))]. Kept as a cross-check; the
/// least-squares form is what the solver uses.
BackwardStep backward_step_pinv(const NullCert& cert_next,
                                const VectorizedSystem& sys,
                                const Tolerance& tol = {});

/// Solves for the first-input family given the certificate that x[1] must
/// satisfy. Throws InfeasibleError when no input can place x[1] (whose
/// leading block is pinned to vec(I)) inside the certified null space.
InitialSet initial_step(const NullCert& cert1, const VectorizedSystem& sys,
                        const Tolerance& tol = {});

struct SolveOptions {
  Tolerance tol;
  /// Retain certificates, admissible sets, values, and the trajectory.
  bool keep_diagnostics = false;
  /// Use backward_step_pinv in place of backward_step_stable.
  bool use_pinv_steps = false;
};

/// Per-step byproducts of a solve, indexed by time step where applicable
/// (index 0 of certs/sets/values is unused; states run 0..T+1, inputs 0..T).
struct SolveDiagnostics {
  std::vector<NullCert> certs;          // certs[tau], tau = 1..T+1
  std::vector<AdmissibleSet> sets;      // sets[tau], tau = 1..T
  std::vector<QuadForm> values;         // values[tau], tau = 1..T+1
  InitialSet initial;
  std::vector<Eigen::VectorXd> states;  // states[tau], tau = 0..T+1
  std::vector<Eigen::VectorXd> inputs;  // inputs[tau], tau = 0..T
};

struct SolveResult {
  SystemResponse response;
  double objective = 0.0;
  /// Norm of the state one step past the horizon; zero iff the response
  /// is exactly FIR at length T.
  double termination_residual = 0.0;
  std::vector<Eigen::MatrixXd> gains;  // gains[tau], tau = 1..T (0 unused)
  std::optional<SolveDiagnostics> diagnostics;
};

/// Full two-stage recursion: backward certificate/gain sweep, first-input
/// solve, forward rollout. Throws InfeasibleError when the horizon cannot
/// realize an FIR response for the plant.
SolveResult solve(const Plant& plant, const CostToGoModel& objective,
                  Eigen::Index horizon, const SolveOptions& options = {});

/// Approximate variant: certificates and constrained gains are computed
/// only for steps allowance..T; earlier steps use unconstrained gains and
/// the certificate at the allowance step doubles as the one for x[1].
/// The termination residual is reported, not enforced. allowance = 1
/// coincides with solve.
SolveResult solve_approx(const Plant& plant, const CostToGoModel& objective,
                         Eigen::Index horizon, Eigen::Index allowance,
                         const SolveOptions& options = {});

}  // namespace slsdp
