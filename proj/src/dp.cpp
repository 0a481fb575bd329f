#include "slsdp/dp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace slsdp {

namespace {

void check_cert_width(const NullCert& cert, const VectorizedSystem& sys) {
  if (cert.psi_x.cols() != sys.a_tilde.cols()) {
    throw std::invalid_argument("certificate width does not match the system");
  }
}

}  // namespace

BackwardStep backward_step_stable(const NullCert& cert_next,
                                  const VectorizedSystem& sys,
                                  const Tolerance& tol) {
  check_cert_width(cert_next, sys);
  const Eigen::MatrixXd gamma_a = cert_next.psi_x * sys.a_tilde;
  const Eigen::MatrixXd gamma_b = cert_next.psi_x * sys.b_tilde;

  // The certificate rows are unit-norm, so a real coupling with the input
  // shows up at the scale of the input map; anything far below that is
  // rounding noise from the product and must not enter the rank decision.
  const double b_scale = sys.b_tilde.norm();

  BackwardStep out;
  out.admissible.h_x = min_norm_least_squares(gamma_b, -gamma_a, tol, b_scale);
  out.admissible.h_lambda = null_space_basis(gamma_b, tol, b_scale);

  // Directions of gamma_a not reachable through gamma_b stay constrained,
  // and the coupling rows apply at every step.
  Eigen::MatrixXd stacked(gamma_a.rows() + sys.a_eq.rows(),
                          sys.a_tilde.cols());
  stacked << gamma_b * out.admissible.h_x + gamma_a, sys.a_eq;
  out.cert.psi_x = normalize_nonzero_rows(stacked, tol);
  return out;
}

BackwardStep backward_step_pinv(const NullCert& cert_next,
                                const VectorizedSystem& sys,
                                const Tolerance& tol) {
  check_cert_width(cert_next, sys);
  const Eigen::Index n_x = sys.a_tilde.rows();
  const Eigen::Index n_u = sys.b_tilde.cols();

  const Eigen::MatrixXd xi = null_space_basis(cert_next.psi_x, tol);
  Eigen::MatrixXd gamma(n_x, n_u + xi.cols());
  gamma << -sys.b_tilde, xi;
  const Eigen::MatrixXd gamma_pinv = pseudo_inverse(gamma, tol, 1.0);

  BackwardStep out;
  out.admissible.h_x = (gamma_pinv * sys.a_tilde).topRows(n_u);
  const Eigen::MatrixXd resid_proj =
      Eigen::MatrixXd::Identity(gamma.cols(), gamma.cols()) -
      gamma_pinv * gamma;
  // resid_proj is an orthogonal projector, so unit scale decides its rank.
  out.admissible.h_lambda =
      column_space_basis(resid_proj.topRows(n_u), tol, 1.0);

  Eigen::MatrixXd stacked(n_x + sys.a_eq.rows(), n_x);
  stacked << (gamma * gamma_pinv - Eigen::MatrixXd::Identity(n_x, n_x)) *
                 sys.a_tilde,
      sys.a_eq;
  out.cert.psi_x = normalize_nonzero_rows(stacked, tol);
  return out;
}

InitialSet initial_step(const NullCert& cert1, const VectorizedSystem& sys,
                        const Tolerance& tol) {
  check_cert_width(cert1, sys);
  const Eigen::Index dxx = sys.nx * sys.nx;
  const Eigen::MatrixXd psi1 = cert1.psi_x.leftCols(dxx);
  const Eigen::MatrixXd psi2 =
      cert1.psi_x.rightCols(sys.state_dim() - dxx);

  const Eigen::VectorXd pinned =
      psi1 * vec(Eigen::MatrixXd::Identity(sys.nx, sys.nx));
  const Eigen::MatrixXd gamma = psi2 * sys.b0;
  const double b0_scale = sys.b0.norm();

  InitialSet out;
  out.w = min_norm_least_squares(gamma, -pinned, tol, b0_scale);
  out.h_lambda = null_space_basis(gamma, tol, b0_scale);
  out.residual = (gamma * out.w + pinned).norm();

  // Certificates reaching this point carry roundoff from every backward
  // step that built them, so the feasibility gate scales with the row
  // count. A genuinely unreachable pinned block shows up orders of
  // magnitude above this: its residual is set by vec(I), not by noise.
  const double noise_rows = static_cast<double>(cert1.psi_x.rows());
  const double vec_i_norm = std::sqrt(static_cast<double>(sys.nx));
  const double allowed =
      tol.residual_tol * (1.0 + pinned.norm() + vec_i_norm) *
      (1.0 + noise_rows);
  if (out.residual > allowed) {
    std::ostringstream msg;
    msg << "no first input can satisfy the certificate on x[1]: residual "
        << out.residual << " exceeds " << allowed;
    throw InfeasibleError(msg.str());
  }
  return out;
}

namespace {

/// Shared backward/forward pipeline. Steps down to constrained_floor use
/// the certified admissible sets; steps below it use unconstrained gains.
/// constrained_floor = 1 is the exact recursion.
SolveResult run_pipeline(const Plant& plant, const CostToGoModel& objective,
                         Eigen::Index horizon, Eigen::Index constrained_floor,
                         const SolveOptions& options) {
  if (horizon < 2) {
    throw std::invalid_argument("horizon must be at least 2");
  }
  const VectorizedSystem sys = build_vectorized(plant);
  const Eigen::Index n_x = sys.state_dim();
  const Eigen::Index n_u = sys.input_dim();
  const Eigen::Index t_end = horizon;
  const StepCostQuadratic step_cost = objective.step_quadratic(sys);

  const bool keep = options.keep_diagnostics;
  SolveDiagnostics diag;
  if (keep) {
    diag.certs.assign(static_cast<std::size_t>(t_end) + 2,
                      NullCert{Eigen::MatrixXd(0, n_x)});
    diag.sets.resize(static_cast<std::size_t>(t_end) + 1);
    diag.values.assign(static_cast<std::size_t>(t_end) + 2,
                       QuadForm::zero(n_x));
  }

  NullCert cert{Eigen::MatrixXd::Identity(n_x, n_x)};
  QuadForm value = QuadForm::zero(n_x);
  if (keep) {
    diag.certs[static_cast<std::size_t>(t_end) + 1] = cert;
  }

  std::vector<Eigen::MatrixXd> gains(static_cast<std::size_t>(t_end) + 1);

  for (Eigen::Index tau = t_end; tau >= constrained_floor; --tau) {
    const BackwardStep step =
        options.use_pinv_steps ? backward_step_pinv(cert, sys, options.tol)
                               : backward_step_stable(cert, sys, options.tol);
    const GainAndValue gv =
        objective.gain(sys, step.admissible.h_x, step.admissible.h_lambda,
                       value, options.tol);
    gains[static_cast<std::size_t>(tau)] = gv.K;
    value = gv.value;
    cert = step.cert;
    if (keep) {
      const auto t = static_cast<std::size_t>(tau);
      diag.certs[t] = cert;
      diag.sets[t] = step.admissible;
      diag.values[t] = value;
    }
  }

  const Eigen::MatrixXd h_x_free = Eigen::MatrixXd::Zero(n_u, n_x);
  const Eigen::MatrixXd h_lambda_free = Eigen::MatrixXd::Identity(n_u, n_u);
  for (Eigen::Index tau = constrained_floor - 1; tau >= 1; --tau) {
    const GainAndValue gv =
        objective.gain(sys, h_x_free, h_lambda_free, value, options.tol);
    gains[static_cast<std::size_t>(tau)] = gv.K;
    value = gv.value;
    if (keep) {
      const auto t = static_cast<std::size_t>(tau);
      diag.sets[t] = AdmissibleSet{h_x_free, h_lambda_free};
      diag.values[t] = value;
    }
  }

  // cert now guards the first state (for the exact recursion it is the
  // step-1 certificate; approximately, the allowance-step one stands in).
  const InitialSet init = initial_step(cert, sys, options.tol);
  const Eigen::VectorXd u0 =
      objective.initial_control(sys, init.w, init.h_lambda, value,
                                options.tol);

  std::vector<Eigen::VectorXd> x(static_cast<std::size_t>(t_end) + 2);
  std::vector<Eigen::VectorXd> u(static_cast<std::size_t>(t_end) + 1);
  x[0] = Eigen::VectorXd::Zero(n_x);
  u[0] = u0;
  x[1].resize(n_x);
  x[1] << vec(Eigen::MatrixXd::Identity(sys.nx, sys.nx)), sys.b0 * u0;

  double objective_value = step_cost(x[0], u[0]);
  for (Eigen::Index tau = 1; tau <= t_end; ++tau) {
    const auto t = static_cast<std::size_t>(tau);
    u[t] = gains[t] * x[t];
    objective_value += step_cost(x[t], u[t]);
    x[t + 1] = sys.a_tilde * x[t] + sys.b_tilde * u[t];
  }

  SolveResult out;
  out.objective = objective_value;
  out.termination_residual = x[static_cast<std::size_t>(t_end) + 1].norm();
  out.gains = std::move(gains);

  const Eigen::Index dxx = sys.nx * sys.nx;
  const Eigen::Index dxy = sys.nx * sys.ny;
  const Eigen::Index dux = sys.nu * sys.nx;
  out.response = SystemResponse::zero(plant, t_end);
  out.response.phi_uy[0] = unvec(u0, sys.nu, sys.ny);
  for (Eigen::Index tau = 1; tau <= t_end; ++tau) {
    const auto t = static_cast<std::size_t>(tau);
    out.response.phi_xx[t] = unvec(x[t].head(dxx), sys.nx, sys.nx);
    out.response.phi_xy[t] = unvec(x[t].segment(dxx, dxy), sys.nx, sys.ny);
    out.response.phi_ux[t] = unvec(x[t].segment(dxx + dxy, dux), sys.nu,
                                   sys.nx);
    out.response.phi_uy[t] = unvec(u[t], sys.nu, sys.ny);
  }

  if (keep) {
    diag.initial = init;
    diag.states = std::move(x);
    diag.inputs = std::move(u);
    out.diagnostics = std::move(diag);
  }
  return out;
}

}  // namespace

SolveResult solve(const Plant& plant, const CostToGoModel& objective,
                  Eigen::Index horizon, const SolveOptions& options) {
  return run_pipeline(plant, objective, horizon, 1, options);
}

SolveResult solve_approx(const Plant& plant, const CostToGoModel& objective,
                         Eigen::Index horizon, Eigen::Index allowance,
                         const SolveOptions& options) {
  if (allowance < 1 || allowance > horizon) {
    throw std::invalid_argument("allowance must lie in [1, horizon]");
  }
  return run_pipeline(plant, objective, horizon, allowance, options);
}

}  // namespace slsdp
