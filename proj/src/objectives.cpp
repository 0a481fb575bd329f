#include "slsdp/objectives.hpp"

#include <stdexcept>

namespace slsdp {

namespace {

void check_h2_shapes(const VectorizedSystem& sys, const H2Weights& w) {
  if (w.F.cols() != sys.a_tilde.cols() || w.G.cols() != sys.b_tilde.cols() ||
      w.F.rows() != w.G.rows()) {
    throw std::invalid_argument("penalty matrices do not match system size");
  }
}

void check_lq_shapes(const VectorizedSystem& sys, const LqWeights& w) {
  if (w.Q.rows() != sys.a_tilde.cols() || w.Q.cols() != sys.a_tilde.cols() ||
      w.R.rows() != sys.b_tilde.cols() || w.R.cols() != sys.b_tilde.cols()) {
    throw std::invalid_argument("penalty matrices do not match system size");
  }
}

/// Stationary lambda for min_lambda over u = w_part + h_lambda * lambda of
/// u^T S u + 2 u^T b, then the induced input.
Eigen::VectorXd constrained_first_input(const Eigen::MatrixXd& S,
                                        const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& w_part,
                                        const Eigen::MatrixXd& h_lambda,
                                        const Tolerance& tol) {
  const Eigen::MatrixXd M = h_lambda.transpose() * S * h_lambda;
  const Eigen::VectorXd rhs = -h_lambda.transpose() * (S * w_part + b);
  const Eigen::VectorXd lambda = min_norm_least_squares(M, rhs, tol);
  return w_part + h_lambda * lambda;
}

}  // namespace

H2Weights h2_default_weights(Eigen::Index state_dim, Eigen::Index input_dim) {
  H2Weights w;
  w.F = Eigen::MatrixXd::Zero(state_dim + input_dim, state_dim);
  w.F.topRows(state_dim) =
      Eigen::MatrixXd::Identity(state_dim, state_dim);
  w.G = Eigen::MatrixXd::Zero(state_dim + input_dim, input_dim);
  w.G.bottomRows(input_dim) =
      Eigen::MatrixXd::Identity(input_dim, input_dim);
  return w;
}

H2Weights h2_default_weights(const VectorizedSystem& sys) {
  return h2_default_weights(sys.state_dim(), sys.input_dim());
}

LqWeights lq_default_weights(Eigen::Index state_dim, Eigen::Index input_dim) {
  return LqWeights{Eigen::MatrixXd::Identity(state_dim, state_dim),
                   Eigen::MatrixXd::Identity(input_dim, input_dim)};
}

LqWeights lq_default_weights(const VectorizedSystem& sys) {
  return lq_default_weights(sys.state_dim(), sys.input_dim());
}

GainAndValue h2_gain(const VectorizedSystem& sys, const H2Weights& weights,
                     const Eigen::MatrixXd& h_x,
                     const Eigen::MatrixXd& h_lambda,
                     const QuadForm& value_next, const Tolerance& tol) {
  check_h2_shapes(sys, weights);
  const Eigen::MatrixXd& P = value_next.P;

  // Substituting u = h_x x + h_lambda lambda turns the Bellman objective
  // into an unconstrained quadratic in lambda.
  const Eigen::MatrixXd a_cl = sys.a_tilde + sys.b_tilde * h_x;
  const Eigen::MatrixXd b_lam = sys.b_tilde * h_lambda;
  const Eigen::MatrixXd f_cl = weights.F + weights.G * h_x;
  const Eigen::MatrixXd g_lam = weights.G * h_lambda;

  const Eigen::MatrixXd lhs =
      g_lam.transpose() * g_lam + b_lam.transpose() * P * b_lam;
  const Eigen::MatrixXd rhs =
      g_lam.transpose() * f_cl + b_lam.transpose() * P * a_cl;
  const Eigen::MatrixXd L = min_norm_least_squares(lhs, -rhs, tol);

  GainAndValue out;
  out.K = h_x + h_lambda * L;
  const Eigen::MatrixXd fk = weights.F + weights.G * out.K;
  const Eigen::MatrixXd ak = sys.a_tilde + sys.b_tilde * out.K;
  out.value.P = fk.transpose() * fk + ak.transpose() * P * ak;
  out.value.symmetrize();
  return out;
}

Eigen::VectorXd h2_initial_control(const VectorizedSystem& sys,
                                   const H2Weights& weights,
                                   const Eigen::VectorXd& w_part,
                                   const Eigen::MatrixXd& h_lambda,
                                   const QuadForm& value_next,
                                   const Tolerance& tol) {
  check_h2_shapes(sys, weights);
  const Eigen::Index dxx = sys.nx * sys.nx;
  const Eigen::Index q = sys.state_dim() - dxx;

  // x[1] = [vec(I); b0 u], so only the trailing blocks of the value enter.
  const Eigen::MatrixXd p21 = value_next.P.block(dxx, 0, q, dxx);
  const Eigen::MatrixXd p22 = value_next.P.block(dxx, dxx, q, q);
  const Eigen::VectorXd vec_i =
      vec(Eigen::MatrixXd::Identity(sys.nx, sys.nx));

  const Eigen::MatrixXd S = weights.G.transpose() * weights.G +
                            sys.b0.transpose() * p22 * sys.b0;
  const Eigen::VectorXd b = sys.b0.transpose() * (p21 * vec_i);
  return constrained_first_input(S, b, w_part, h_lambda, tol);
}

GainAndValue lq_gain(const VectorizedSystem& sys, const LqWeights& weights,
                     const Eigen::MatrixXd& h_x,
                     const Eigen::MatrixXd& h_lambda,
                     const QuadForm& value_next, const Tolerance& tol) {
  check_lq_shapes(sys, weights);
  const Eigen::MatrixXd& V = value_next.P;

  const Eigen::MatrixXd b_lam = sys.b_tilde * h_lambda;
  const Eigen::MatrixXd lhs = h_lambda.transpose() * weights.R * h_lambda +
                              b_lam.transpose() * V * b_lam;
  const Eigen::MatrixXd rhs =
      h_lambda.transpose() * weights.R * h_x +
      b_lam.transpose() * V * (sys.a_tilde + sys.b_tilde * h_x);
  const Eigen::MatrixXd L = min_norm_least_squares(lhs, rhs, tol);

  GainAndValue out;
  out.K = h_x - h_lambda * L;
  const Eigen::MatrixXd ak = sys.a_tilde + sys.b_tilde * out.K;
  out.value.P = weights.Q + out.K.transpose() * weights.R * out.K +
                ak.transpose() * V * ak;
  out.value.symmetrize();
  return out;
}

GainAndValue lq_terminal(const VectorizedSystem& sys, const LqWeights& weights,
                         const Eigen::MatrixXd& h_x,
                         const Eigen::MatrixXd& h_lambda,
                         const Tolerance& tol) {
  return lq_gain(sys, weights, h_x, h_lambda,
                 QuadForm::zero(sys.a_tilde.cols()), tol);
}

Eigen::VectorXd lq_initial_control(const VectorizedSystem& sys,
                                   const LqWeights& weights,
                                   const Eigen::VectorXd& w_part,
                                   const Eigen::MatrixXd& h_lambda,
                                   const QuadForm& value_next,
                                   const Tolerance& tol) {
  check_lq_shapes(sys, weights);
  const Eigen::Index dxx = sys.nx * sys.nx;
  const Eigen::Index q = sys.state_dim() - dxx;

  const Eigen::MatrixXd v21 = value_next.P.block(dxx, 0, q, dxx);
  const Eigen::MatrixXd v22 = value_next.P.block(dxx, dxx, q, q);
  const Eigen::VectorXd vec_i =
      vec(Eigen::MatrixXd::Identity(sys.nx, sys.nx));

  const Eigen::MatrixXd S =
      weights.R + sys.b0.transpose() * v22 * sys.b0;
  const Eigen::VectorXd b = sys.b0.transpose() * (v21 * vec_i);
  return constrained_first_input(S, b, w_part, h_lambda, tol);
}

GainAndValue H2Objective::gain(const VectorizedSystem& sys,
                               const Eigen::MatrixXd& h_x,
                               const Eigen::MatrixXd& h_lambda,
                               const QuadForm& value_next,
                               const Tolerance& tol) const {
  return h2_gain(sys, weights_, h_x, h_lambda, value_next, tol);
}

Eigen::VectorXd H2Objective::initial_control(const VectorizedSystem& sys,
                                             const Eigen::VectorXd& w_part,
                                             const Eigen::MatrixXd& h_lambda,
                                             const QuadForm& value_next,
                                             const Tolerance& tol) const {
  return h2_initial_control(sys, weights_, w_part, h_lambda, value_next, tol);
}

StepCostQuadratic H2Objective::step_quadratic(
    const VectorizedSystem& sys) const {
  check_h2_shapes(sys, weights_);
  return StepCostQuadratic{weights_.F.transpose() * weights_.F,
                           weights_.F.transpose() * weights_.G,
                           weights_.G.transpose() * weights_.G};
}

GainAndValue LqObjective::gain(const VectorizedSystem& sys,
                               const Eigen::MatrixXd& h_x,
                               const Eigen::MatrixXd& h_lambda,
                               const QuadForm& value_next,
                               const Tolerance& tol) const {
  return lq_gain(sys, weights_, h_x, h_lambda, value_next, tol);
}

Eigen::VectorXd LqObjective::initial_control(const VectorizedSystem& sys,
                                             const Eigen::VectorXd& w_part,
                                             const Eigen::MatrixXd& h_lambda,
                                             const QuadForm& value_next,
                                             const Tolerance& tol) const {
  return lq_initial_control(sys, weights_, w_part, h_lambda, value_next, tol);
}

StepCostQuadratic LqObjective::step_quadratic(
    const VectorizedSystem& sys) const {
  check_lq_shapes(sys, weights_);
  return StepCostQuadratic{
      weights_.Q,
      Eigen::MatrixXd::Zero(sys.state_dim(), sys.input_dim()), weights_.R};
}

}  // namespace slsdp
