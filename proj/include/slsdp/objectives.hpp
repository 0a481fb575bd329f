#pragma once

#include <memory>

#include <Eigen/Dense>

#include "slsdp/linalg.hpp"
#include "slsdp/model.hpp"

namespace slsdp {

/// Symmetric positive-semidefinite quadratic form x^T P x.
struct QuadForm {
  Eigen::MatrixXd P;

  static QuadForm zero(Eigen::Index n) {
    return QuadForm{Eigen::MatrixXd::Zero(n, n)};
  }

  double operator()(const Eigen::VectorXd& x) const { return x.dot(P * x); }

  /// Clears the asymmetric part that accumulates from floating-point updates.
  void symmetrize() { P = 0.5 * (P + P.transpose()).eval(); }
};

/// Per-step penalty ||F x + G u||^2.
struct H2Weights {
  Eigen::MatrixXd F;  // m x n_x
  Eigen::MatrixXd G;  // m x n_u
};

/// Per-step penalty x^T Q x + u^T R u.
struct LqWeights {
  Eigen::MatrixXd Q;  // n_x x n_x
  Eigen::MatrixXd R;  // n_u x n_u
};

/// F = [I; 0], G = [0; I]: penalizes ||x||^2 + ||u||^2.
H2Weights h2_default_weights(Eigen::Index state_dim, Eigen::Index input_dim);
H2Weights h2_default_weights(const VectorizedSystem& sys);

/// Q = I, R = I.
LqWeights lq_default_weights(Eigen::Index state_dim, Eigen::Index input_dim);
LqWeights lq_default_weights(const VectorizedSystem& sys);

/// Feedback gain u = K x together with the induced cost-to-go.
struct GainAndValue {
  Eigen::MatrixXd K;  // n_u x n_x
  QuadForm value;     // n_x x n_x
};

/// Coefficients of h(x, u) = x^T xx x + 2 x^T xu u + u^T uu u.
struct StepCostQuadratic {
  Eigen::MatrixXd xx;
  Eigen::MatrixXd xu;
  Eigen::MatrixXd uu;

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return x.dot(xx * x) + 2.0 * x.dot(xu * u) + u.dot(uu * u);
  }
};

/// Minimizes ||F x + G u||^2 + (A x + B u)^T P (A x + B u) over the
/// admissible inputs u = h_x x + h_lambda * lambda, returning the optimal
/// gain and the resulting value function.
GainAndValue h2_gain(const VectorizedSystem& sys, const H2Weights& weights,
                     const Eigen::MatrixXd& h_x,
                     const Eigen::MatrixXd& h_lambda,
                     const QuadForm& value_next,
                     const Tolerance& tol = Tolerance{});

/// Minimizes ||G u||^2 + x1^T P x1 over u = w_part + h_lambda * lambda,
/// where x1 = [vec(I); b0 u]. Returns the optimal first input.
Eigen::VectorXd h2_initial_control(const VectorizedSystem& sys,
                                   const H2Weights& weights,
                                   const Eigen::VectorXd& w_part,
                                   const Eigen::MatrixXd& h_lambda,
                                   const QuadForm& value_next,
                                   const Tolerance& tol = Tolerance{});

/// LQ analogue of h2_gain for the penalty x^T Q x + u^T R u.
GainAndValue lq_gain(const VectorizedSystem& sys, const LqWeights& weights,
                     const Eigen::MatrixXd& h_x,
                     const Eigen::MatrixXd& h_lambda,
                     const QuadForm& value_next,
                     const Tolerance& tol = Tolerance{});

/// Value of the final step, where no cost accrues beyond it. Coincides with
/// lq_gain evaluated at a zero downstream value.
GainAndValue lq_terminal(const VectorizedSystem& sys, const LqWeights& weights,
                         const Eigen::MatrixXd& h_x,
                         const Eigen::MatrixXd& h_lambda,
                         const Tolerance& tol = Tolerance{});

/// LQ analogue of h2_initial_control.
Eigen::VectorXd lq_initial_control(const VectorizedSystem& sys,
                                   const LqWeights& weights,
                                   const Eigen::VectorXd& w_part,
                                   const Eigen::MatrixXd& h_lambda,
                                   const QuadForm& value_next,
                                   const Tolerance& tol = Tolerance{});

/// Uniform view of an objective for the solver: Bellman-step gain, first
/// input, and the per-step quadratic used to price a trajectory.
class CostToGoModel {
 public:
  virtual ~CostToGoModel() = default;

  virtual GainAndValue gain(const VectorizedSystem& sys,
                            const Eigen::MatrixXd& h_x,
                            const Eigen::MatrixXd& h_lambda,
                            const QuadForm& value_next,
                            const Tolerance& tol) const = 0;

  virtual Eigen::VectorXd initial_control(const VectorizedSystem& sys,
                                          const Eigen::VectorXd& w_part,
                                          const Eigen::MatrixXd& h_lambda,
                                          const QuadForm& value_next,
                                          const Tolerance& tol) const = 0;

  virtual StepCostQuadratic step_quadratic(
      const VectorizedSystem& sys) const = 0;
};

class H2Objective final : public CostToGoModel {
 public:
  explicit H2Objective(H2Weights weights) : weights_(std::move(weights)) {}

  GainAndValue gain(const VectorizedSystem& sys, const Eigen::MatrixXd& h_x,
                    const Eigen::MatrixXd& h_lambda,
                    const QuadForm& value_next,
                    const Tolerance& tol) const override;

  Eigen::VectorXd initial_control(const VectorizedSystem& sys,
                                  const Eigen::VectorXd& w_part,
                                  const Eigen::MatrixXd& h_lambda,
                                  const QuadForm& value_next,
                                  const Tolerance& tol) const override;

  StepCostQuadratic step_quadratic(const VectorizedSystem& sys) const override;

  const H2Weights& weights() const { return weights_; }

 private:
  H2Weights weights_;
};

class LqObjective final : public CostToGoModel {
 public:
  explicit LqObjective(LqWeights weights) : weights_(std::move(weights)) {}

  GainAndValue gain(const VectorizedSystem& sys, const Eigen::MatrixXd& h_x,
                    const Eigen::MatrixXd& h_lambda,
                    const QuadForm& value_next,
                    const Tolerance& tol) const override;

  Eigen::VectorXd initial_control(const VectorizedSystem& sys,
                                  const Eigen::VectorXd& w_part,
                                  const Eigen::MatrixXd& h_lambda,
                                  const QuadForm& value_next,
                                  const Tolerance& tol) const override;

  StepCostQuadratic step_quadratic(const VectorizedSystem& sys) const override;

  const LqWeights& weights() const { return weights_; }

 private:
  LqWeights weights_;
};

}  // namespace slsdp
