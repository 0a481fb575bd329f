#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "slsdp/dp.hpp"
#include "slsdp/linalg.hpp"
#include "slsdp/model.hpp"
#include "slsdp/objectives.hpp"
#include "test_support.hpp"

using namespace slsdp;
using testsup::random_matrix;
using testsup::random_plant;
using testsup::random_vector;
using testsup::subspace_gap;

namespace {

Plant scalar_plant() {
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1);
  a << 0.5;
  b << 1.0;
  c << 1.0;
  return Plant(a, b, c);
}

}  // namespace

TEST_CASE("one backward step from the identity certificate, worked by hand") {
  const VectorizedSystem sys = build_vectorized(scalar_plant());
  const NullCert top{Eigen::MatrixXd::Identity(3, 3)};
  const BackwardStep step = backward_step_stable(top, sys);

  Eigen::MatrixXd h_x_expected(1, 3);
  h_x_expected << 0.0, -0.25, -0.25;
  CHECK((step.admissible.h_x - h_x_expected).norm() <= 1e-14);
  CHECK(step.admissible.h_lambda.rows() == 1);
  CHECK(step.admissible.h_lambda.cols() == 0);

  const Eigen::MatrixXd& psi = step.cert.psi_x;
  REQUIRE(psi.rows() == 4);
  REQUIRE(psi.cols() == 3);
  const double s = 0.7071067811865475;
  Eigen::MatrixXd expected(4, 3);
  expected << 0.4472135954999579, 0.8944271909999159, 0.0,  //
      0.0, s, -s,                                           //
      0.0, -s, s,                                           //
      0.0, -s, s;
  CHECK((psi - expected).norm() <= 1e-14);
}

TEST_CASE("empty certificate gives the whole input space") {
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1);
  a << 0.5;
  b << 0.0;
  c << 0.0;
  const VectorizedSystem sys = build_vectorized(Plant(a, b, c));
  const NullCert none{Eigen::MatrixXd(0, 3)};
  const BackwardStep step = backward_step_stable(none, sys);

  CHECK(step.admissible.h_x.rows() == 1);
  CHECK(step.admissible.h_x.cols() == 3);
  CHECK(step.admissible.h_x.norm() == 0.0);
  CHECK(step.admissible.h_lambda.isIdentity(0.0));
  CHECK(step.cert.psi_x.rows() == 0);
  CHECK(step.cert.psi_x.cols() == 3);
}

TEST_CASE("projector step with an invertible input map pins the gain") {
  std::mt19937 rng(7);
  VectorizedSystem sys;
  sys.nx = 1;
  sys.nu = 1;
  sys.ny = 1;
  sys.a_tilde = random_matrix(rng, 2, 2);
  Eigen::MatrixXd b(2, 2);
  do {
    b = random_matrix(rng, 2, 2);
  } while (std::abs(b.determinant()) < 0.1);
  sys.b_tilde = b;
  sys.a_eq = Eigen::MatrixXd(0, 2);
  sys.b0 = b.bottomRows(1);

  const NullCert top{Eigen::MatrixXd::Identity(2, 2)};
  const BackwardStep step = backward_step_pinv(top, sys);
  const Eigen::MatrixXd expected = -b.inverse() * sys.a_tilde;
  CHECK((step.admissible.h_x - expected).norm() <=
        1e-10 * (1.0 + expected.norm()));
  CHECK(step.admissible.h_lambda.cols() == 0);
  CHECK(step.cert.psi_x.rows() == 0);
}

TEST_CASE("both step constructions give the same admissible sets") {
  std::mt19937 rng(11);
  const Tolerance tol;
  for (int trial = 0; trial < 50; ++trial) {
    const Plant plant = random_plant(rng, 3);
    const VectorizedSystem sys = build_vectorized(plant);
    const Eigen::Index n_x = sys.state_dim();
    std::uniform_int_distribution<int> horizon_dist(2, 5);
    const int horizon = horizon_dist(rng);

    NullCert cert{Eigen::MatrixXd::Identity(n_x, n_x)};
    for (int tau = horizon; tau >= 1; --tau) {
      const BackwardStep stable = backward_step_stable(cert, sys, tol);
      const BackwardStep proj = backward_step_pinv(cert, sys, tol);

      CHECK(subspace_gap(stable.admissible.h_lambda,
                         proj.admissible.h_lambda) <= 1e-7);
      CHECK(subspace_gap(null_space_basis(stable.cert.psi_x),
                         null_space_basis(proj.cert.psi_x)) <= 1e-7);

      // on certified states the particular solutions may differ only along
      // the free directions
      const Eigen::MatrixXd gamma_b = cert.psi_x * sys.b_tilde;
      const Eigen::MatrixXd x_basis = null_space_basis(stable.cert.psi_x);
      for (int probe = 0; probe < 4 && x_basis.cols() > 0; ++probe) {
        const Eigen::VectorXd x = x_basis * random_vector(rng, x_basis.cols());
        const Eigen::VectorXd du =
            (stable.admissible.h_x - proj.admissible.h_x) * x;
        CHECK((gamma_b * du).norm() <= 1e-7 * (1.0 + x.norm()));
        const Eigen::MatrixXd& hl = stable.admissible.h_lambda;
        const Eigen::VectorXd residual = du - hl * (hl.transpose() * du);
        CHECK(residual.norm() <= 1e-7 * (1.0 + du.norm()));
      }
      cert = stable.cert;
    }
  }
}

TEST_CASE("admissible sets are sound") {
  std::mt19937 rng(13);
  const Tolerance tol;
  for (int trial = 0; trial < 40; ++trial) {
    const Plant plant = random_plant(rng, 3);
    const VectorizedSystem sys = build_vectorized(plant);
    const Eigen::Index n_x = sys.state_dim();

    NullCert cert{Eigen::MatrixXd::Identity(n_x, n_x)};
    const BackwardStep first = backward_step_stable(cert, sys, tol);
    const BackwardStep second = backward_step_stable(first.cert, sys, tol);

    const Eigen::MatrixXd basis = null_space_basis(second.cert.psi_x);
    if (basis.cols() == 0) continue;
    for (int probe = 0; probe < 5; ++probe) {
      const Eigen::VectorXd x = basis * random_vector(rng, basis.cols());
      CHECK((sys.a_eq * x).norm() <= 1e-8 * (1.0 + x.norm()));
      Eigen::VectorXd u = second.admissible.h_x * x;
      if (second.admissible.h_lambda.cols() > 0) {
        u += second.admissible.h_lambda *
             random_vector(rng, second.admissible.h_lambda.cols());
      }
      const Eigen::VectorXd next = sys.a_tilde * x + sys.b_tilde * u;
      CHECK((first.cert.psi_x * next).norm() <=
            1e-8 * (1.0 + next.norm()) * (1.0 + x.norm()));
    }
  }
}

TEST_CASE("first-step feasible sets, worked by hand") {
  const VectorizedSystem sys = build_vectorized(scalar_plant());

  const InitialSet free = initial_step(NullCert{Eigen::MatrixXd(0, 3)}, sys);
  CHECK(free.w.norm() == 0.0);
  CHECK(free.h_lambda.isIdentity(0.0));
  CHECK(free.residual == 0.0);

  Eigen::MatrixXd pinned(1, 3);
  pinned << 0.3, 0.4, 0.5;
  const InitialSet fixed = initial_step(NullCert{pinned}, sys);
  CHECK(fixed.h_lambda.cols() == 0);
  CHECK(std::abs(fixed.w(0) + 1.0 / 3.0) <= 1e-14);
  CHECK(fixed.residual <= 1e-15);

  Eigen::MatrixXd blocking(1, 3);
  blocking << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(initial_step(NullCert{blocking}, sys), InfeasibleError);
}

TEST_CASE("two-step scalar problem solved against hand arithmetic") {
  const Plant plant = scalar_plant();
  const VectorizedSystem sys = build_vectorized(plant);
  const LqObjective lq(lq_default_weights(sys));
  SolveOptions options;
  options.keep_diagnostics = true;

  const SolveResult result = solve(plant, lq, 2, options);
  REQUIRE(result.diagnostics.has_value());
  const SolveDiagnostics& diag = *result.diagnostics;

  Eigen::MatrixXd k2(1, 3), k1(1, 3);
  k2 << 0.0, -0.25, -0.25;
  k1 << -0.25, -1.0, 0.0;
  CHECK((result.gains[2] - k2).norm() <= 1e-12);
  CHECK((result.gains[1] - k1).norm() <= 1e-12);

  Eigen::MatrixXd v1(3, 3);
  v1 << 1.453125, 1.171875, -0.140625,  //
      1.171875, 4.390625, -0.546875,    //
      -0.140625, -0.546875, 1.265625;
  CHECK((diag.values[1].P - v1).norm() <= 1e-12);

  CHECK(diag.initial.w.norm() <= 1e-12);
  CHECK(diag.initial.h_lambda.isIdentity(1e-12));

  const double u0 = -33.0 / 178.0;
  const double u1 = -23.0 / 356.0;
  CHECK(std::abs(result.response.phi_uy[0](0, 0) - u0) <= 1e-12);
  CHECK(std::abs(result.response.phi_uy[1](0, 0) - u1) <= 1e-12);
  CHECK(std::abs(result.response.phi_uy[2](0, 0) - 7.0 / 89.0) <= 1e-12);
  CHECK(std::abs(result.response.phi_xx[2](0, 0) - 28.0 / 89.0) <= 1e-12);

  CHECK(std::abs(result.objective - (1.0 + 33197.0 / 126736.0)) <= 1e-9);
  CHECK(result.termination_residual <= 1e-14);
  CHECK(diag.states[3].norm() <= 1e-14);

  const ResidualReport report = verify_response(plant, result.response);
  CHECK(report.max_residual() <= 1e-12);
}

TEST_CASE("truncated scalar recursion matches its closed form") {
  const Plant plant = scalar_plant();
  const VectorizedSystem sys = build_vectorized(plant);
  const LqObjective lq(lq_default_weights(sys));

  const SolveResult result = solve_approx(plant, lq, 2, 2);
  CHECK(std::abs(result.response.phi_uy[0](0, 0) + 0.5) <= 1e-12);
  CHECK(std::abs(result.termination_residual - 1.0 / 13.0) <= 1e-12);

  // every in-horizon constraint still holds; only the tail is left open
  const ResidualReport report = verify_response(plant, result.response);
  double in_horizon = 0.0;
  for (const double r : report.dynamics) in_horizon = std::max(in_horizon, r);
  for (const double r : report.transition)
    in_horizon = std::max(in_horizon, r);
  for (const double r : report.initial) in_horizon = std::max(in_horizon, r);
  CHECK(in_horizon <= 1e-12);
  CHECK(std::abs(report.termination - 1.0 / 13.0) <= 1e-12);
}

TEST_CASE("no truncation allowance reproduces the exact recursion") {
  const Plant plant = stochastic_chain(3, 2, 2, 0.2);
  const VectorizedSystem sys = build_vectorized(plant);
  const H2Objective h2(h2_default_weights(sys));

  const SolveResult exact = solve(plant, h2, 6);
  const SolveResult same = solve_approx(plant, h2, 6, 1);
  CHECK(std::abs(exact.objective - same.objective) <= 1e-8);
  for (Eigen::Index tau = 0; tau <= 6; ++tau) {
    const auto t = static_cast<std::size_t>(tau);
    CHECK((exact.response.phi_uy[t] - same.response.phi_uy[t]).norm() <=
          1e-8);
    CHECK((exact.response.phi_xx[t] - same.response.phi_xx[t]).norm() <=
          1e-8);
  }
}

TEST_CASE("chain solves satisfy every constraint under both step variants") {
  double objectives[2] = {0.0, 0.0};
  for (const bool pinv : {false, true}) {
    SolveOptions options;
    options.use_pinv_steps = pinv;
    options.keep_diagnostics = true;

    const Plant plant = stochastic_chain(3, 2, 2, 0.2);
    const VectorizedSystem sys = build_vectorized(plant);
    const LqObjective lq(lq_default_weights(sys));
    const SolveResult result = solve(plant, lq, 6, options);
    objectives[pinv ? 1 : 0] = result.objective;

    const ResidualReport report = verify_response(plant, result.response);
    CHECK(report.max_residual() <= 1e-9);
    CHECK(result.termination_residual <= 1e-9);

    // each rollout state is certified by the surviving constraint rows
    const SolveDiagnostics& diag = *result.diagnostics;
    for (Eigen::Index tau = 1; tau <= 6; ++tau) {
      const auto t = static_cast<std::size_t>(tau);
      const Eigen::VectorXd& x = diag.states[t];
      CHECK((diag.certs[t].psi_x * x).norm() <= 1e-7 * (1.0 + x.norm()));
      CHECK((sys.a_eq * x).norm() <= 1e-7 * (1.0 + x.norm()));
    }
  }
  CHECK(std::abs(objectives[0] - objectives[1]) <=
        1e-8 * (1.0 + std::abs(objectives[0])));
}

TEST_CASE("reported objective equals the cost recomputed from the response") {
  const Plant plant = stochastic_chain(4, 3, 3, 0.2);
  const VectorizedSystem sys = build_vectorized(plant);
  const H2Objective h2(h2_default_weights(sys));
  const LqObjective lq(lq_default_weights(sys));

  for (const CostToGoModel* obj :
       {static_cast<const CostToGoModel*>(&h2),
        static_cast<const CostToGoModel*>(&lq)}) {
    const SolveResult result = solve(plant, *obj, 5);
    const StepCostQuadratic h = obj->step_quadratic(sys);

    double total = h(Eigen::VectorXd::Zero(sys.state_dim()),
                     vec(result.response.phi_uy[0]));
    for (Eigen::Index tau = 1; tau <= 5; ++tau) {
      total += h(stack_state(result.response, tau),
                 vec(result.response.phi_uy[static_cast<std::size_t>(tau)]));
    }
    CHECK(std::abs(result.objective - total) <= 1e-9 * (1.0 + total));
  }
}

TEST_CASE("random feasible plants solve cleanly at small sizes") {
  std::mt19937 rng(17);
  int solved = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const Plant plant = random_plant(rng, 3);
    const VectorizedSystem sys = build_vectorized(plant);
    const H2Objective h2(h2_default_weights(sys));
    try {
      const SolveResult result = solve(plant, h2, 4);
      const ResidualReport report = verify_response(plant, result.response);
      CHECK(report.max_residual() <= 1e-7);
      ++solved;
    } catch (const InfeasibleError&) {
      // some random plants genuinely admit no FIR response at this horizon
    }
  }
  CHECK(solved > 0);
}

TEST_CASE("argument validation") {
  const Plant plant = scalar_plant();
  const VectorizedSystem sys = build_vectorized(plant);
  const LqObjective lq(lq_default_weights(sys));
  CHECK_THROWS_AS(solve(plant, lq, 1), std::invalid_argument);
  CHECK_THROWS_AS(solve_approx(plant, lq, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(solve_approx(plant, lq, 4, 5), std::invalid_argument);
}
