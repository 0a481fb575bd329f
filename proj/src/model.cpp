#include "slsdp/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slsdp {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(name) +
                                " contains a non-finite entry");
  }
}

}  // namespace

Plant::Plant(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw std::invalid_argument("A must be square and nonempty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw std::invalid_argument("B must have as many rows as A");
  }
  if (C.cols() != A.rows() || C.rows() == 0) {
    throw std::invalid_argument("C must have as many columns as A");
  }
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C, "C");
}

SystemResponse SystemResponse::zero(const Plant& plant, Eigen::Index horizon) {
  return zero(plant.nx(), plant.nu(), plant.ny(), horizon);
}

SystemResponse SystemResponse::zero(Eigen::Index nx, Eigen::Index nu,
                                    Eigen::Index ny, Eigen::Index horizon) {
  if (horizon < 1) {
    throw std::invalid_argument("horizon must be at least 1");
  }
  SystemResponse resp;
  resp.horizon = horizon;
  const auto n = static_cast<std::size_t>(horizon) + 1;
  resp.phi_xx.assign(n, Eigen::MatrixXd::Zero(nx, nx));
  resp.phi_xy.assign(n, Eigen::MatrixXd::Zero(nx, ny));
  resp.phi_ux.assign(n, Eigen::MatrixXd::Zero(nu, nx));
  resp.phi_uy.assign(n, Eigen::MatrixXd::Zero(nu, ny));
  return resp;
}

double ResidualReport::max_residual() const {
  double m = termination;
  for (double v : dynamics) m = std::max(m, v);
  for (double v : transition) m = std::max(m, v);
  for (double v : initial) m = std::max(m, v);
  return m;
}

VectorizedSystem build_vectorized(const Plant& plant) {
  const Eigen::Index nx = plant.nx(), nu = plant.nu(), ny = plant.ny();
  const Eigen::Index dxx = nx * nx;   // vec(phi_xx) block
  const Eigen::Index dxy = nx * ny;   // vec(phi_xy) block
  const Eigen::Index dux = nu * nx;   // vec(phi_ux) block
  const Eigen::Index n_state = dxx + dxy + dux;
  const Eigen::Index n_input = nu * ny;

  const Eigen::MatrixXd ix = Eigen::MatrixXd::Identity(nx, nx);
  const Eigen::MatrixXd iy = Eigen::MatrixXd::Identity(ny, ny);
  const Eigen::MatrixXd iu = Eigen::MatrixXd::Identity(nu, nu);

  VectorizedSystem sys;
  sys.nx = nx;
  sys.nu = nu;
  sys.ny = ny;

  // Spectral recursions, written on vec() of each block:
  //   phi_xx[tau+1] = phi_xx[tau] A + phi_xy[tau] C
  //   phi_xy[tau+1] = A phi_xy[tau] + B phi_uy[tau]
  //   phi_ux[tau+1] = phi_ux[tau] A + phi_uy[tau] C
  sys.a_tilde = Eigen::MatrixXd::Zero(n_state, n_state);
  sys.a_tilde.block(0, 0, dxx, dxx) = kron(plant.A.transpose(), ix);
  sys.a_tilde.block(0, dxx, dxx, dxy) = kron(plant.C.transpose(), ix);
  sys.a_tilde.block(dxx, dxx, dxy, dxy) = kron(iy, plant.A);
  sys.a_tilde.block(dxx + dxy, dxx + dxy, dux, dux) =
      kron(plant.A.transpose(), iu);

  sys.b_tilde = Eigen::MatrixXd::Zero(n_state, n_input);
  sys.b_tilde.block(dxx, 0, dxy, n_input) = kron(iy, plant.B);
  sys.b_tilde.block(dxx + dxy, 0, dux, n_input) = kron(plant.C.transpose(), iu);

  // Coupling constraint A phi_xx[tau] - phi_xx[tau] A - phi_xy[tau] C
  //   + B phi_ux[tau] = 0, one vec'd row block per step.
  sys.a_eq = Eigen::MatrixXd::Zero(dxx, n_state);
  sys.a_eq.block(0, 0, dxx, dxx) = kron(ix, plant.A) - kron(plant.A.transpose(), ix);
  sys.a_eq.block(0, dxx, dxx, dxy) = -kron(plant.C.transpose(), ix);
  sys.a_eq.block(0, dxx + dxy, dxx, dux) = kron(ix, plant.B);

  // Map from u[0] to the phi_xy / phi_ux parts of the first state.
  sys.b0 = sys.b_tilde.bottomRows(dxy + dux);

  return sys;
}

Plant stochastic_chain(Eigen::Index nx, Eigen::Index nu, Eigen::Index ny,
                       double alpha) {
  if (nx < 1 || nu < 1 || ny < 1) {
    throw std::invalid_argument("dimensions must be positive");
  }
  if (nu > nx || ny > nx) {
    throw std::invalid_argument("nu and ny must not exceed nx");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1)");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nx, nx);
  if (nx == 1) {
    a(0, 0) = 1.0;
  } else {
    for (Eigen::Index i = 0; i < nx; ++i) {
      const bool interior = (i > 0 && i < nx - 1);
      a(i, i) = interior ? 1.0 - 2.0 * alpha : 1.0 - alpha;
      if (i > 0) a(i, i - 1) = alpha;
      if (i < nx - 1) a(i, i + 1) = alpha;
    }
  }

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nx, nu);
  b.topRows(nu) = Eigen::MatrixXd::Identity(nu, nu);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ny, nx);
  c.leftCols(ny) = Eigen::MatrixXd::Identity(ny, ny);

  return Plant(std::move(a), std::move(b), std::move(c));
}

Eigen::VectorXd stack_state(const SystemResponse& resp, Eigen::Index tau) {
  const auto t = static_cast<std::size_t>(tau);
  Eigen::VectorXd x(resp.phi_xx[t].size() + resp.phi_xy[t].size() +
                    resp.phi_ux[t].size());
  x << vec(resp.phi_xx[t]), vec(resp.phi_xy[t]), vec(resp.phi_ux[t]);
  return x;
}

ResidualReport verify_response(const Plant& plant, const SystemResponse& resp) {
  const Eigen::Index T = resp.horizon;
  const auto n = static_cast<std::size_t>(T) + 1;
  if (resp.phi_xx.size() != n || resp.phi_xy.size() != n ||
      resp.phi_ux.size() != n || resp.phi_uy.size() != n) {
    throw std::invalid_argument("response block count does not match horizon");
  }

  const Eigen::MatrixXd& A = plant.A;
  const Eigen::MatrixXd& B = plant.B;
  const Eigen::MatrixXd& C = plant.C;
  const Eigen::MatrixXd ix =
      Eigen::MatrixXd::Identity(plant.nx(), plant.nx());

  ResidualReport report;

  for (Eigen::Index tau = 1; tau < T; ++tau) {
    const auto t = static_cast<std::size_t>(tau);
    const double dxx =
        (resp.phi_xx[t + 1] - resp.phi_xx[t] * A - resp.phi_xy[t] * C)
            .squaredNorm();
    const double dxy =
        (resp.phi_xy[t + 1] - A * resp.phi_xy[t] - B * resp.phi_uy[t])
            .squaredNorm();
    const double dux =
        (resp.phi_ux[t + 1] - resp.phi_ux[t] * A - resp.phi_uy[t] * C)
            .squaredNorm();
    report.dynamics.push_back(std::sqrt(dxx + dxy + dux));
  }

  for (Eigen::Index tau = 1; tau <= T; ++tau) {
    const auto t = static_cast<std::size_t>(tau);
    report.transition.push_back((A * resp.phi_xx[t] - resp.phi_xx[t] * A -
                                 resp.phi_xy[t] * C + B * resp.phi_ux[t])
                                    .norm());
  }

  report.initial[0] = resp.phi_xx[0].norm();
  report.initial[1] = resp.phi_xy[0].norm();
  report.initial[2] = resp.phi_ux[0].norm();
  report.initial[3] = (resp.phi_xx[1] - ix).norm();
  report.initial[4] = (resp.phi_xy[1] - B * resp.phi_uy[0]).norm();
  report.initial[5] = (resp.phi_ux[1] - resp.phi_uy[0] * C).norm();

  const auto last = static_cast<std::size_t>(T);
  const double txx =
      (resp.phi_xx[last] * A + resp.phi_xy[last] * C).squaredNorm();
  const double txy =
      (A * resp.phi_xy[last] + B * resp.phi_uy[last]).squaredNorm();
  const double tux =
      (resp.phi_ux[last] * A + resp.phi_uy[last] * C).squaredNorm();
  report.termination = std::sqrt(txx + txy + tux);

  return report;
}

}  // namespace slsdp
