#include "slsdp/qp_oracle.hpp"

#include <Eigen/SparseLU>

#include <sstream>
#include <stdexcept>
#include <vector>

namespace slsdp {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& out, Eigen::Index row0, Eigen::Index col0,
               const Eigen::MatrixXd& block, double scale = 1.0) {
  for (Eigen::Index j = 0; j < block.cols(); ++j) {
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      const double v = scale * block(i, j);
      if (v != 0.0) {
        out.emplace_back(row0 + i, col0 + j, v);
      }
    }
  }
}

void add_identity(Triplets& out, Eigen::Index row0, Eigen::Index col0,
                  Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    out.emplace_back(row0 + i, col0 + i, 1.0);
  }
}

/// Rows of m that are not identically zero (a symmetric A zeroes some
/// coupling rows; keeping them would make E rank-deficient for free).
std::vector<Eigen::Index> nonzero_rows(const Eigen::MatrixXd& m,
                                       double rank_tol) {
  const double scale = 1.0 + m.norm();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.row(i).norm() > rank_tol * scale) keep.push_back(i);
  }
  return keep;
}

}  // namespace

Eigen::Index StackedProgram::x_offset(Eigen::Index tau) const {
  const Eigen::Index n_x = sys.state_dim();
  const Eigen::Index n_u = sys.input_dim();
  const Eigen::Index q = n_x - sys.nx * sys.nx;
  if (tau == 1) return n_u;
  return n_u + q + n_u + (tau - 2) * (n_x + n_u);
}

Eigen::Index StackedProgram::u_offset(Eigen::Index tau) const {
  if (tau == 0) return 0;
  if (tau == 1) return sys.input_dim() + sys.state_dim() - sys.nx * sys.nx;
  return x_offset(tau) + sys.state_dim();
}

Eigen::VectorXd StackedProgram::stack(const SystemResponse& resp) const {
  const Eigen::Index n_u = sys.input_dim();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(num_vars());
  for (Eigen::Index tau = 0; tau <= horizon; ++tau) {
    z.segment(u_offset(tau), n_u) =
        vec(resp.phi_uy[static_cast<std::size_t>(tau)]);
  }
  z.segment(x_offset(1), sys.nx * sys.ny) = vec(resp.phi_xy[1]);
  z.segment(x_offset(1) + sys.nx * sys.ny, sys.nu * sys.nx) =
      vec(resp.phi_ux[1]);
  for (Eigen::Index tau = 2; tau <= horizon; ++tau) {
    z.segment(x_offset(tau), sys.state_dim()) = stack_state(resp, tau);
  }
  return z;
}

StackedProgram assemble(const Plant& plant, const CostToGoModel& objective,
                        Eigen::Index horizon) {
  if (horizon < 2) {
    throw std::invalid_argument("horizon must be at least 2");
  }

  StackedProgram prog;
  prog.sys = build_vectorized(plant);
  prog.horizon = horizon;

  const Eigen::Index n_x = prog.sys.state_dim();
  const Eigen::Index n_u = prog.sys.input_dim();
  const Eigen::Index dxx = prog.sys.nx * prog.sys.nx;
  const Eigen::Index q = n_x - dxx;
  const Eigen::Index T = horizon;
  const Eigen::Index N = T * n_x + (T + 1) * n_u - dxx;

  const StepCostQuadratic h = objective.step_quadratic(prog.sys);
  const Eigen::VectorXd vec_i =
      vec(Eigen::MatrixXd::Identity(prog.sys.nx, prog.sys.nx));

  // Objective. The leading block of x[1] is substituted by vec(I), which
  // turns part of the tau = 1 cost into linear and constant terms. The
  // quadratic data carries a factor 2 so (1/2) z^T H z + f^T z + constant
  // equals the summed per-step cost exactly.
  Triplets h_trip;
  prog.f = Eigen::VectorXd::Zero(N);

  add_block(h_trip, prog.u_offset(0), prog.u_offset(0), h.uu, 2.0);

  const Eigen::MatrixXd xx_tail = h.xx.block(dxx, dxx, q, q);
  const Eigen::MatrixXd xu_tail = h.xu.block(dxx, 0, q, n_u);
  add_block(h_trip, prog.x_offset(1), prog.x_offset(1), xx_tail, 2.0);
  add_block(h_trip, prog.x_offset(1), prog.u_offset(1), xu_tail, 2.0);
  add_block(h_trip, prog.u_offset(1), prog.x_offset(1),
            xu_tail.transpose().eval(), 2.0);
  add_block(h_trip, prog.u_offset(1), prog.u_offset(1), h.uu, 2.0);
  prog.f.segment(prog.x_offset(1), q) =
      2.0 * h.xx.block(dxx, 0, q, dxx) * vec_i;
  prog.f.segment(prog.u_offset(1), n_u) =
      2.0 * h.xu.topRows(dxx).transpose() * vec_i;
  prog.constant = vec_i.dot(h.xx.topLeftCorner(dxx, dxx) * vec_i);

  for (Eigen::Index tau = 2; tau <= T; ++tau) {
    add_block(h_trip, prog.x_offset(tau), prog.x_offset(tau), h.xx, 2.0);
    add_block(h_trip, prog.x_offset(tau), prog.u_offset(tau), h.xu, 2.0);
    add_block(h_trip, prog.u_offset(tau), prog.x_offset(tau),
              h.xu.transpose().eval(), 2.0);
    add_block(h_trip, prog.u_offset(tau), prog.u_offset(tau), h.uu, 2.0);
  }

  prog.H.resize(N, N);
  prog.H.setFromTriplets(h_trip.begin(), h_trip.end());

  // Equalities: first-state tie to u[0], dynamics, per-step coupling rows
  // (identically-zero rows dropped once for all steps), and the
  // beyond-horizon boundary.
  const std::vector<Eigen::Index> eq_rows =
      nonzero_rows(prog.sys.a_eq, Tolerance{}.rank_tol);
  const auto r_eq = static_cast<Eigen::Index>(eq_rows.size());
  const Eigen::Index M = q + (T - 1) * n_x + T * r_eq + n_x;

  Triplets e_trip;
  prog.e = Eigen::VectorXd::Zero(M);
  Eigen::Index row = 0;

  // x^[1] - b0 u[0] = 0
  add_identity(e_trip, row, prog.x_offset(1), q);
  add_block(e_trip, row, prog.u_offset(0), prog.sys.b0, -1.0);
  row += q;

  // x[tau+1] = a_tilde x[tau] + b_tilde u[tau]; at tau = 1 the pinned
  // leading block of x[1] moves to the right-hand side.
  for (Eigen::Index tau = 1; tau < T; ++tau) {
    add_identity(e_trip, row, prog.x_offset(tau + 1), n_x);
    if (tau == 1) {
      add_block(e_trip, row, prog.x_offset(1),
                prog.sys.a_tilde.rightCols(q), -1.0);
      prog.e.segment(row, n_x) = prog.sys.a_tilde.leftCols(dxx) * vec_i;
    } else {
      add_block(e_trip, row, prog.x_offset(tau), prog.sys.a_tilde, -1.0);
    }
    add_block(e_trip, row, prog.u_offset(tau), prog.sys.b_tilde, -1.0);
    row += n_x;
  }

  // a_eq x[tau] = 0 for tau = 1..T
  for (Eigen::Index tau = 1; tau <= T; ++tau) {
    for (Eigen::Index k = 0; k < r_eq; ++k) {
      const Eigen::Index i = eq_rows[static_cast<std::size_t>(k)];
      if (tau == 1) {
        add_block(e_trip, row + k, prog.x_offset(1),
                  prog.sys.a_eq.row(i).tail(q), 1.0);
        prog.e(row + k) = -prog.sys.a_eq.row(i).head(dxx).dot(vec_i);
      } else {
        add_block(e_trip, row + k, prog.x_offset(tau), prog.sys.a_eq.row(i),
                  1.0);
      }
    }
    row += r_eq;
  }

  // a_tilde x[T] + b_tilde u[T] = 0
  add_block(e_trip, row, prog.x_offset(T), prog.sys.a_tilde, 1.0);
  add_block(e_trip, row, prog.u_offset(T), prog.sys.b_tilde, 1.0);
  row += n_x;

  prog.E.resize(M, N);
  prog.E.setFromTriplets(e_trip.begin(), e_trip.end());
  return prog;
}

namespace {

SystemResponse unstack(const StackedProgram& prog, const Eigen::VectorXd& z) {
  const VectorizedSystem& sys = prog.sys;
  const Eigen::Index dxy = sys.nx * sys.ny;
  const Eigen::Index dux = sys.nu * sys.nx;

  SystemResponse resp =
      SystemResponse::zero(sys.nx, sys.nu, sys.ny, prog.horizon);

  for (Eigen::Index tau = 0; tau <= prog.horizon; ++tau) {
    resp.phi_uy[static_cast<std::size_t>(tau)] =
        unvec(z.segment(prog.u_offset(tau), sys.input_dim()), sys.nu, sys.ny);
  }
  resp.phi_xx[1] = Eigen::MatrixXd::Identity(sys.nx, sys.nx);
  resp.phi_xy[1] = unvec(z.segment(prog.x_offset(1), dxy), sys.nx, sys.ny);
  resp.phi_ux[1] = unvec(z.segment(prog.x_offset(1) + dxy, dux), sys.nu,
                         sys.nx);
  for (Eigen::Index tau = 2; tau <= prog.horizon; ++tau) {
    const auto t = static_cast<std::size_t>(tau);
    const Eigen::Index at = prog.x_offset(tau);
    resp.phi_xx[t] = unvec(z.segment(at, sys.nx * sys.nx), sys.nx, sys.nx);
    resp.phi_xy[t] = unvec(z.segment(at + sys.nx * sys.nx, dxy), sys.nx,
                           sys.ny);
    resp.phi_ux[t] = unvec(z.segment(at + sys.nx * sys.nx + dxy, dux),
                           sys.nu, sys.nx);
  }
  return resp;
}

}  // namespace

QpSolution solve_kkt(const StackedProgram& prog, const Tolerance& tol) {
  const Eigen::Index N = prog.num_vars();
  const Eigen::Index M = prog.num_equalities();

  Triplets k_trip;
  k_trip.reserve(static_cast<std::size_t>(prog.H.nonZeros()) +
                 2 * static_cast<std::size_t>(prog.E.nonZeros()));
  for (int k = 0; k < prog.H.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(prog.H, k); it; ++it) {
      k_trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int k = 0; k < prog.E.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(prog.E, k); it; ++it) {
      k_trip.emplace_back(N + it.row(), it.col(), it.value());
      k_trip.emplace_back(it.col(), N + it.row(), it.value());
    }
  }
  // Redundant equality rows (the coupling rows are implied by the tie and
  // dynamics rows) make the exact saddle-point matrix singular, so the fast
  // path factors a copy with a small shift on the multiplier block and
  // polishes the answer with iterative refinement against the true system.
  const double shift = 1e-11;
  for (Eigen::Index i = 0; i < M; ++i) {
    k_trip.emplace_back(N + i, N + i, -shift);
  }
  Eigen::SparseMatrix<double> kkt(N + M, N + M);
  kkt.setFromTriplets(k_trip.begin(), k_trip.end());

  Eigen::VectorXd rhs(N + M);
  rhs << -prog.f, prog.e;

  const double eq_scale = 1.0 + prog.e.norm();
  const double st_scale = 1.0 + prog.f.norm();
  // The direct factorization must reproduce the saddle point well inside
  // the documented 1e-7 bound; anything worse falls through to the
  // rank-revealing path.
  const double fast_tol = 100.0 * tol.residual_tol;
  const double classify_tol = 1000.0 * tol.residual_tol;

  Eigen::VectorXd z, nu;
  double eq_res = 0.0, st_res = 0.0;
  bool accepted = false;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(kkt);
  if (lu.info() == Eigen::Success) {
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (sol.allFinite()) {
      z = sol.head(N);
      nu = sol.tail(M);
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd r(N + M);
        r.head(N) = -prog.f - prog.H * z - prog.E.transpose() * nu;
        r.tail(M) = prog.e - prog.E * z;
        const Eigen::VectorXd d = lu.solve(r);
        if (!d.allFinite()) break;
        z += d.head(N);
        nu += d.tail(M);
      }
      eq_res = (prog.E * z - prog.e).norm();
      st_res = (prog.H * z + prog.f + prog.E.transpose() * nu).norm();
      accepted = eq_res <= fast_tol * eq_scale && st_res <= fast_tol * st_scale;
    }
  }

  if (!accepted) {
    // Keep a maximal independent subset of equality rows, then factor the
    // reduced saddle point densely with full pivoting.
    const Eigen::MatrixXd e_dense(prog.E);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e_dense.transpose());
    qr.setThreshold(tol.rank_tol);
    const Eigen::Index rank = qr.rank();
    const auto& perm = qr.colsPermutation().indices();

    Eigen::MatrixXd e_red(rank, N);
    Eigen::VectorXd rhs_red(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
      e_red.row(i) = e_dense.row(perm(i));
      rhs_red(i) = prog.e(perm(i));
    }

    Eigen::MatrixXd dense_kkt = Eigen::MatrixXd::Zero(N + rank, N + rank);
    dense_kkt.topLeftCorner(N, N) = Eigen::MatrixXd(prog.H);
    dense_kkt.block(N, 0, rank, N) = e_red;
    dense_kkt.block(0, N, N, rank) = e_red.transpose();
    Eigen::VectorXd dense_rhs(N + rank);
    dense_rhs << -prog.f, rhs_red;

    Eigen::FullPivLU<Eigen::MatrixXd> dense_lu(dense_kkt);
    dense_lu.setThreshold(tol.rank_tol);
    const Eigen::VectorXd sol = dense_lu.solve(dense_rhs);

    z = sol.head(N);
    const Eigen::VectorXd nu_red = sol.tail(rank);
    eq_res = (prog.E * z - prog.e).norm();
    if (!z.allFinite() || eq_res > classify_tol * eq_scale) {
      std::ostringstream msg;
      msg << "equalities are inconsistent: best residual " << eq_res;
      throw InfeasibleError(msg.str());
    }
    st_res =
        (prog.H * z + prog.f + e_red.transpose() * nu_red).norm();
    if (st_res > classify_tol * st_scale) {
      std::ostringstream msg;
      msg << "objective is unbounded along the feasible set: stationarity "
             "residual "
          << st_res;
      throw UnboundedError(msg.str());
    }
    nu = Eigen::VectorXd::Zero(M);
    for (Eigen::Index i = 0; i < rank; ++i) nu(perm(i)) = nu_red(i);
  }

  QpSolution out;
  out.response = unstack(prog, z);
  out.objective = 0.5 * z.dot(prog.H * z) + prog.f.dot(z) + prog.constant;
  out.equality_residual = eq_res;
  out.stationarity_residual = st_res;
  return out;
}

}  // namespace slsdp
