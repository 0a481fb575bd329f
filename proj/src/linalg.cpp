#include "slsdp/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace slsdp {

Eigen::VectorXd vec(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Eigen::VectorXd out(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    out.segment(k, m.rows()) = m.col(j);
    k += m.rows();
  }
  return out;
}

Eigen::MatrixXd unvec(const Eigen::Ref<const Eigen::VectorXd>& v,
                      Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("unvec: vector of length " +
                                std::to_string(v.size()) +
                                " cannot fill a " + std::to_string(rows) +
                                " x " + std::to_string(cols) + " matrix");
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    out.col(j) = v.segment(j * rows, rows);
  }
  return out;
}

Eigen::MatrixXd kron(const Eigen::Ref<const Eigen::MatrixXd>& a,
                     const Eigen::Ref<const Eigen::MatrixXd>& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd null_space_basis(const Eigen::Ref<const Eigen::MatrixXd>& psi,
                                 const Tolerance& tol, double scale) {
  const Eigen::Index n = psi.cols();
  if (n == 0) {
    return Eigen::MatrixXd(0, 0);
  }
  if (psi.rows() == 0) {
    return Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(psi, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff =
      sv.size() > 0 ? tol.rank_tol * std::max(sv(0), scale) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return svd.matrixV().rightCols(n - rank);
}

Eigen::MatrixXd min_norm_least_squares(
    const Eigen::Ref<const Eigen::MatrixXd>& gamma,
    const Eigen::Ref<const Eigen::MatrixXd>& z, const Tolerance& tol,
    double scale) {
  if (gamma.rows() != z.rows()) {
    throw std::invalid_argument(
        "min_norm_least_squares: gamma has " + std::to_string(gamma.rows()) +
        " rows but z has " + std::to_string(z.rows()));
  }
  if (gamma.cols() == 0) {
    return Eigen::MatrixXd(0, z.cols());
  }
  if (gamma.rows() == 0) {
    return Eigen::MatrixXd::Zero(gamma.cols(), z.cols());
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(gamma,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol.rank_tol * std::max(sv(0), scale);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  if (rank == 0) {
    return Eigen::MatrixXd::Zero(gamma.cols(), z.cols());
  }
  return svd.matrixV().leftCols(rank) *
         (sv.head(rank).cwiseInverse().asDiagonal() *
          (svd.matrixU().leftCols(rank).transpose() * z));
}

Eigen::MatrixXd pseudo_inverse(const Eigen::Ref<const Eigen::MatrixXd>& m,
                               const Tolerance& tol, double scale) {
  if (m.rows() == 0 || m.cols() == 0) {
    return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol.rank_tol * std::max(sv(0), scale);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd column_space_basis(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                   const Tolerance& tol, double scale) {
  if (m.rows() == 0 || m.cols() == 0) {
    return Eigen::MatrixXd(m.rows(), 0);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = tol.rank_tol * std::max(sv(0), scale);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd normalize_nonzero_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& psi, const Tolerance& tol) {
  const Eigen::VectorXd norms = psi.rowwise().norm();
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    if (norms(i) > tol.residual_tol) ++kept;
  }
  Eigen::MatrixXd out(kept, psi.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    if (norms(i) > tol.residual_tol) {
      out.row(r++) = psi.row(i) / norms(i);
    }
  }
  return out;
}

}  // namespace slsdp
