#pragma once

#include <Eigen/Dense>

namespace slsdp {

/// Numerical thresholds shared across the solver stack.
///
/// rank_tol is relative: singular values at or below rank_tol times the
/// largest singular value are treated as zero. The rank routines also take
/// an optional scale floor; the cutoff then becomes
/// rank_tol * max(largest singular value, scale). A matrix whose true value
/// is zero still carries rounding noise from the products that built it, and
/// a purely relative cutoff would promote that noise to full rank — the
/// caller supplies the magnitude its entries would have if they were real.
/// residual_tol is absolute and is used both for dropping near-zero rows and
/// for feasibility checks.
struct Tolerance {
  double rank_tol = 1e-10;
  double residual_tol = 1e-9;
};

/// Column-major stacking of a matrix into a vector.
Eigen::VectorXd vec(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Inverse of vec. Throws std::invalid_argument on a length mismatch.
Eigen::MatrixXd unvec(const Eigen::Ref<const Eigen::VectorXd>& v,
                      Eigen::Index rows, Eigen::Index cols);

/// Kronecker product, (m*p) x (n*q) for a m x n and b p x q.
/// Satisfies vec(A X B) = kron(B^T, A) * vec(X).
Eigen::MatrixXd kron(const Eigen::Ref<const Eigen::MatrixXd>& a,
                     const Eigen::Ref<const Eigen::MatrixXd>& b);

/// Orthonormal basis of {v : psi v = 0}, computed from an SVD.
/// Returns a matrix with zero columns when the null space is trivial.
/// A matrix with zero rows has the full space as its null space.
Eigen::MatrixXd null_space_basis(const Eigen::Ref<const Eigen::MatrixXd>& psi,
                                 const Tolerance& tol = {},
                                 double scale = 0.0);

/// Minimum-Frobenius-norm minimizer M of ||gamma * M - z||_F, i.e. the
/// pseudo-inverse solution gamma^+ z. Rank-deficient gamma is handled by
/// the singular-value threshold; no explicit inverse is ever formed.
/// Throws std::invalid_argument when row counts disagree.
Eigen::MatrixXd min_norm_least_squares(
    const Eigen::Ref<const Eigen::MatrixXd>& gamma,
    const Eigen::Ref<const Eigen::MatrixXd>& z, const Tolerance& tol = {},
    double scale = 0.0);

/// Drops rows with Euclidean norm at or below residual_tol and scales the
/// remaining rows to unit norm. Preserves the null space when the dropped
/// rows are exactly zero. An all-zero input yields a 0 x cols matrix.
Eigen::MatrixXd normalize_nonzero_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& psi, const Tolerance& tol = {});

/// Moore-Penrose pseudo-inverse via SVD with the shared rank threshold.
/// Intended for the reference recursion path and for tests; the solver
/// pipeline itself prefers min_norm_least_squares.
Eigen::MatrixXd pseudo_inverse(const Eigen::Ref<const Eigen::MatrixXd>& m,
                               const Tolerance& tol = {}, double scale = 0.0);

/// Orthonormal basis of the column space, with rank decided by the shared
/// threshold. Returns a matrix with zero columns for a (near-)zero input.
Eigen::MatrixXd column_space_basis(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                   const Tolerance& tol = {},
                                   double scale = 0.0);

}  // namespace slsdp
