#pragma once

#include <random>

#include <Eigen/Dense>

#include "slsdp/model.hpp"

namespace testsup {

inline Eigen::MatrixXd random_matrix(std::mt19937& rng, Eigen::Index rows,
                                     Eigen::Index cols, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = dist(rng);
    }
  }
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, Eigen::Index n,
                                     double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

inline slsdp::Plant random_plant(std::mt19937& rng, Eigen::Index max_dim) {
  std::uniform_int_distribution<Eigen::Index> dim(1, max_dim);
  const Eigen::Index nx = dim(rng);
  const Eigen::Index nu = dim(rng);
  const Eigen::Index ny = dim(rng);
  return slsdp::Plant(random_matrix(rng, nx, nx), random_matrix(rng, nx, nu),
                      random_matrix(rng, ny, nx));
}

inline Eigen::MatrixXd random_psd(std::mt19937& rng, Eigen::Index n,
                                  double scale = 1.0) {
  const Eigen::MatrixXd root = random_matrix(rng, n, n, scale);
  return root.transpose() * root;
}

/// Largest norm of projecting either basis out of the other's span; zero
/// iff the two orthonormal bases span the same subspace.
inline double subspace_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) return 1.0;
  if (a.cols() == 0) return 0.0;
  const double ab = (a - b * (b.transpose() * a)).norm();
  const double ba = (b - a * (a.transpose() * b)).norm();
  return std::max(ab, ba);
}

}  // namespace testsup
