#pragma once

#include <Eigen/Dense>

namespace diamond {

/// Collocation Runge-Kutta coefficients with the derived quantities used by
/// the higher-order diamond: F = A^{-1}, mu = F 1, beta = b^T F, alpha = b^T mu.
struct RKTableau {
  int r = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b, c;
  Eigen::MatrixXd F;
  Eigen::VectorXd mu;
  Eigen::RowVectorXd beta;
  double alpha = 0.0;
};

/// Gauss-Legendre collocation, 1 <= r <= 4.
RKTableau gauss_tableau(int r);

/// Fills F, mu, beta and alpha from A and b; throws if A is singular.
RKTableau make_tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c);

}  // namespace diamond
