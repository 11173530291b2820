#include "diamond/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diamond {

RKTableau make_tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const auto r = A.rows();
  if (A.cols() != r || b.size() != r || c.size() != r)
    throw std::invalid_argument("tableau: inconsistent sizes");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw std::invalid_argument("tableau: A is not invertible");
  RKTableau t;
  t.r = static_cast<int>(r);
  t.A = A;
  t.b = b;
  t.c = c;
  t.F = lu.inverse();
  t.mu = t.F.rowwise().sum();
  t.beta = b.transpose() * t.F;
  t.alpha = b.dot(t.mu);
  return t;
}

RKTableau gauss_tableau(int r) {
  if (r < 1 || r > 4) throw std::out_of_range("gauss_tableau: r must be in 1..4, got " + std::to_string(r));
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

  // Golub-Welsch: Legendre nodes are eigenvalues of the symmetric Jacobi matrix.
  LMat J = LMat::Zero(r, r);
  for (int k = 1; k < r; ++k) {
    long double beta = k / std::sqrt(4.0L * k * k - 1.0L);
    J(k - 1, k) = J(k, k - 1) = beta;
  }
  Eigen::SelfAdjointEigenSolver<LMat> es(J);
  LVec c = (es.eigenvalues().array() + 1.0L) / 2.0L;
  std::sort(c.data(), c.data() + r);

  // Collocation conditions: sum_j a_ij c_j^{k-1} = c_i^k / k, sum_j b_j c_j^{k-1} = 1/k.
  LMat V(r, r);
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j) V(k, j) = std::pow(c[j], static_cast<long double>(k));
  LMat Cp(r, r);
  LVec rhs_b(r);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) Cp(i, k) = std::pow(c[i], static_cast<long double>(k + 1)) / (k + 1);
  for (int k = 0; k < r; ++k) rhs_b[k] = 1.0L / (k + 1);
  Eigen::FullPivLU<LMat> lu(V);
  LMat A = lu.solve(Cp.transpose()).transpose();
  LVec b = lu.solve(rhs_b);
  return make_tableau(A.cast<double>(), b.cast<double>(), c.cast<double>());
}

}  // namespace diamond
