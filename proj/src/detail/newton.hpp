#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "diamond/integrator.hpp"

namespace diamond::detail {

inline double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline bool lu_singular(const Eigen::PartialPivLU<Mat>& lu) {
  const auto& m = lu.matrixLU();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (!(std::abs(m(i, i)) > 1e-14 * scale)) return true;
  return false;
}

/// Damped Newton on F(y) = 0 with Jacobian J(y).
template <class Residual, class Jacobian>
Vec newton(Vec y, Residual&& F, Jacobian&& J, const NewtonOptions& opt, const char* who) {
  Eigen::PartialPivLU<Mat> lu;
  Vec R = F(y);
  for (int it = 0; it < opt.max_iter; ++it) {
    lu.compute(J(y));
    if (lu_singular(lu)) throw SolverError(std::string(who) + ": singular Newton matrix");
    const Vec delta = -lu.solve(R);
    if (!delta.allFinite()) throw SolverError(std::string(who) + ": non-finite Newton step");
    if (inf_norm(delta) <= opt.step_tol * (1.0 + inf_norm(y))) return y + delta;
    const double r0 = R.norm();
    double h = 1.0;
    Vec trial = y + delta;
    Vec Rt = F(trial);
    for (int k = 0; k < opt.max_halvings && !(Rt.norm() <= r0); ++k) {
      h *= 0.5;
      trial = y + h * delta;
      Rt = F(trial);
    }
    y = std::move(trial);
    R = std::move(Rt);
  }
  throw SolverError(std::string(who) + ": Newton did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

}  // namespace diamond::detail
