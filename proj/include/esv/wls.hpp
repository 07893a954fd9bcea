#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esv/common.hpp"

namespace esv {

namespace detail {

inline std::string collinear_column_message(const Eigen::MatrixXd& gram) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-10);
  const auto kernel = lu.kernel();
  std::string cols;
  for (int c = 0; c < gram.cols(); ++c) {
    double mag = 0.0;
    for (int k = 0; k < kernel.cols(); ++k) mag = std::max(mag, std::abs(kernel(c, k)));
    if (mag > 1e-8) cols += (cols.empty() ? "" : ", ") + std::to_string(c);
  }
  if (cols.empty()) cols = "unknown";
  return "singular weighted least squares system; collinear columns: " + cols;
}

}  // namespace detail

// Solves min_b sum_j w_j (y_j - X_j b)^2 via the normal equations with an
// LDLT factorization. Rank deficiency is reported, naming the collinear
// columns, rather than silently pseudo-inverted.
inline Eigen::VectorXd weighted_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& w) {
  const Eigen::MatrixXd Xw = w.asDiagonal() * X;
  const Eigen::MatrixXd gram = X.transpose() * Xw;
  const Eigen::VectorXd rhs = Xw.transpose() * y;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    throw SingularSystemError(detail::collinear_column_message(gram));
  }
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0.0) || d.cwiseAbs().minCoeff() <= dmax * 1e-12) {
    throw SingularSystemError(detail::collinear_column_message(gram));
  }
  return ldlt.solve(rhs);
}

// Weighted lasso via cyclic coordinate descent on
//   (1/2) sum_j w_j (y_j - X_j b)^2 + lambda * |b|_1.
// Converges on max parameter change below `tol`.
inline Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& X,
                                                const Eigen::VectorXd& y,
                                                const Eigen::VectorXd& w, double lambda,
                                                double tol = 1e-9, int max_iter = 100000) {
  const int p = static_cast<int>(X.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = y;
  Eigen::VectorXd col_mass(p);
  for (int i = 0; i < p; ++i) col_mass(i) = X.col(i).cwiseProduct(w).dot(X.col(i));

  for (int iter = 0; iter < max_iter; ++iter) {
    double max_delta = 0.0;
    for (int i = 0; i < p; ++i) {
      if (col_mass(i) <= 0.0) continue;
      const double grad = X.col(i).cwiseProduct(w).dot(residual) + col_mass(i) * beta(i);
      double next = 0.0;
      if (grad > lambda) {
        next = (grad - lambda) / col_mass(i);
      } else if (grad < -lambda) {
        next = (grad + lambda) / col_mass(i);
      }
      const double delta = next - beta(i);
      if (delta != 0.0) {
        residual -= delta * X.col(i);
        beta(i) = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tol) break;
  }
  return beta;
}

// Weighted mean squared error, the deviance used for lambda validation.
inline double weighted_deviance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = y - X * beta;
  const double wsum = w.sum();
  return wsum > 0.0 ? r.cwiseProduct(w).dot(r) / wsum : 0.0;
}

}  // namespace esv
