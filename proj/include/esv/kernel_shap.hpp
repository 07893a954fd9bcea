#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "esv/explanation.hpp"
#include "esv/kernel.hpp"
#include "esv/masking.hpp"
#include "esv/sampling.hpp"
#include "esv/wls.hpp"

namespace esv {

struct LassoSpec {
  enum class Mode { off, automatic, fixed };

  Mode mode = Mode::off;
  double lambda = 0.0;

  static LassoSpec off() { return {}; }
  static LassoSpec automatic() { return {Mode::automatic, 0.0}; }
  static LassoSpec fixed(double lambda) {
    if (!(lambda >= 0.0)) throw InputDomainError("lasso lambda must be >= 0");
    return {Mode::fixed, lambda};
  }

  // Accepts "off" | "auto" | a non-negative number.
  static LassoSpec parse(const std::string& text) {
    if (text == "off") return off();
    if (text == "auto") return automatic();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !(v >= 0.0)) {
      throw ParseError("bad --lasso value \"" + text + "\" (expected off|auto|lambda)");
    }
    return fixed(v);
  }
};

namespace detail {

// Fills the memo for every coalition in the list; workers only insert into the
// concurrent memo, so results are independent of the thread count.
inline void prefill_cache(const SetFunctionCache& cache,
                          const std::vector<CoalitionVector>& vectors, int threads) {
  if (threads <= 1 || vectors.size() < 64) {
    for (const auto& z : vectors) cache.set_value(z);
    return;
  }
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), vectors.size());
  std::vector<std::thread> workers;
  workers.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t j = t; j < vectors.size(); j += n_workers) cache.set_value(vectors[j]);
    });
  }
  for (auto& w : workers) w.join();
}

struct EliminatedSystem {
  Eigen::MatrixXd X;   // columns are features 0..M-2; feature M-1 is eliminated
  Eigen::VectorXd y;   // set values offset by the two hard constraints
  Eigen::VectorXd w;
  double base = 0.0;   // f_x(empty)
  double fx = 0.0;     // f_x(full)
  double span = 0.0;   // fx - base, the coalition-sum target
};

// Applies the infinite-weight coalitions as hard constraints: phi_0 = f_x(0)
// and sum(phi) = f(x) - phi_0, eliminating the last attribution analytically.
inline EliminatedSystem build_eliminated_system(const SetFunctionCache& cache,
                                                const CoalitionSample& sample, int threads) {
  const int m = cache.coalition_size();
  if (m < 2) throw InputDomainError("kernel regression needs M >= 2");
  if (sample.vectors.empty()) throw InputDomainError("kernel regression needs coalitions");

  prefill_cache(cache, sample.vectors, threads);

  EliminatedSystem sys;
  sys.base = cache.empty_value();
  sys.fx = cache.full_value();
  sys.span = sys.fx - sys.base;

  const int n = static_cast<int>(sample.vectors.size());
  sys.X.resize(n, m - 1);
  sys.y.resize(n);
  sys.w.resize(n);
  for (int j = 0; j < n; ++j) {
    const CoalitionVector& z = sample.vectors[j];
    const int s = z.count();
    if (s == 0 || s == m) {
      throw InputDomainError("kernel regression rows must be non-trivial coalitions");
    }
    const double mult = static_cast<double>(sample.multiplicities[j]);
    sys.w(j) = sample.exhaustive ? mult * shapley_kernel_weight(m, s).value : mult;
    const double zlast = static_cast<double>(z.bits[m - 1]);
    sys.y(j) = cache(z) - sys.base - zlast * sys.span;
    for (int i = 0; i + 1 < m; ++i) {
      sys.X(j, i) = static_cast<double>(z.bits[i]) - zlast;
    }
  }
  return sys;
}

inline std::vector<int> lasso_support(const Eigen::VectorXd& beta) {
  std::vector<int> support;
  for (int i = 0; i < beta.size(); ++i) {
    if (beta(i) != 0.0) support.push_back(i);
  }
  return support;
}

// Unpenalized weighted refit restricted to `support`; excluded coefficients
// stay exactly zero.
inline Eigen::VectorXd refit_on_support(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& w,
                                        const std::vector<int>& support) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  if (support.empty()) return beta;
  Eigen::MatrixXd Xs(X.rows(), static_cast<int>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) Xs.col(static_cast<int>(k)) = X.col(support[k]);
  const Eigen::VectorXd bs = weighted_least_squares(Xs, y, w);
  for (std::size_t k = 0; k < support.size(); ++k) beta(support[k]) = bs(static_cast<int>(k));
  return beta;
}

// Debiased lasso: pick lambda on a 5-point log-spaced path by weighted
// deviance on held-out rows (every 5th row), re-select the support on all
// rows at the winning lambda, then refit unpenalized on the support.
inline Eigen::VectorXd debiased_lasso(const EliminatedSystem& sys, const LassoSpec& spec) {
  double lambda = spec.lambda;
  if (spec.mode == LassoSpec::Mode::automatic) {
    const double lambda_max =
        (sys.X.transpose() * sys.w.cwiseProduct(sys.y).matrix()).cwiseAbs().maxCoeff();
    if (lambda_max <= 0.0) return Eigen::VectorXd::Zero(sys.X.cols());

    const int n = static_cast<int>(sys.X.rows());
    std::vector<int> train, held;
    for (int j = 0; j < n; ++j) (j % 5 == 4 ? held : train).push_back(j);
    if (held.empty() || train.empty()) {
      train.resize(n);
      held.resize(n);
      for (int j = 0; j < n; ++j) train[j] = held[j] = j;
    }
    auto take = [](const Eigen::MatrixXd& M, const std::vector<int>& rows) {
      Eigen::MatrixXd out(static_cast<int>(rows.size()), M.cols());
      for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<int>(k)) = M.row(rows[k]);
      return out;
    };
    auto take_v = [](const Eigen::VectorXd& v, const std::vector<int>& rows) {
      Eigen::VectorXd out(static_cast<int>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<int>(k)) = v(rows[k]);
      return out;
    };
    const Eigen::MatrixXd Xt = take(sys.X, train), Xh = take(sys.X, held);
    const Eigen::VectorXd yt = take_v(sys.y, train), yh = take_v(sys.y, held);
    const Eigen::VectorXd wt = take_v(sys.w, train), wh = take_v(sys.w, held);

    double best_dev = 0.0;
    bool have_best = false;
    for (int k = 0; k < 5; ++k) {
      const double cand = lambda_max * std::pow(10.0, -0.75 * k);
      const Eigen::VectorXd sel = lasso_coordinate_descent(Xt, yt, wt, cand);
      Eigen::VectorXd fit;
      try {
        fit = refit_on_support(Xt, yt, wt, lasso_support(sel));
      } catch (const SingularSystemError&) {
        continue;  // support too rich for the train split; larger lambda stands
      }
      const double dev = weighted_deviance(Xh, yh, wh, fit);
      if (!have_best || dev < best_dev * (1.0 - 1e-12) - 1e-300) {
        best_dev = dev;
        lambda = cand;
        have_best = true;
      }
    }
    if (!have_best) lambda = lambda_max;
  }

  const Eigen::VectorXd sel = lasso_coordinate_descent(sys.X, sys.y, sys.w, lambda);
  return refit_on_support(sys.X, sys.y, sys.w, lasso_support(sel));
}

inline Explanation finish_kernel_explanation(const EliminatedSystem& sys,
                                             const Eigen::VectorXd& beta, std::string estimator,
                                             std::uint64_t seed) {
  Explanation e;
  e.estimator = std::move(estimator);
  e.seed = seed;
  e.base_value = sys.base;
  const int m = static_cast<int>(beta.size()) + 1;
  e.phi.resize(m);
  double partial = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    e.phi[i] = beta(i);
    partial += beta(i);
  }
  e.phi[m - 1] = sys.span - partial;
  return e;
}

}  // namespace detail

// Shapley-kernel weighted linear regression (optionally with a debiased lasso
// support selection). With full coalition enumeration this recovers the exact
// Shapley values of the set function.
inline Explanation kernel_shap_solve(const SetFunctionCache& cache, const CoalitionSample& sample,
                                     const LassoSpec& lasso = LassoSpec::off(),
                                     std::uint64_t seed = 0, int threads = 1) {
  const std::size_t before = cache.evaluations();
  const auto sys = detail::build_eliminated_system(cache, sample, threads);

  Eigen::VectorXd beta;
  std::string name;
  if (lasso.mode == LassoSpec::Mode::off) {
    beta = weighted_least_squares(sys.X, sys.y, sys.w);
    name = "kernel";
  } else {
    beta = detail::debiased_lasso(sys, lasso);
    name = lasso.mode == LassoSpec::Mode::automatic
               ? "kernel(lasso=auto)"
               : "kernel(lasso=" + fmt_g(lasso.lambda, 6) + ")";
  }
  Explanation e = detail::finish_kernel_explanation(sys, beta, std::move(name), seed);
  e.budget = cache.evaluations() - before;
  return e;
}

// LIME-style baseline: exponential kernel on the Hamming distance from the
// full coalition, free intercept, no efficiency constraint.
inline Explanation lime_baseline_solve(const SetFunctionCache& cache,
                                       const CoalitionSample& sample, double kernel_width,
                                       std::uint64_t seed = 0, int threads = 1) {
  if (!(kernel_width > 0.0)) throw InputDomainError("lime kernel width must be > 0");
  const int m = cache.coalition_size();
  if (sample.vectors.empty()) throw InputDomainError("lime regression needs coalitions");

  const std::size_t before = cache.evaluations();
  detail::prefill_cache(cache, sample.vectors, threads);

  const int n = static_cast<int>(sample.vectors.size());
  Eigen::MatrixXd X(n, m + 1);
  Eigen::VectorXd y(n), w(n);
  for (int j = 0; j < n; ++j) {
    const CoalitionVector& z = sample.vectors[j];
    const double d = static_cast<double>(m - z.count());
    w(j) = static_cast<double>(sample.multiplicities[j]) *
           std::exp(-(d * d) / (kernel_width * kernel_width));
    y(j) = cache(z);
    X(j, 0) = 1.0;
    for (int i = 0; i < m; ++i) X(j, 1 + i) = static_cast<double>(z.bits[i]);
  }

  const Eigen::VectorXd beta = weighted_least_squares(X, y, w);
  Explanation e;
  e.estimator = "lime(sigma=" + fmt_g(kernel_width, 6) + ")";
  e.seed = seed;
  e.base_value = beta(0);
  e.phi.resize(m);
  for (int i = 0; i < m; ++i) e.phi[i] = beta(1 + i);
  e.budget = cache.evaluations() - before;
  return e;
}

inline double default_lime_width(int m) { return 0.75 * std::sqrt(static_cast<double>(m)); }

}  // namespace esv
