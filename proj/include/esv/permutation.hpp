#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "esv/explanation.hpp"
#include "esv/masking.hpp"
#include "esv/rng.hpp"

namespace esv {

namespace detail {

// Rewrites the last attribution as the telescoped residual so that the
// left-to-right sum base + phi_0 + ... + phi_{M-1} reproduces f(x) bit-exactly.
// By per-ordering telescoping the residual equals the mean marginal
// contribution of the last feature in exact arithmetic; the loop only absorbs
// accumulated rounding (a few ulp at most).
inline void pin_efficiency(Explanation& e, double fx) {
  if (e.phi.empty()) return;
  double acc = e.base_value;
  for (std::size_t i = 0; i + 1 < e.phi.size(); ++i) acc += e.phi[i];
  e.phi.back() = fx - acc;
  for (int pass = 0; pass < 64; ++pass) {
    const double total = acc + e.phi.back();
    if (total == fx) break;
    e.phi.back() += fx - total;
  }
}

}  // namespace detail

// Classical permutation estimator: the average marginal contribution of each
// feature over sampled orderings. When every ordering can be enumerated
// (M! <= n_orderings, M <= 8) the average runs over all of them exactly once.
inline Explanation permutation_estimate(const SetFunctionCache& cache, std::uint64_t n_orderings,
                                        std::uint64_t seed) {
  if (n_orderings == 0) throw InputDomainError("permutation estimate needs n_orderings >= 1");
  const int m = cache.coalition_size();
  const std::size_t evals_before = cache.evaluations();

  std::uint64_t factorial = 1;
  bool enumerable = m <= 8;
  if (enumerable) {
    for (int i = 2; i <= m; ++i) factorial *= static_cast<std::uint64_t>(i);
    enumerable = factorial <= n_orderings;
  }

  std::vector<double> sums(m, 0.0);
  std::uint64_t used = 0;
  const double base = cache.empty_value();

  auto accumulate_ordering = [&](const std::vector<int>& order) {
    CoalitionVector z(m);
    double prev = base;
    for (int idx : order) {
      z.bits[idx] = 1;
      const double cur = cache(z);
      sums[idx] += cur - prev;
      prev = cur;
    }
    ++used;
  };

  if (enumerable) {
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    do {
      accumulate_ordering(order);
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    Rng rng(seed);
    for (std::uint64_t k = 0; k < n_orderings; ++k) {
      accumulate_ordering(rng.permutation(m));
    }
  }

  Explanation e;
  e.estimator = "permutation";
  e.seed = seed;
  e.base_value = base;
  e.phi.resize(m);
  for (int i = 0; i < m; ++i) e.phi[i] = sums[i] / static_cast<double>(used);
  detail::pin_efficiency(e, cache.full_value());
  e.budget = cache.evaluations() - evals_before;
  return e;
}

}  // namespace esv
