#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "esv/explanation.hpp"
#include "esv/kernel.hpp"
#include "esv/masking.hpp"

namespace esv {

inline constexpr int kExactFeatureCap = 20;

// Exact Shapley values of an arbitrary set function over M features:
//   phi_i = sum over S not containing i of |S|!(M-|S|-1)!/M! * [v(S+i) - v(S)]
// Enumerates all 2^M coalitions.
inline Explanation exact_shapley_game(const std::function<double(const CoalitionVector&)>& value,
                                      int m, int cap = kExactFeatureCap) {
  if (m < 1) throw InputDomainError("exact estimation needs M >= 1");
  if (m > cap) {
    throw BudgetRefusedError("exact estimation refused: M=" + std::to_string(m) +
                             " exceeds the cap of " + std::to_string(cap) +
                             " (2^M coalition evaluations)");
  }

  std::vector<double> weight_by_size(m);
  for (int s = 0; s < m; ++s) weight_by_size[s] = shapley_subset_weight(m, s);

  const std::uint64_t n_masks = std::uint64_t{1} << m;
  std::vector<double> values(n_masks);
  std::vector<int> sizes(n_masks);
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    values[mask] = value(CoalitionVector::from_mask(mask, m));
    sizes[mask] = __builtin_popcountll(mask);
  }

  Explanation e;
  e.estimator = "exact";
  e.base_value = values[0];
  e.phi.assign(m, 0.0);
  for (std::uint64_t mask = 0; mask < n_masks; ++mask) {
    const double w = weight_by_size[sizes[mask]];
    for (int i = 0; i < m; ++i) {
      if (mask & (std::uint64_t{1} << i)) continue;
      e.phi[i] += w * (values[mask | (std::uint64_t{1} << i)] - values[mask]);
    }
  }
  return e;
}

inline Explanation exact_shapley(const SetFunctionCache& cache, int cap = kExactFeatureCap) {
  const std::size_t before = cache.evaluations();
  Explanation e = exact_shapley_game([&cache](const CoalitionVector& z) { return cache(z); },
                                     cache.coalition_size(), cap);
  e.budget = cache.evaluations() - before;
  return e;
}

}  // namespace esv
