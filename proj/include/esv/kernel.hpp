#pragma once

#include <string>

#include "esv/common.hpp"

namespace esv {

// C(n, k) as a double. Computed over min(k, n-k) factors so that the result
// is bit-identical for k and n-k.
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return c;
}

// Coalition weight of the Shapley kernel. The empty and full coalitions carry
// infinite weight; solvers absorb them as hard constraints instead.
struct KernelWeight {
  double value = 0.0;
  bool infinite = false;
};

inline KernelWeight shapley_kernel_weight(int m, int s) {
  if (m < 1) throw InputDomainError("kernel weight needs M >= 1");
  if (s < 0 || s > m) {
    throw InputDomainError("coalition size " + std::to_string(s) + " out of range for M=" +
                           std::to_string(m));
  }
  if (s == 0 || s == m) return KernelWeight{0.0, true};
  const double denom = binomial(m, s) * static_cast<double>(s) * static_cast<double>(m - s);
  return KernelWeight{static_cast<double>(m - 1) / denom, false};
}

// |S|! (M-|S|-1)! / M!  ==  1 / (M * C(M-1, |S|)); the subset weight in the
// direct Shapley sum.
inline double shapley_subset_weight(int m, int subset_size) {
  return 1.0 / (static_cast<double>(m) * binomial(m - 1, subset_size));
}

}  // namespace esv
