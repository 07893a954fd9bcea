#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "esv/kernel.hpp"
#include "esv/masking.hpp"
#include "esv/rng.hpp"

namespace esv {

// Non-trivial coalitions to feed the weighted regression, with multiplicities.
// `exhaustive` marks full enumeration, in which case rows are weighted by the
// Shapley kernel; sampled rows carry their draw frequency instead (the sampler
// already draws proportionally to the kernel).
struct CoalitionSample {
  std::vector<CoalitionVector> vectors;
  std::vector<std::uint64_t> multiplicities;
  bool exhaustive = false;

  std::uint64_t total_draws() const {
    std::uint64_t n = 0;
    for (auto m : multiplicities) n += m;
    return n;
  }
};

// Coalition sampling design for the kernel regression. If the budget covers
// all 2^M - 2 non-trivial coalitions they are enumerated once each. Otherwise
// coalition sizes are drawn proportionally to the kernel mass per size,
// (M-1)/(s(M-s)), and every sampled coalition is paired with its complement.
inline CoalitionSample sample_coalitions(int m, std::uint64_t budget, std::uint64_t seed) {
  if (m < 2) throw InputDomainError("coalition sampling needs M >= 2");
  if (budget < 2) throw InputDomainError("coalition sampling needs budget >= 2");

  CoalitionSample out;
  if (m <= 62 && (std::uint64_t{1} << m) - 2 <= budget) {
    out.exhaustive = true;
    const std::uint64_t n_masks = std::uint64_t{1} << m;
    for (std::uint64_t mask = 1; mask + 1 < n_masks; ++mask) {
      out.vectors.push_back(CoalitionVector::from_mask(mask, m));
      out.multiplicities.push_back(1);
    }
    return out;
  }

  // Cumulative kernel mass per size; sizes 1..M-1.
  std::vector<double> cum(m - 1);
  double total = 0.0;
  for (int s = 1; s < m; ++s) {
    total += static_cast<double>(m - 1) / (static_cast<double>(s) * static_cast<double>(m - s));
    cum[s - 1] = total;
  }

  Rng rng(seed);
  std::unordered_map<CoalitionVector, std::size_t, CoalitionHash> index;
  auto add = [&](const CoalitionVector& z) {
    auto it = index.find(z);
    if (it == index.end()) {
      index.emplace(z, out.vectors.size());
      out.vectors.push_back(z);
      out.multiplicities.push_back(1);
    } else {
      ++out.multiplicities[it->second];
    }
  };

  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::uint64_t drawn = 0;
  while (drawn < budget) {
    const double u = rng.next_unit() * total;
    int s = 1;
    while (s < m - 1 && cum[s - 1] <= u) ++s;

    // Uniform subset of size s via partial Fisher-Yates.
    for (int i = 0; i < s; ++i) {
      const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m - i)));
      std::swap(order[i], order[j]);
    }
    CoalitionVector z(m);
    for (int i = 0; i < s; ++i) z.bits[order[i]] = 1;
    add(z);
    ++drawn;
    if (drawn == budget) break;

    CoalitionVector zc(m);
    for (int i = 0; i < m; ++i) zc.bits[i] = z.bits[i] ? 0 : 1;
    add(zc);
    ++drawn;
  }
  return out;
}

}  // namespace esv
