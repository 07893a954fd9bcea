#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esv/common.hpp"
#include "esv/masking.hpp"
#include "esv/model.hpp"
#include "esv/rng.hpp"

namespace esv {

// Random full binary tree of the given depth. Split features come from
// `allowed`; the first internal nodes are forced to cover `cover` (shuffled)
// so required features always appear at least once. Thresholds are drawn in
// (0.1, 0.9) to bite on unit-interval data; leaves in (-1, 1).
inline Tree random_tree(int depth, const std::vector<int>& allowed, const std::vector<int>& cover,
                        Rng& rng) {
  const int n_internal = (1 << depth) - 1;
  std::vector<int> features(n_internal);
  std::vector<int> shuffled_cover = cover;
  rng.shuffle(shuffled_cover);
  for (int i = 0; i < n_internal; ++i) {
    features[i] = i < static_cast<int>(shuffled_cover.size())
                      ? shuffled_cover[i]
                      : allowed[rng.next_below(allowed.size())];
  }

  Tree tree;
  int next_internal = 0;
  // Depth-first construction; children always follow their parent.
  auto build = [&](auto&& self, int remaining) -> int {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (remaining == 0) {
      tree.nodes[idx].leaf = rng.next_range(-1.0, 1.0);
      return idx;
    }
    tree.nodes[idx].feature = features[next_internal++];
    tree.nodes[idx].threshold = rng.next_range(0.1, 0.9);
    const int left = self(self, remaining - 1);
    const int right = self(self, remaining - 1);
    tree.nodes[idx].left = left;
    tree.nodes[idx].right = right;
    return idx;
  };
  build(build, depth);
  return tree;
}

inline TreeEnsemble random_tree_ensemble(int n_features, int n_trees, int depth,
                                         const std::vector<int>& allowed,
                                         const std::vector<int>& cover, std::uint64_t seed) {
  Rng rng(seed);
  TreeEnsemble ens;
  ens.n_features = n_features;
  ens.base_score = rng.next_range(-0.5, 0.5);
  for (int t = 0; t < n_trees; ++t) {
    ens.trees.push_back(random_tree(depth, allowed, t == 0 ? cover : std::vector<int>{}, rng));
  }
  ens.validate();
  return ens;
}

inline std::vector<int> index_range(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Figure-style scenario models: a dense depth-6 tree touching all 10 features
// and a sparse depth-4 tree over features {0,1,2} of 100.
inline TreeEnsemble generate_scenario_tree(const std::string& kind, std::uint64_t seed) {
  if (kind == "dense10") {
    return random_tree_ensemble(10, 1, 6, index_range(10), index_range(10), mix64(seed, 0xd10));
  }
  if (kind == "sparse3of100") {
    return random_tree_ensemble(100, 1, 4, {0, 1, 2}, {0, 1, 2}, mix64(seed, 0x53100));
  }
  throw InputDomainError("unknown scenario kind \"" + kind + "\"");
}

inline Model generate_scenario_models(const std::string& kind, std::uint64_t seed) {
  return generate_scenario_tree(kind, seed).as_model();
}

inline FeatureVector random_instance(int p, std::uint64_t seed) {
  Rng rng(seed);
  FeatureVector x(p);
  for (auto& v : x) v = rng.next_unit();
  return x;
}

inline BackgroundSet random_background(int p, int rows, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> data(rows);
  for (auto& row : data) {
    row.resize(p);
    for (auto& v : row) v = rng.next_unit();
  }
  return BackgroundSet(std::move(data));
}

}  // namespace esv
