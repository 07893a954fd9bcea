#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "esv/common.hpp"
#include "esv/model.hpp"

namespace esv {

// Binary feature-presence vector z' of length M. Bit 1 means the group's
// original values are known (taken from the explained instance), bit 0 means
// they are missing (replaced from the background distribution).
struct CoalitionVector {
  std::vector<std::uint8_t> bits;

  CoalitionVector() = default;
  explicit CoalitionVector(int m) : bits(m, 0) {}

  static CoalitionVector ones(int m) {
    CoalitionVector z(m);
    for (auto& b : z.bits) b = 1;
    return z;
  }

  static CoalitionVector from_mask(std::uint64_t mask, int m) {
    CoalitionVector z(m);
    for (int i = 0; i < m; ++i) z.bits[i] = (mask >> i) & 1u;
    return z;
  }

  int size() const { return static_cast<int>(bits.size()); }

  int count() const {
    int c = 0;
    for (auto b : bits) c += b;
    return c;
  }

  bool operator==(const CoalitionVector& o) const { return bits == o.bits; }
};

struct CoalitionHash {
  std::size_t operator()(const CoalitionVector& z) const {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (auto b : z.bits) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Partition of the original feature indices {0..P-1} into M non-empty groups.
struct FeatureGrouping {
  std::vector<std::vector<int>> groups;

  static FeatureGrouping singletons(int p) {
    FeatureGrouping g;
    g.groups.resize(p);
    for (int i = 0; i < p; ++i) g.groups[i] = {i};
    return g;
  }

  int group_count() const { return static_cast<int>(groups.size()); }

  void validate(int p) const {
    std::vector<int> seen(p, 0);
    for (const auto& g : groups) {
      if (g.empty()) throw InputShapeError("grouping contains an empty group");
      for (int idx : g) {
        if (idx < 0 || idx >= p) {
          throw InputShapeError("grouping index " + std::to_string(idx) + " out of range");
        }
        if (seen[idx]++) {
          throw InputShapeError("grouping repeats index " + std::to_string(idx));
        }
      }
    }
    for (int i = 0; i < p; ++i) {
      if (!seen[i]) throw InputShapeError("grouping misses index " + std::to_string(i));
    }
  }

  static FeatureGrouping from_json(const nlohmann::json& j) {
    FeatureGrouping g;
    auto it = j.find("groups");
    if (it == j.end()) throw ParseError("grouping document missing \"groups\"");
    g.groups = it->get<std::vector<std::vector<int>>>();
    return g;
  }
};

// Background rows used to fill in masked features (marginal expectation).
class BackgroundSet {
 public:
  BackgroundSet() = default;
  explicit BackgroundSet(std::vector<FeatureVector> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw InputShapeError("background set must have at least one row");
    for (const auto& r : rows_) {
      if (r.size() != rows_[0].size()) {
        throw InputShapeError("background rows have inconsistent lengths");
      }
      require_finite(r, "background row");
    }
  }

  const std::vector<FeatureVector>& rows() const { return rows_; }
  int n_features() const { return static_cast<int>(rows_[0].size()); }
  int size() const { return static_cast<int>(rows_.size()); }

  FeatureVector mean() const {
    FeatureVector m(rows_[0].size(), 0.0);
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += r[i];
    }
    for (auto& v : m) v /= static_cast<double>(rows_.size());
    return m;
  }

 private:
  std::vector<FeatureVector> rows_;
};

// h_x^{-1}: maps a coalition back into the original input space. Groups with
// bit 1 take the instance's values, groups with bit 0 the background row's.
inline FeatureVector compose(const FeatureVector& x, const CoalitionVector& z,
                             const FeatureVector& b, const FeatureGrouping& grouping) {
  if (x.size() != b.size()) throw InputShapeError("instance/background length mismatch");
  if (z.size() != grouping.group_count()) {
    throw InputShapeError("coalition length does not match group count");
  }
  FeatureVector out = b;
  for (int g = 0; g < z.size(); ++g) {
    if (z.bits[g]) {
      for (int idx : grouping.groups[g]) out[idx] = x[idx];
    }
  }
  return out;
}

// Memoized set function f_x(S): the expected model output with features in S
// known and the rest drawn from the background set. Thread-safe; concurrent
// recomputation of the same key is benign (values are deterministic) and the
// first inserted value wins, so cache hits equal recomputation exactly.
class SetFunctionCache {
 public:
  SetFunctionCache(Model model, FeatureVector x, FeatureGrouping grouping,
                   BackgroundSet background)
      : model_(std::move(model)),
        x_(std::move(x)),
        grouping_(std::move(grouping)),
        background_(std::move(background)) {
    if (static_cast<int>(x_.size()) != model_.n_features()) {
      throw InputShapeError("instance length does not match model n_features");
    }
    if (background_.n_features() != model_.n_features()) {
      throw InputShapeError("background width does not match model n_features");
    }
    require_finite(x_, "instance");
    grouping_.validate(model_.n_features());
  }

  SetFunctionCache(Model model, FeatureVector x, BackgroundSet background)
      : SetFunctionCache(std::move(model), x,
                         FeatureGrouping::singletons(static_cast<int>(x.size())),
                         std::move(background)) {}

  int coalition_size() const { return grouping_.group_count(); }
  const Model& model() const { return model_; }
  const FeatureVector& instance() const { return x_; }
  const FeatureGrouping& grouping() const { return grouping_; }
  const BackgroundSet& background() const { return background_; }

  double set_value(const CoalitionVector& z) const {
    if (z.size() != coalition_size()) {
      throw InputShapeError("coalition length does not match group count");
    }
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(z);
      if (it != memo_.end()) return it->second;
    }
    double sum = 0.0;
    for (const FeatureVector& b : background_.rows()) {
      sum += model_(compose(x_, z, b, grouping_));
    }
    const double value = sum / static_cast<double>(background_.size());
    std::lock_guard<std::mutex> lock(mu_);
    return memo_.emplace(z, value).first->second;
  }

  double operator()(const CoalitionVector& z) const { return set_value(z); }

  double empty_value() const { return set_value(CoalitionVector(coalition_size())); }
  double full_value() const { return set_value(CoalitionVector::ones(coalition_size())); }

  // Distinct set-function evaluations so far (the benchmark's budget unit).
  std::size_t evaluations() const {
    std::lock_guard<std::mutex> lock(mu_);
    return memo_.size();
  }

 private:
  Model model_;
  FeatureVector x_;
  FeatureGrouping grouping_;
  BackgroundSet background_;
  mutable std::mutex mu_;
  mutable std::unordered_map<CoalitionVector, double, CoalitionHash> memo_;
};

}  // namespace esv
