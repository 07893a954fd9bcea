#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "esv/common.hpp"
#include "esv/explanation.hpp"
#include "esv/svg.hpp"

namespace esv {

inline constexpr const char* kPositiveColor = "#ff0d57";
inline constexpr const char* kNegativeColor = "#1e88e5";

struct ForcePlotSpec {
  Explanation explanation;
  double width = 900.0;
  double height = 120.0;
  double scale = 0.0;  // pixels per unit output; 0 derives it from the data
};

struct StackPlotSpec {
  std::vector<Explanation> explanations;
  std::vector<int> order;      // permutation of explanation indices; empty = identity
  double column_width = 0.0;   // 0 divides the canvas evenly
  double width = 900.0;
  double height = 350.0;
};

namespace detail {

// Segment order within a plot: positives before negatives, each by decreasing
// magnitude, index as the tie break.
inline std::vector<int> segment_order(const std::vector<double>& phi) {
  std::vector<int> pos, neg;
  for (int i = 0; i < static_cast<int>(phi.size()); ++i) {
    if (phi[i] > 0.0) pos.push_back(i);
    if (phi[i] < 0.0) neg.push_back(i);
  }
  auto by_magnitude = [&phi](int a, int b) {
    const double ma = std::abs(phi[a]), mb = std::abs(phi[b]);
    return ma != mb ? ma > mb : a < b;
  };
  std::sort(pos.begin(), pos.end(), by_magnitude);
  std::sort(neg.begin(), neg.end(), by_magnitude);
  pos.insert(pos.end(), neg.begin(), neg.end());
  return pos;
}

struct Extent {
  double lo;    // min(base, final): negatives never undershoot the final value
  double hi;    // base + sum of positives, the rightmost reach
  double base;
  double final_value;
};

inline Extent force_extent(const Explanation& e) {
  double pos_sum = 0.0;
  for (double p : e.phi) pos_sum += p > 0.0 ? p : 0.0;
  Extent ext;
  ext.base = e.base_value;
  ext.final_value = e.total();
  ext.lo = std::min(ext.base, ext.final_value);
  ext.hi = ext.base + pos_sum;
  return ext;
}

inline void check_renderable(const Explanation& e) {
  if (!std::isfinite(e.base_value) || !all_finite(e.phi)) {
    throw RenderInputError("explanation contains non-finite values");
  }
}

}  // namespace detail

// Single-prediction force layout: red segments push the output right from the
// base value, blue segments push it left, and a marker ends at the prediction.
inline std::string render_force_plot(const ForcePlotSpec& spec) {
  const Explanation& e = spec.explanation;
  detail::check_renderable(e);
  if (spec.scale < 0.0) throw RenderInputError("force plot scale must be positive");

  const double margin = 40.0;
  const double usable = std::max(spec.width - 2.0 * margin, 1.0);
  const auto ext = detail::force_extent(e);

  double scale = spec.scale;
  if (scale == 0.0) {
    const double range = ext.hi - ext.lo;
    scale = range > 0.0 ? usable / range : 1.0;
  }
  const auto px = [&](double v) { return margin + scale * (v - ext.lo); };

  const auto names = e.feature_names.empty() ? default_feature_names(e.size()) : e.feature_names;
  SvgDocument doc(spec.width, spec.height);
  const double band_top = spec.height * 0.35;
  const double band_h = spec.height * 0.3;
  const double mid = band_top + band_h / 2.0;

  doc.line(margin * 0.25, mid, spec.width - margin * 0.25, mid, "#cccccc", 1.0, "axis");

  double cursor = e.base_value;
  for (int i : detail::segment_order(e.phi)) {
    const double v = e.phi[i];
    const std::string label = names[i] + " = " + fmt_g(v, 6);
    if (v > 0.0) {
      doc.rect(px(cursor), band_top, scale * v, band_h, kPositiveColor, "segment pos", label);
      cursor += v;
    } else {
      doc.rect(px(cursor + v), band_top, scale * (-v), band_h, kNegativeColor, "segment neg",
               label);
      cursor += v;
    }
  }

  doc.line(px(e.base_value), band_top - 8.0, px(e.base_value), band_top + band_h + 8.0,
           "#999999", 1.0, "base-marker");
  doc.text(px(e.base_value), band_top - 12.0, "base " + fmt_g(e.base_value, 6), "#666666", 10.0,
           "middle");
  doc.line(px(ext.final_value), band_top - 14.0, px(ext.final_value), band_top + band_h + 14.0,
           "#222222", 1.5, "output-marker");
  doc.text(px(ext.final_value), spec.height - 8.0, "f(x) = " + fmt_g(ext.final_value, 6),
           "#222222", 10.0, "middle");
  return doc.str();
}

// Leaf order of average-linkage agglomerative clustering on the Euclidean
// distance between attribution vectors; ties always break toward the lowest
// original index, so the ordering is deterministic.
inline std::vector<int> order_by_similarity(const std::vector<Explanation>& explanations) {
  const int n = static_cast<int>(explanations.size());
  if (n == 0) throw InputShapeError("similarity ordering needs at least one explanation");
  const int m = explanations[0].size();
  for (const auto& e : explanations) {
    if (e.size() != m) throw InputShapeError("explanations have mismatched feature counts");
  }
  if (n == 1) return {0};

  auto dist = [&](int a, int b) {
    double d2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = explanations[a].phi[i] - explanations[b].phi[i];
      d2 += d * d;
    }
    return std::sqrt(d2);
  };

  struct Cluster {
    std::vector<int> leaves;
    int min_index;
  };
  std::vector<Cluster> clusters;
  clusters.reserve(n);
  for (int i = 0; i < n; ++i) clusters.push_back({{i}, i});

  while (clusters.size() > 1) {
    double best = 0.0;
    std::size_t bi = 0, bj = 1;
    bool have = false;
    for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double sum = 0.0;
        for (int a : clusters[i].leaves) {
          for (int b : clusters[j].leaves) sum += dist(a, b);
        }
        const double avg =
            sum / static_cast<double>(clusters[i].leaves.size() * clusters[j].leaves.size());
        if (!have || avg < best) {
          best = avg;
          bi = i;
          bj = j;
          have = true;
        }
      }
    }
    Cluster merged;
    Cluster& a = clusters[bi];
    Cluster& b = clusters[bj];
    const bool a_first = a.min_index < b.min_index;
    const Cluster& first = a_first ? a : b;
    const Cluster& second = a_first ? b : a;
    merged.leaves = first.leaves;
    merged.leaves.insert(merged.leaves.end(), second.leaves.begin(), second.leaves.end());
    merged.min_index = std::min(a.min_index, b.min_index);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    clusters[bi] = std::move(merged);
  }
  return clusters[0].leaves;
}

// Force plots rotated 90 degrees and stacked horizontally, one column per
// explanation, sharing a vertical scale.
inline std::string render_stack_plot(const StackPlotSpec& spec) {
  const int n = static_cast<int>(spec.explanations.size());
  if (n == 0) throw InputShapeError("stack plot needs at least one explanation");
  const int m = spec.explanations[0].size();
  for (const auto& e : spec.explanations) {
    detail::check_renderable(e);
    if (e.size() != m) throw InputShapeError("explanations have mismatched feature counts");
  }
  std::vector<int> order = spec.order;
  if (order.empty()) {
    order.resize(n);
    for (int i = 0; i < n; ++i) order[i] = i;
  } else {
    std::vector<int> seen(n, 0);
    for (int idx : order) {
      if (idx < 0 || idx >= n || seen[idx]++) {
        throw InputShapeError("stack plot order is not a permutation");
      }
    }
    if (static_cast<int>(order.size()) != n) {
      throw InputShapeError("stack plot order is not a permutation");
    }
  }

  const double margin = 40.0;
  double vmin = 0.0, vmax = 0.0;
  bool have = false;
  for (const auto& e : spec.explanations) {
    const auto ext = detail::force_extent(e);
    vmin = have ? std::min(vmin, ext.lo) : ext.lo;
    vmax = have ? std::max(vmax, ext.hi) : ext.hi;
    have = true;
  }
  if (vmax <= vmin) vmax = vmin + 1.0;

  const double usable_h = std::max(spec.height - 2.0 * margin, 1.0);
  const double scale_y = usable_h / (vmax - vmin);
  const auto py = [&](double v) { return spec.height - margin - scale_y * (v - vmin); };
  const double usable_w = std::max(spec.width - 2.0 * margin, 1.0);
  const double colw =
      spec.column_width > 0.0 ? spec.column_width : usable_w / static_cast<double>(n);
  const double bar_w = colw * 0.9;

  SvgDocument doc(spec.width, spec.height);
  const auto names = spec.explanations[0].feature_names.empty()
                         ? default_feature_names(m)
                         : spec.explanations[0].feature_names;

  doc.line(margin * 0.5, py(spec.explanations[order[0]].base_value), margin + colw * n,
           py(spec.explanations[order[0]].base_value), "#999999", 1.0, "base-marker");

  for (int col = 0; col < n; ++col) {
    const Explanation& e = spec.explanations[order[col]];
    const double x0 = margin + colw * col + (colw - bar_w) / 2.0;
    double cursor = e.base_value;
    for (int i : detail::segment_order(e.phi)) {
      const double v = e.phi[i];
      const std::string label = names[i] + " = " + fmt_g(v, 6);
      if (v > 0.0) {
        doc.rect(x0, py(cursor + v), bar_w, scale_y * v, kPositiveColor, "segment pos", label);
      } else {
        doc.rect(x0, py(cursor), bar_w, scale_y * (-v), kNegativeColor, "segment neg", label);
      }
      cursor += v;
    }
    doc.line(x0, py(e.total()), x0 + bar_w, py(e.total()), "#222222", 1.5, "output-marker");
  }
  return doc.str();
}

}  // namespace esv
