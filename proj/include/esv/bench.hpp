#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "esv/csv.hpp"
#include "esv/exact.hpp"
#include "esv/explanation.hpp"
#include "esv/kernel_shap.hpp"
#include "esv/masking.hpp"
#include "esv/model.hpp"
#include "esv/model_gen.hpp"
#include "esv/permutation.hpp"
#include "esv/sampling.hpp"
#include "esv/svg.hpp"

namespace esv {

inline const std::vector<std::string>& bench_estimators() {
  static const std::vector<std::string> names = {"kernel-debiased-lasso", "permutation",
                                                 "lime-baseline"};
  return names;
}

// Estimator accuracy versus model-evaluation budget, with replicate bands.
struct BenchScenario {
  std::string name = "custom";
  Model model;
  FeatureVector instance;
  BackgroundSet background;
  std::vector<int> tracked;
  std::vector<std::uint64_t> budgets = {32, 64, 128, 256, 512, 1024};
  int replicates = 200;
  std::uint64_t seed = 0;
  // Exact ground truth is computed over these features only, every other
  // feature being a proven dummy (phi = 0). Empty means all features.
  std::vector<int> used_features;

  void validate() const {
    if (!model.valid()) throw InputShapeError("scenario has no model");
    if (replicates < 2) throw InputDomainError("scenario needs replicates >= 2");
    if (budgets.empty()) throw InputDomainError("scenario needs budgets");
    for (std::size_t i = 1; i < budgets.size(); ++i) {
      if (budgets[i] <= budgets[i - 1]) {
        throw InputDomainError("scenario budgets must be strictly increasing");
      }
    }
    if (tracked.empty()) throw InputDomainError("scenario needs tracked features");
    for (int f : tracked) {
      if (f < 0 || f >= model.n_features()) {
        throw InputDomainError("tracked feature " + std::to_string(f) + " out of range");
      }
    }
    for (int f : used_features) {
      if (f < 0 || f >= model.n_features()) {
        throw InputDomainError("used feature " + std::to_string(f) + " out of range");
      }
    }
  }

  static BenchScenario builtin(const std::string& kind, std::uint64_t seed, bool fast) {
    BenchScenario sc;
    sc.name = kind;
    sc.seed = seed;
    sc.replicates = fast ? 20 : 200;
    const TreeEnsemble tree = generate_scenario_tree(kind, seed);
    sc.model = tree.as_model();
    const int p = tree.n_features;
    sc.instance = random_instance(p, mix64(seed, 0x1a57));
    sc.background = random_background(p, 10, mix64(seed, 0xb6));
    if (kind == "dense10") {
      sc.tracked = {0, 1, 2};
    } else {
      sc.tracked = {0, 1, 3};  // two used features and one unused
      sc.used_features = {0, 1, 2};
    }
    sc.validate();
    return sc;
  }
};

struct BenchCell {
  bool skipped = false;
  std::string skip_reason;
  std::uint64_t evals = 0;  // max distinct set-function evaluations consumed
  std::vector<double> mean, p10, p90;  // per tracked feature
};

struct ConvergenceReport {
  std::string scenario_name;
  std::uint64_t seed = 0;
  int replicates = 0;
  std::vector<std::string> estimators;
  std::vector<int> tracked;
  std::vector<std::uint64_t> budgets;
  std::vector<double> truth;                  // per tracked feature
  std::vector<std::vector<BenchCell>> cells;  // [estimator][budget]
};

// Interpolated percentile of an ascending-sorted sample, q in [0,1].
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InputDomainError("percentile of an empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace detail {

// Exact reference values for the tracked features. When `used_features` names
// a subset, the game is reduced to it (all other features are dummies with
// exactly zero attribution), which keeps wide sparse models enumerable.
inline std::vector<double> bench_ground_truth(const BenchScenario& sc) {
  std::vector<double> truth(sc.tracked.size(), 0.0);
  const int p = sc.model.n_features();
  if (sc.used_features.empty()) {
    SetFunctionCache cache(sc.model, sc.instance, sc.background);
    const Explanation exact = exact_shapley(cache);
    for (std::size_t k = 0; k < sc.tracked.size(); ++k) truth[k] = exact.phi[sc.tracked[k]];
    return truth;
  }
  SetFunctionCache cache(sc.model, sc.instance, sc.background);
  const auto& used = sc.used_features;
  auto reduced_game = [&](const CoalitionVector& u) {
    CoalitionVector z(p);
    for (std::size_t k = 0; k < used.size(); ++k) z.bits[used[k]] = u.bits[k];
    return cache.set_value(z);
  };
  const Explanation exact = exact_shapley_game(reduced_game, static_cast<int>(used.size()));
  for (std::size_t k = 0; k < sc.tracked.size(); ++k) {
    auto it = std::find(used.begin(), used.end(), sc.tracked[k]);
    truth[k] = it == used.end() ? 0.0 : exact.phi[it - used.begin()];
  }
  return truth;
}

inline std::uint64_t estimator_min_budget(const std::string& estimator, int m) {
  const std::uint64_t mm = static_cast<std::uint64_t>(m);
  if (estimator == "kernel-debiased-lasso") return mm + 1;  // M-1 rows + both endpoints
  if (estimator == "permutation") return mm + 1;            // one full ordering
  if (estimator == "lime-baseline") return mm + 1;          // M+1 unknowns, no endpoints
  throw InputDomainError("unknown estimator \"" + estimator + "\"");
}

inline Explanation run_bench_estimator(const BenchScenario& sc, const std::string& estimator,
                                       std::uint64_t budget, std::uint64_t seed) {
  SetFunctionCache cache(sc.model, sc.instance, sc.background);
  const int m = cache.coalition_size();
  if (estimator == "kernel-debiased-lasso") {
    const CoalitionSample sample = sample_coalitions(m, budget - 2, seed);
    return kernel_shap_solve(cache, sample, LassoSpec::automatic(), seed);
  }
  if (estimator == "permutation") {
    const std::uint64_t n_orderings = (budget - 2) / static_cast<std::uint64_t>(m - 1);
    return permutation_estimate(cache, n_orderings, seed);
  }
  const CoalitionSample sample = sample_coalitions(m, budget, seed);
  return lime_baseline_solve(cache, sample, default_lime_width(m), seed);
}

}  // namespace detail

inline ConvergenceReport run_convergence(const BenchScenario& sc, int threads = 1) {
  sc.validate();
  ConvergenceReport report;
  report.scenario_name = sc.name;
  report.seed = sc.seed;
  report.replicates = sc.replicates;
  report.estimators = bench_estimators();
  report.tracked = sc.tracked;
  report.budgets = sc.budgets;
  report.truth = detail::bench_ground_truth(sc);

  const int m = sc.model.n_features();
  const int n_est = static_cast<int>(report.estimators.size());
  const int n_bud = static_cast<int>(sc.budgets.size());
  const int n_feat = static_cast<int>(sc.tracked.size());

  struct Replicate {
    std::vector<double> phi;  // per tracked feature
    std::uint64_t evals = 0;
    bool failed = false;
    std::string error;
  };
  std::vector<Replicate> results(
      static_cast<std::size_t>(n_est) * n_bud * sc.replicates);
  std::vector<std::size_t> jobs;
  for (int e = 0; e < n_est; ++e) {
    for (int b = 0; b < n_bud; ++b) {
      if (sc.budgets[b] < detail::estimator_min_budget(report.estimators[e], m)) continue;
      for (int r = 0; r < sc.replicates; ++r) {
        jobs.push_back((static_cast<std::size_t>(e) * n_bud + b) * sc.replicates + r);
      }
    }
  }

  auto run_job = [&](std::size_t slot) {
    const int r = static_cast<int>(slot % sc.replicates);
    const int b = static_cast<int>((slot / sc.replicates) % n_bud);
    const int e = static_cast<int>(slot / sc.replicates / n_bud);
    Replicate& out = results[slot];
    try {
      const std::uint64_t rep_seed =
          mix64(sc.seed, (static_cast<std::uint64_t>(e) << 32) | static_cast<std::uint64_t>(b),
                static_cast<std::uint64_t>(r));
      const Explanation est =
          detail::run_bench_estimator(sc, report.estimators[e], sc.budgets[b], rep_seed);
      out.phi.resize(n_feat);
      for (int k = 0; k < n_feat; ++k) out.phi[k] = est.phi[sc.tracked[k]];
      out.evals = est.budget;
    } catch (const std::exception& ex) {
      out.failed = true;
      out.error = ex.what();
    }
  };

  if (threads <= 1) {
    for (std::size_t slot : jobs) run_job(slot);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(jobs.size()));
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
          run_job(jobs[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  report.cells.assign(n_est, std::vector<BenchCell>(n_bud));
  for (int e = 0; e < n_est; ++e) {
    for (int b = 0; b < n_bud; ++b) {
      BenchCell& cell = report.cells[e][b];
      if (sc.budgets[b] < detail::estimator_min_budget(report.estimators[e], m)) {
        cell.skipped = true;
        cell.skip_reason = "budget below estimator minimum";
        continue;
      }
      cell.mean.assign(n_feat, 0.0);
      cell.p10.assign(n_feat, 0.0);
      cell.p90.assign(n_feat, 0.0);
      std::vector<double> column(sc.replicates);
      for (int r = 0; r < sc.replicates; ++r) {
        const Replicate& rep =
            results[(static_cast<std::size_t>(e) * n_bud + b) * sc.replicates + r];
        if (rep.failed) {
          cell.skipped = true;
          cell.skip_reason = rep.error;
          break;
        }
        cell.evals = std::max(cell.evals, rep.evals);
      }
      if (cell.skipped) continue;
      for (int k = 0; k < n_feat; ++k) {
        for (int r = 0; r < sc.replicates; ++r) {
          column[r] = results[(static_cast<std::size_t>(e) * n_bud + b) * sc.replicates + r]
                          .phi[k];
        }
        std::sort(column.begin(), column.end());
        double sum = 0.0;
        for (double v : column) sum += v;  // sorted reduction
        cell.mean[k] = sum / static_cast<double>(sc.replicates);
        cell.p10[k] = percentile(column, 0.10);
        cell.p90[k] = percentile(column, 0.90);
      }
    }
  }
  return report;
}

inline std::string report_to_csv(const ConvergenceReport& report) {
  std::string csv = "estimator,feature,budget,mean,p10,p90,truth\n";
  for (std::size_t e = 0; e < report.estimators.size(); ++e) {
    for (std::size_t k = 0; k < report.tracked.size(); ++k) {
      for (std::size_t b = 0; b < report.budgets.size(); ++b) {
        const BenchCell& cell = report.cells[e][b];
        if (cell.skipped) continue;
        csv += report.estimators[e] + "," + std::to_string(report.tracked[k]) + "," +
               std::to_string(report.budgets[b]) + "," + fmt_g(cell.mean[k]) + "," +
               fmt_g(cell.p10[k]) + "," + fmt_g(cell.p90[k]) + "," + fmt_g(report.truth[k]) +
               "\n";
      }
    }
  }
  return csv;
}

namespace detail {

inline const char* estimator_color(std::size_t index) {
  static const char* colors[] = {"#ff0d57", "#1e88e5", "#13b755", "#7c52ff"};
  return colors[index % 4];
}

// Budget-vs-estimate line plot for one tracked feature; the p10..p90 band is
// a shaded polygon behind each estimator's mean line.
inline std::string render_feature_plot(const ConvergenceReport& report, std::size_t k) {
  const double width = 640.0, height = 360.0, margin = 50.0;
  double vmin = report.truth[k], vmax = report.truth[k];
  for (std::size_t e = 0; e < report.estimators.size(); ++e) {
    for (std::size_t b = 0; b < report.budgets.size(); ++b) {
      const BenchCell& cell = report.cells[e][b];
      if (cell.skipped) continue;
      vmin = std::min({vmin, cell.p10[k], cell.mean[k]});
      vmax = std::max({vmax, cell.p90[k], cell.mean[k]});
    }
  }
  if (vmax <= vmin) vmax = vmin + 1.0;
  const double pad = 0.05 * (vmax - vmin);
  vmin -= pad;
  vmax += pad;

  const double lo_budget = std::log2(static_cast<double>(report.budgets.front()));
  const double hi_budget = std::log2(static_cast<double>(report.budgets.back()));
  const auto px = [&](std::uint64_t budget) {
    const double t = hi_budget > lo_budget
                         ? (std::log2(static_cast<double>(budget)) - lo_budget) /
                               (hi_budget - lo_budget)
                         : 0.5;
    return margin + t * (width - 2.0 * margin);
  };
  const auto py = [&](double v) {
    return height - margin - (v - vmin) / (vmax - vmin) * (height - 2.0 * margin);
  };

  SvgDocument doc(width, height);
  doc.text(width / 2.0, 18.0, report.scenario_name + ": feature " +
                                  std::to_string(report.tracked[k]),
           "#222222", 13.0, "middle");
  doc.line(margin, py(report.truth[k]), width - margin, py(report.truth[k]), "#555555", 1.0,
           "truth");
  doc.text(width - margin + 4.0, py(report.truth[k]) + 4.0, "exact", "#555555", 10.0);

  for (std::size_t e = 0; e < report.estimators.size(); ++e) {
    std::string band_fwd, band_rev, mean_pts;
    for (std::size_t b = 0; b < report.budgets.size(); ++b) {
      const BenchCell& cell = report.cells[e][b];
      if (cell.skipped) continue;
      const std::string x = fmt_px(px(report.budgets[b]));
      band_fwd += x + "," + fmt_px(py(cell.p10[k])) + " ";
      band_rev = x + "," + fmt_px(py(cell.p90[k])) + " " + band_rev;
      mean_pts += x + "," + fmt_px(py(cell.mean[k])) + " ";
    }
    if (mean_pts.empty()) continue;
    doc.polygon(band_fwd + band_rev, estimator_color(e), 0.18);
    doc.polyline(mean_pts, estimator_color(e), 1.5);
    doc.text(margin, 34.0 + 14.0 * static_cast<double>(e), report.estimators[e],
             estimator_color(e), 11.0);
  }

  doc.line(margin, height - margin, width - margin, height - margin, "#222222", 1.0, "x-axis");
  for (std::size_t b = 0; b < report.budgets.size(); ++b) {
    doc.text(px(report.budgets[b]), height - margin + 16.0, std::to_string(report.budgets[b]),
             "#444444", 10.0, "middle");
  }
  return doc.str();
}

}  // namespace detail

// Writes report.csv plus one SVG per tracked feature into `dir`.
inline void export_report(const ConvergenceReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
  write_text_file((dir / "report.csv").string(), report_to_csv(report));
  for (std::size_t k = 0; k < report.tracked.size(); ++k) {
    const std::string name = "feature_" + std::to_string(report.tracked[k]) + ".svg";
    write_text_file((dir / name).string(), detail::render_feature_plot(report, k));
  }
}

}  // namespace esv
