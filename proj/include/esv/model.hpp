#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "esv/common.hpp"

namespace esv {

// Uniform evaluation interface over black-box models. A Model is an immutable
// deterministic function R^P -> R; evaluation is effect-free and safe to call
// from many threads.
class Model {
 public:
  using EvalFn = std::function<double(const FeatureVector&)>;

  Model() = default;
  Model(std::string kind, int n_features, EvalFn fn)
      : kind_(std::move(kind)), n_features_(n_features), fn_(std::move(fn)) {}

  const std::string& kind() const { return kind_; }
  int n_features() const { return n_features_; }
  bool valid() const { return static_cast<bool>(fn_); }

  double operator()(const FeatureVector& x) const {
    if (static_cast<int>(x.size()) != n_features_) {
      throw InputShapeError("model expects " + std::to_string(n_features_) +
                            " features, got " + std::to_string(x.size()));
    }
    require_finite(x, "model input");
    return fn_(x);
  }

 private:
  std::string kind_;
  int n_features_ = 0;
  EvalFn fn_;
};

inline double evaluate(const Model& model, const FeatureVector& x) { return model(x); }

// --- Tree ensembles -------------------------------------------------------

// Internal node iff feature >= 0. Routing: x[feature] < threshold goes left,
// ties go right.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  double eval(const FeatureVector& x) const {
    int idx = 0;
    while (!nodes[idx].is_leaf()) {
      const TreeNode& n = nodes[idx];
      idx = x[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[idx].leaf;
  }
};

struct TreeEnsemble {
  int n_features = 0;
  double base_score = 0.0;
  std::vector<Tree> trees;

  double eval(const FeatureVector& x) const {
    double out = base_score;
    for (const Tree& t : trees) out += t.eval(x);
    return out;
  }

  // Checks child indices, feature ranges, and acyclicity of every tree.
  void validate() const {
    for (std::size_t ti = 0; ti < trees.size(); ++ti) {
      const auto& nodes = trees[ti].nodes;
      if (nodes.empty()) throw StructureError("tree " + std::to_string(ti) + " has no nodes");
      std::vector<int> state(nodes.size(), 0);  // 0 unseen, 1 on stack, 2 done
      std::vector<int> stack{0};
      while (!stack.empty()) {
        int idx = stack.back();
        if (idx < 0 || idx >= static_cast<int>(nodes.size())) {
          throw StructureError("tree " + std::to_string(ti) + ": child index out of range");
        }
        const TreeNode& n = nodes[idx];
        if (state[idx] == 0) {
          state[idx] = 1;
          if (!n.is_leaf()) {
            if (n.feature >= n_features) {
              throw StructureError("tree " + std::to_string(ti) + ": feature index " +
                                   std::to_string(n.feature) + " out of range");
            }
            if (n.left < 0 || n.right < 0) {
              throw StructureError("tree " + std::to_string(ti) +
                                   ": non-leaf node missing a child");
            }
            for (int child : {n.left, n.right}) {
              if (child >= 0 && child < static_cast<int>(nodes.size()) && state[child] == 1) {
                throw StructureError("tree " + std::to_string(ti) + " contains a cycle");
              }
              stack.push_back(child);
            }
            continue;
          }
        }
        stack.pop_back();
        state[idx] = 2;
      }
    }
  }

  Model as_model() const {
    validate();
    auto self = std::make_shared<const TreeEnsemble>(*this);
    return Model("tree_ensemble", n_features,
                 [self](const FeatureVector& x) { return self->eval(x); });
  }
};

// --- Linear models ---------------------------------------------------------

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double eval(const FeatureVector& x) const {
    double out = intercept;
    for (std::size_t i = 0; i < weights.size(); ++i) out += weights[i] * x[i];
    return out;
  }

  Model as_model() const {
    auto self = std::make_shared<const LinearModel>(*this);
    return Model("linear", static_cast<int>(weights.size()),
                 [self](const FeatureVector& x) { return self->eval(x); });
  }
};

// --- Analytic test functions ------------------------------------------------

// Closed catalog: max / product / sum of two designated features.
struct AnalyticModel {
  enum class Expr { max, product, sum };

  Expr expr = Expr::max;
  int n_features = 2;
  int a = 0;
  int b = 1;

  double eval(const FeatureVector& x) const {
    switch (expr) {
      case Expr::max: return x[a] > x[b] ? x[a] : x[b];
      case Expr::product: return x[a] * x[b];
      case Expr::sum: return x[a] + x[b];
    }
    return 0.0;
  }

  Model as_model() const {
    if (a < 0 || b < 0 || a >= n_features || b >= n_features) {
      throw StructureError("analytic model argument index out of range");
    }
    auto self = std::make_shared<const AnalyticModel>(*this);
    std::string name = expr == Expr::max ? "max" : expr == Expr::product ? "product" : "sum";
    return Model("analytic:" + name, n_features,
                 [self](const FeatureVector& x) { return self->eval(x); });
  }
};

// --- JSON model schema -------------------------------------------------------

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("model document missing \"") + key + "\"");
  return *it;
}

}  // namespace detail

inline TreeEnsemble tree_ensemble_from_json(const nlohmann::json& j) {
  TreeEnsemble ens;
  ens.n_features = detail::require_key(j, "n_features").get<int>();
  ens.base_score = detail::require_key(j, "base_score").get<double>();
  for (const auto& jt : detail::require_key(j, "trees")) {
    Tree tree;
    for (const auto& jn : detail::require_key(jt, "nodes")) {
      TreeNode node;
      if (jn.contains("leaf")) {
        node.leaf = jn.at("leaf").get<double>();
      } else {
        node.feature = detail::require_key(jn, "feature").get<int>();
        node.threshold = detail::require_key(jn, "threshold").get<double>();
        node.left = detail::require_key(jn, "left").get<int>();
        node.right = detail::require_key(jn, "right").get<int>();
        if (node.feature < 0) throw ParseError("tree node feature index must be >= 0");
      }
      tree.nodes.push_back(node);
    }
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

inline nlohmann::json tree_ensemble_to_json(const TreeEnsemble& ens) {
  nlohmann::json j;
  j["kind"] = "tree_ensemble";
  j["n_features"] = ens.n_features;
  j["base_score"] = ens.base_score;
  j["trees"] = nlohmann::json::array();
  for (const Tree& t : ens.trees) {
    nlohmann::json jt;
    jt["nodes"] = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        jt["nodes"].push_back({{"leaf", n.leaf}});
      } else {
        jt["nodes"].push_back({{"feature", n.feature},
                               {"threshold", n.threshold},
                               {"left", n.left},
                               {"right", n.right}});
      }
    }
    j["trees"].push_back(std::move(jt));
  }
  return j;
}

// Parses the model file schema:
//   {"kind": "linear"|"tree_ensemble"|"analytic", "n_features": int, ...}
inline Model model_from_json(const nlohmann::json& j) {
  const std::string kind = detail::require_key(j, "kind").get<std::string>();
  const int n_features = detail::require_key(j, "n_features").get<int>();
  if (n_features < 1) throw ParseError("n_features must be >= 1");

  if (kind == "linear") {
    LinearModel lin;
    lin.weights = detail::require_key(j, "weights").get<std::vector<double>>();
    lin.intercept = detail::require_key(j, "intercept").get<double>();
    if (static_cast<int>(lin.weights.size()) != n_features) {
      throw ParseError("linear model weight count does not match n_features");
    }
    require_finite(lin.weights, "linear weights");
    return lin.as_model();
  }
  if (kind == "tree_ensemble") {
    TreeEnsemble ens = tree_ensemble_from_json(j);
    return ens.as_model();
  }
  if (kind == "analytic") {
    AnalyticModel an;
    an.n_features = n_features;
    const std::string expr = detail::require_key(j, "expr").get<std::string>();
    if (expr == "max") {
      an.expr = AnalyticModel::Expr::max;
    } else if (expr == "product") {
      an.expr = AnalyticModel::Expr::product;
    } else if (expr == "sum") {
      an.expr = AnalyticModel::Expr::sum;
    } else {
      throw ParseError("unknown analytic expr \"" + expr + "\"");
    }
    const auto& args = detail::require_key(j, "args");
    if (!args.is_array() || args.size() != 2) throw ParseError("analytic args must be [int, int]");
    an.a = args[0].get<int>();
    an.b = args[1].get<int>();
    return an.as_model();
  }
  throw UnsupportedModelError("unsupported model kind \"" + kind + "\"");
}

inline Model load_model(const std::string& document) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace esv
