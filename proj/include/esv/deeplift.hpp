#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "esv/common.hpp"
#include "esv/exact.hpp"
#include "esv/explanation.hpp"
#include "esv/masking.hpp"
#include "esv/model.hpp"

namespace esv {

// Small compositional function graph: inputs feed linear / max / sum nodes in
// topological order, with a single designated output.
struct DagNode {
  enum class Op { input, linear, max, sum };

  Op op = Op::input;
  std::vector<int> parents;
  std::vector<double> weights;  // linear only
  double bias = 0.0;            // linear only
};

struct MicroDag {
  std::vector<DagNode> nodes;
  int output = -1;

  int input_count() const {
    int c = 0;
    for (const auto& n : nodes) c += n.op == DagNode::Op::input ? 1 : 0;
    return c;
  }

  void validate() const {
    if (nodes.empty()) throw StructureError("dag has no nodes");
    if (output < 0 || output >= static_cast<int>(nodes.size())) {
      throw StructureError("dag output index out of range");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const DagNode& n = nodes[i];
      for (int p : n.parents) {
        if (p < 0 || p >= static_cast<int>(i)) {
          throw StructureError("dag node " + std::to_string(i) +
                               ": parents must precede the node");
        }
      }
      switch (n.op) {
        case DagNode::Op::input:
          if (!n.parents.empty()) throw StructureError("input node cannot have parents");
          break;
        case DagNode::Op::linear:
          if (n.parents.empty()) throw StructureError("linear node needs parents");
          if (n.weights.size() != n.parents.size()) {
            throw StructureError("linear node weight/parent count mismatch");
          }
          break;
        case DagNode::Op::max:
          if (n.parents.size() != 2) throw StructureError("max node needs exactly two parents");
          break;
        case DagNode::Op::sum:
          if (n.parents.empty()) throw StructureError("sum node needs parents");
          break;
      }
    }
    if (input_count() == 0) throw StructureError("dag has no input nodes");
  }

  std::vector<double> forward(const FeatureVector& x) const {
    std::vector<double> act(nodes.size(), 0.0);
    int next_input = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const DagNode& n = nodes[i];
      switch (n.op) {
        case DagNode::Op::input:
          act[i] = x[next_input++];
          break;
        case DagNode::Op::linear: {
          double v = n.bias;
          for (std::size_t k = 0; k < n.parents.size(); ++k) v += n.weights[k] * act[n.parents[k]];
          act[i] = v;
          break;
        }
        case DagNode::Op::max:
          act[i] = std::max(act[n.parents[0]], act[n.parents[1]]);
          break;
        case DagNode::Op::sum: {
          double v = 0.0;
          for (int p : n.parents) v += act[p];
          act[i] = v;
          break;
        }
      }
    }
    return act;
  }

  double evaluate(const FeatureVector& x) const {
    if (static_cast<int>(x.size()) != input_count()) {
      throw InputShapeError("dag expects " + std::to_string(input_count()) + " inputs");
    }
    return forward(x)[output];
  }

  Model as_model() const {
    validate();
    auto self = std::make_shared<const MicroDag>(*this);
    return Model("dag", input_count(), [self](const FeatureVector& x) { return self->evaluate(x); });
  }

  static MicroDag from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

inline MicroDag MicroDag::from_json(const nlohmann::json& j) {
  MicroDag dag;
  if (!j.contains("nodes") || !j.contains("output")) {
    throw ParseError("dag document needs \"nodes\" and \"output\"");
  }
  for (const auto& jn : j.at("nodes")) {
    DagNode n;
    const std::string op = jn.at("op").get<std::string>();
    if (op == "input") {
      n.op = DagNode::Op::input;
    } else if (op == "linear") {
      n.op = DagNode::Op::linear;
    } else if (op == "max") {
      n.op = DagNode::Op::max;
    } else if (op == "sum") {
      n.op = DagNode::Op::sum;
    } else {
      throw ParseError("unknown dag op \"" + op + "\"");
    }
    if (jn.contains("parents")) n.parents = jn.at("parents").get<std::vector<int>>();
    if (jn.contains("weights")) n.weights = jn.at("weights").get<std::vector<double>>();
    if (jn.contains("bias")) n.bias = jn.at("bias").get<double>();
    dag.nodes.push_back(std::move(n));
  }
  dag.output = j.at("output").get<int>();
  dag.validate();
  return dag;
}

inline nlohmann::json MicroDag::to_json() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const DagNode& n : nodes) {
    nlohmann::json jn;
    switch (n.op) {
      case DagNode::Op::input: jn["op"] = "input"; break;
      case DagNode::Op::linear: jn["op"] = "linear"; break;
      case DagNode::Op::max: jn["op"] = "max"; break;
      case DagNode::Op::sum: jn["op"] = "sum"; break;
    }
    if (!n.parents.empty()) jn["parents"] = n.parents;
    if (n.op == DagNode::Op::linear) {
      jn["weights"] = n.weights;
      jn["bias"] = n.bias;
    }
    j["nodes"].push_back(std::move(jn));
  }
  j["output"] = output;
  return j;
}

// Per-input contributions against a reference input, satisfying
// f(ref) + sum(contributions) = f(x).
struct ContributionVector {
  std::vector<double> contributions;
  FeatureVector reference;

  double sum() const {
    double s = 0.0;
    for (double c : contributions) s += c;
    return s;
  }
};

// DeepLIFT-style backward pass: the output difference is distributed through
// the graph. Linear nodes split their share proportionally to w_k*(a_k-a0_k);
// max nodes assign their entire share to the argument attaining the max at x
// (ties split equally); sum nodes split proportionally to parent differences.
inline ContributionVector deeplift_attribute(const MicroDag& dag, const FeatureVector& x,
                                             const FeatureVector& x0) {
  dag.validate();
  if (static_cast<int>(x.size()) != dag.input_count() || x.size() != x0.size()) {
    throw InputShapeError("dag attribution inputs must match the dag input count");
  }
  require_finite(x, "dag input");
  require_finite(x0, "dag reference");

  const std::vector<double> a = dag.forward(x);
  const std::vector<double> a0 = dag.forward(x0);

  std::vector<double> share(dag.nodes.size(), 0.0);
  share[dag.output] = a[dag.output] - a0[dag.output];

  for (int i = static_cast<int>(dag.nodes.size()) - 1; i >= 0; --i) {
    const DagNode& n = dag.nodes[i];
    const double s = share[i];
    if (n.op == DagNode::Op::input || s == 0.0) continue;
    switch (n.op) {
      case DagNode::Op::linear:
      case DagNode::Op::sum: {
        std::vector<double> terms(n.parents.size());
        double denom = 0.0;
        for (std::size_t k = 0; k < n.parents.size(); ++k) {
          const int p = n.parents[k];
          const double wk = n.op == DagNode::Op::linear ? n.weights[k] : 1.0;
          terms[k] = wk * (a[p] - a0[p]);
          denom += terms[k];
        }
        if (denom == 0.0) {
          const double each = s / static_cast<double>(n.parents.size());
          for (int p : n.parents) share[p] += each;
        } else {
          for (std::size_t k = 0; k < n.parents.size(); ++k) {
            share[n.parents[k]] += s * (terms[k] / denom);
          }
        }
        break;
      }
      case DagNode::Op::max: {
        const int u = n.parents[0];
        const int v = n.parents[1];
        if (a[u] == a[v]) {
          share[u] += s * 0.5;
          share[v] += s * 0.5;
        } else {
          share[a[u] > a[v] ? u : v] += s;
        }
        break;
      }
      case DagNode::Op::input:
        break;
    }
  }

  ContributionVector out;
  out.reference = x0;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    if (dag.nodes[i].op == DagNode::Op::input) out.contributions.push_back(share[i]);
  }
  return out;
}

// Exact ES values of the dag treated as a black box with the reference input
// as the single background row.
inline Explanation es_attribute_dag(const MicroDag& dag, const FeatureVector& x,
                                    const FeatureVector& x0) {
  SetFunctionCache cache(dag.as_model(), x, BackgroundSet({x0}));
  Explanation e = exact_shapley(cache);
  e.estimator = "exact(dag)";
  return e;
}

struct RuleComparison {
  struct Row {
    int input = 0;
    double deeplift = 0.0;
    double es = 0.0;
    double diff = 0.0;
  };

  std::vector<Row> rows;
  double output_delta = 0.0;    // f(x) - f(x0), the shared residual target
  bool zero_reference = false;  // x0 == 0: the layer-wise relevance propagation setting
};

inline RuleComparison compare_rules(const MicroDag& dag, const FeatureVector& x,
                                    const FeatureVector& x0) {
  const ContributionVector c = deeplift_attribute(dag, x, x0);
  const Explanation es = es_attribute_dag(dag, x, x0);

  RuleComparison cmp;
  cmp.output_delta = dag.evaluate(x) - dag.evaluate(x0);
  cmp.zero_reference = true;
  for (double v : x0) cmp.zero_reference = cmp.zero_reference && v == 0.0;
  for (std::size_t i = 0; i < c.contributions.size(); ++i) {
    RuleComparison::Row row;
    row.input = static_cast<int>(i);
    row.deeplift = c.contributions[i];
    row.es = es.phi[i];
    row.diff = row.deeplift - row.es;
    cmp.rows.push_back(row);
  }
  return cmp;
}

inline nlohmann::json comparison_to_json(const RuleComparison& cmp) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : cmp.rows) {
    arr.push_back({{"input", row.input},
                   {"deeplift", row.deeplift},
                   {"es", row.es},
                   {"diff", row.diff}});
  }
  return arr;
}

}  // namespace esv
