#include "semistatic/randomized.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include "semistatic/superhedge.hpp"

namespace semistatic {

RandomizedModel build_randomized_model(const Instance& inst, const MixtureModel& mix) {
  if (!mixture_valid(inst, mix)) {
    throw MarketError("mixture fails its invariants (weights, measures, or calibration)");
  }
  const int n = static_cast<int>(mix.components.size());
  RandomizedModel model{inst, n, RVector(n), {}, {}};
  model.kernels.reserve(mix.components.size());
  for (int i = 0; i < model.n; ++i) {
    model.weights(i) = mix.components[i].weight;
    model.kernels.push_back(mix.components[i].measure);
  }
  model.nodes.reserve(static_cast<std::size_t>(model.n) * inst.node_count());
  for (int i = 0; i < model.n; ++i) {
    for (int v = 0; v < inst.node_count(); ++v) {
      model.nodes.push_back({v, i});
    }
  }
  return model;
}

ConsistencyReport check_consistency(const RandomizedModel& model) {
  ConsistencyReport report;
  const Instance& base = model.base;
  const auto leaf_count = static_cast<Eigen::Index>(base.leaves().size());

  report.weights_valid = model.n >= 1 && model.weights.size() == model.n &&
                         static_cast<int>(model.kernels.size()) == model.n;
  if (report.weights_valid) {
    Rational total = 0;
    for (int i = 0; i < model.n; ++i) {
      if (model.weights(i) <= 0) report.weights_valid = false;
      total += model.weights(i);
    }
    if (total != 1) report.weights_valid = false;
  }

  report.kernels_valid = static_cast<int>(model.kernels.size()) == model.n && model.n >= 1;
  if (report.kernels_valid) {
    for (const MartingaleMeasure& q : model.kernels) {
      if (q.leaf_weights.size() != leaf_count) {
        report.kernels_valid = false;
        break;
      }
      Rational mass = 0;
      for (Eigen::Index l = 0; l < q.leaf_weights.size(); ++l) {
        if (q.leaf_weights(l) < 0) report.kernels_valid = false;
        mass += q.leaf_weights(l);
      }
      if (mass != 1) report.kernels_valid = false;
    }
  }

  if (report.kernels_valid) {
    // Node-wise martingale balance on every enlarged node the product
    // measure charges.  A copy's node carries mass weight(i) * masses(v),
    // which is positive exactly when masses(v) is.
    report.enlarged_martingale = true;
    for (int i = 0; i < model.n && report.enlarged_martingale; ++i) {
      const RVector masses = node_masses(base, model.kernels[i]);
      for (int v = 0; v < base.node_count(); ++v) {
        if (base.is_leaf(v) || masses(v) == 0) continue;
        RVector drift = RVector::Zero(base.stock_dim());
        for (int c : base.node(v).children) {
          drift += Rational(masses(c)) * base.increment(c);
        }
        for (Eigen::Index k = 0; k < drift.size(); ++k) {
          if (drift(k) != 0) report.enlarged_martingale = false;
        }
      }
    }

    if (report.weights_valid) {
      RVector priced = RVector::Zero(base.option_count());
      for (int i = 0; i < model.n; ++i) {
        priced += Rational(model.weights(i)) * option_expectation(base, model.kernels[i]);
      }
      report.calibrated = true;
      for (Eigen::Index k = 0; k < priced.size(); ++k) {
        if (priced(k) != 0) report.calibrated = false;
      }
    }
  }

  report.ok = report.weights_valid && report.kernels_valid && report.enlarged_martingale &&
              report.calibrated && report.polarity_vacuous;
  return report;
}

Rational phi_M(const RandomizedModel& model) {
  if (!check_consistency(model).ok) {
    throw MarketError("randomized model fails its consistency checks");
  }
  const Instance& base = model.base;
  Rational forest = 0;
  Rational weighted = 0;
  for (int i = 0; i < model.n; ++i) {
    // Snell pass on copy i of the forest, driven by the copy's own kernels.
    const std::vector<RVector> kernels = transition_kernels(base, model.kernels[i]);
    RVector value = RVector::Zero(base.node_count());
    for (int t = base.horizon(); t >= 0; --t) {
      for (int v : base.nodes_at(t)) {
        if (base.is_leaf(v)) {
          value(v) = base.node(v).exercise_payoff;
          continue;
        }
        const auto& children = base.node(v).children;
        Rational continuation = 0;
        for (std::size_t c = 0; c < children.size(); ++c) {
          continuation += Rational(kernels[v](static_cast<Eigen::Index>(c)) * value(children[c]));
        }
        const Rational& payoff = base.node(v).exercise_payoff;
        value(v) = payoff >= continuation ? payoff : continuation;
      }
    }
    forest += Rational(model.weights(i) * value(base.root()));
    weighted += Rational(model.weights(i) * snell_value(base, model.kernels[i]).value);
  }
  if (forest != weighted) {
    throw std::logic_error("forest value disagrees with the weighted component values");
  }
  return forest;
}

CorollaryReport verify_corollary(const Instance& inst) {
  CorollaryReport report;
  report.pi = solve_primal(inst).price;
  report.sup_nature = solve_nature_lp(inst).value;
  const RandomizedModel model = build_randomized_model(inst, solve_e2(inst).mixture);
  report.sup_randomized = phi_M(model);
  report.equal = report.pi == report.sup_nature && report.pi == report.sup_randomized;
  return report;
}

json to_json(const RandomizedModel& model) {
  const json base_doc = to_json(model.base);
  json doc;
  doc["n"] = model.n;
  json weights = json::array();
  for (int i = 0; i < model.n; ++i) weights.push_back(format_rational(model.weights(i)));
  doc["weights"] = std::move(weights);
  json kernels = json::array();
  for (const MartingaleMeasure& q : model.kernels) {
    json entry = json::array();
    for (Eigen::Index l = 0; l < q.leaf_weights.size(); ++l) {
      entry.push_back(format_rational(q.leaf_weights(l)));
    }
    kernels.push_back(std::move(entry));
  }
  doc["kernels"] = std::move(kernels);
  doc["horizon"] = base_doc["horizon"];
  doc["stock_dim"] = base_doc["stock_dim"];
  doc["option_count"] = base_doc["option_count"];
  json nodes = json::array();
  for (int i = 0; i < model.n; ++i) {
    const std::string tag = "#" + std::to_string(i);
    for (const json& base_node : base_doc["nodes"]) {
      json node = base_node;
      node["id"] = base_node["id"].get<std::string>() + tag;
      if (!base_node["parent"].is_null()) {
        node["parent"] = base_node["parent"].get<std::string>() + tag;
      }
      node["component"] = i;
      nodes.push_back(std::move(node));
    }
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

}  // namespace semistatic
