#include "dlsim/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dlsim {

std::string to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::naive: return "naive";
    case AggregatorKind::scclip: return "scclip";
    case AggregatorKind::rfa: return "rfa";
  }
  return "?";
}

std::optional<AggregatorKind> aggregator_kind_from_string(const std::string& name) {
  for (AggregatorKind k : {AggregatorKind::naive, AggregatorKind::scclip, AggregatorKind::rfa}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string to_string(TauPolicy policy) {
  switch (policy) {
    case TauPolicy::ideal: return "ideal";
    case TauPolicy::constant: return "constant";
    case TauPolicy::min_distance: return "min_distance";
  }
  return "?";
}

std::optional<TauPolicy> tau_policy_from_string(const std::string& name) {
  for (TauPolicy p : {TauPolicy::ideal, TauPolicy::constant, TauPolicy::min_distance}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

ParamVector clip(const ParamVector& z, double tau) {
  if (tau < 0.0 || std::isnan(tau)) {
    throw std::invalid_argument("clip: tau must be >= 0 or infinity");
  }
  const double n = norm(z);
  if (n <= tau || n == 0.0) return z;
  return (tau / n) * z;
}

namespace {

const ParamVector& inbox_entry(const InboxView& inbox, int sender) {
  if (sender == inbox.receiver) return inbox.self_half_step;
  const auto it = inbox.received.find(sender);
  if (it == inbox.received.end()) {
    throw std::runtime_error("aggregation: node " + std::to_string(inbox.receiver) +
                             " has no update from neighbor " + std::to_string(sender));
  }
  return it->second;
}

}  // namespace

ParamVector naive_aggregate(const InboxView& inbox, const MixingMatrix& mixing) {
  ParamVector out(inbox.self_half_step.size(), 0.0);
  const int i = inbox.receiver;
  for (int j = 0; j < mixing.n; ++j) {
    const double w = mixing.at(i, j);
    if (w == 0.0) continue;
    out.axpy(w, inbox_entry(inbox, j));
  }
  return out;
}

double tau_policy_eval(const AggregatorSpec& spec, const InboxView& inbox,
                       const MixingMatrix& mixing, const std::vector<int>& honest_set,
                       const std::vector<int>& byz_set) {
  const int i = inbox.receiver;
  switch (spec.tau_policy) {
    case TauPolicy::constant:
      return spec.tau_const;
    case TauPolicy::min_distance: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [sender, update] : inbox.received) {
        if (sender == i) continue;
        best = std::min(best, distance(inbox.self_half_step, update));
      }
      return best;
    }
    case TauPolicy::ideal: {
      const double delta = byzantine_edge_weight(mixing, i, byz_set);
      if (delta == 0.0) return spec.tau_no_byzantine;
      double acc = 0.0;
      for (int j : honest_set) {
        const double w = mixing.at(i, j);
        if (w == 0.0 || j == i) continue;
        acc += w * squared_distance(inbox.self_half_step, inbox_entry(inbox, j));
      }
      return std::sqrt(acc / delta);
    }
  }
  throw std::logic_error("tau_policy_eval: unknown policy");
}

ParamVector scclip_aggregate(const InboxView& inbox, const MixingMatrix& mixing,
                             double tau) {
  // The reference term factors out because rows are stochastic:
  // out = self + sum_j W_ij * clip(update_j - self, tau).
  ParamVector out = inbox.self_half_step;
  const int i = inbox.receiver;
  for (int j = 0; j < mixing.n; ++j) {
    const double w = mixing.at(i, j);
    if (w == 0.0 || j == i) continue;
    out.axpy(w, clip(inbox_entry(inbox, j) - inbox.self_half_step, tau));
  }
  return out;
}

double geometric_median_objective(const std::vector<ParamVector>& points,
                                  const std::vector<double>& weights,
                                  const ParamVector& y) {
  double obj = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) obj += weights[k] * distance(points[k], y);
  return obj;
}

ParamVector rfa_geometric_median(const std::vector<ParamVector>& points,
                                 const std::vector<double>& weights, int iters,
                                 double eps) {
  if (points.empty()) throw std::invalid_argument("rfa_geometric_median: no points");
  if (weights.size() != points.size()) {
    throw std::invalid_argument("rfa_geometric_median: weight count mismatch");
  }
  if (iters < 1) throw std::invalid_argument("rfa_geometric_median: iters must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("rfa_geometric_median: eps must be > 0");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("rfa_geometric_median: negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("rfa_geometric_median: all weights zero");

  ParamVector y(points.front().size(), 0.0);
  for (std::size_t k = 0; k < points.size(); ++k) y.axpy(weights[k] / total, points[k]);

  for (int it = 0; it < iters; ++it) {
    ParamVector acc(y.size(), 0.0);
    double denom = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double d = std::max(distance(points[k], y), eps);
      const double c = weights[k] / d;
      acc.axpy(c, points[k]);
      denom += c;
    }
    acc /= denom;
    y = std::move(acc);
  }

  // Weiszfeld crawls when the optimum sits on an anchor point; return the
  // anchor instead whenever one beats the iterate.
  double best_obj = geometric_median_objective(points, weights, y);
  const ParamVector* best = &y;
  for (const ParamVector& p : points) {
    const double obj = geometric_median_objective(points, weights, p);
    if (obj < best_obj) {
      best_obj = obj;
      best = &p;
    }
  }
  return *best;
}

}  // namespace dlsim
