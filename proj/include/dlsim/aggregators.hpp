#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlsim/params.hpp"
#include "dlsim/topology.hpp"

namespace dlsim {

enum class AggregatorKind { naive, scclip, rfa };
enum class TauPolicy { ideal, constant, min_distance };

std::string to_string(AggregatorKind kind);
std::optional<AggregatorKind> aggregator_kind_from_string(const std::string& name);
std::string to_string(TauPolicy policy);
std::optional<TauPolicy> tau_policy_from_string(const std::string& name);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::naive;
  TauPolicy tau_policy = TauPolicy::constant;  // scclip only
  double tau_const = 1.0;
  // Radius used when a node has no byzantine neighbor under the ideal policy
  // (the variance formula divides by the byzantine edge weight). Infinity
  // means "do not clip", which reduces scclip to the naive mean there.
  double tau_no_byzantine = std::numeric_limits<double>::infinity();
  int rfa_iters = 50;
  double rfa_eps = 1e-8;

  bool operator==(const AggregatorSpec&) const = default;
};

// What one node sees at aggregation time: its own half-step plus exactly one
// update per neighbor. Byzantine senders may have placed different vectors in
// different receivers' inboxes.
struct InboxView {
  int receiver = -1;
  ParamVector self_half_step;
  std::map<int, ParamVector> received;  // sender -> update
};

// min(1, tau / ||z||) * z. Identity when ||z|| <= tau (covers z = 0 and
// tau = infinity); otherwise rescales to norm tau, preserving direction.
ParamVector clip(const ParamVector& z, double tau);

// Weighted mean over the closed neighborhood: sum_j W_ij * update_j with the
// receiver's own half-step standing in for j = i.
ParamVector naive_aggregate(const InboxView& inbox, const MixingMatrix& mixing);

// Clipping radius per the configured policy:
//   ideal:        sqrt( (1/delta_i) * sum_{j honest} W_ij ||self - theta_j||^2 )
//   constant:     the configured value
//   min_distance: min over received updates of ||self - theta_j||
// `honest_set` is the simulator's omniscient knowledge of honest nodes; the
// ideal policy cannot be computed by a real participant.
double tau_policy_eval(const AggregatorSpec& spec, const InboxView& inbox,
                       const MixingMatrix& mixing, const std::vector<int>& honest_set,
                       const std::vector<int>& byz_set);

// Self-centered clipping: self + sum_j W_ij * clip(update_j - self, tau).
// The output never moves more than tau from the receiver's own half-step.
ParamVector scclip_aggregate(const InboxView& inbox, const MixingMatrix& mixing,
                             double tau);

// Approximate weighted geometric median (smoothed Weiszfeld fixed point,
// started from the weighted mean).
ParamVector rfa_geometric_median(const std::vector<ParamVector>& points,
                                 const std::vector<double>& weights, int iters,
                                 double eps);

// sum_k w_k ||x_k - y||, the objective rfa_geometric_median minimizes.
double geometric_median_objective(const std::vector<ParamVector>& points,
                                  const std::vector<double>& weights,
                                  const ParamVector& y);

}  // namespace dlsim
