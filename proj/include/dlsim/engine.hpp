#pragma once

#include <vector>

#include "dlsim/aggregators.hpp"
#include "dlsim/attacks.hpp"
#include "dlsim/config.hpp"
#include "dlsim/model.hpp"
#include "dlsim/params.hpp"
#include "dlsim/task.hpp"
#include "dlsim/topology.hpp"

namespace dlsim {

struct NodeState {
  ParamVector params;
  MomentumState momentum;
  Task shard;
  bool byzantine = false;
};

// Full simulation state. In dl mode `nodes` covers every topology node; in fl
// mode it covers the users only (the star center is the server, whose model
// is `fl_global`) and all users hold the identical global model at the start
// of a round.
struct WorldState {
  int epoch = 0;
  Mode mode = Mode::dl;
  std::uint64_t seed = 1;
  int num_classes = 0;
  int batch = 0;  // 0 = full shard
  Topology topo;
  MixingMatrix mixing;
  AggregatorSpec aggregator;
  AttackSpec attack;
  std::vector<NodeState> nodes;
  ParamVector fl_global;

  std::vector<int> honest_users() const;
};

// Per-epoch metric record. Vectors are indexed by node; entries of byzantine
// (or absent) nodes are zero and never emitted. Means are over honest nodes;
// tau_mean averages the finite radii only.
struct EpochTrace {
  int epoch = 0;
  std::vector<double> consensus;
  std::vector<double> dist_target;
  std::vector<double> accuracy;
  std::vector<double> tau;
  double consensus_mean = 0.0;
  double dist_target_mean = 0.0;
  double accuracy_mean = 0.0;
  double tau_mean = 0.0;
};

// Squared distance of each honest state to the honest mean. Entries for
// nodes outside honest_set are zero; their states never enter the mean.
std::vector<double> consensus_distance(const std::vector<ParamVector>& states,
                                       const std::vector<int>& honest_set);

// Squared distance of each honest state to the target model.
std::vector<double> distance_to_target(const std::vector<ParamVector>& states,
                                       const std::vector<int>& honest_set,
                                       const ParamVector& target);

// Deterministic world construction from a validated run config: task, shards,
// topology, mixing, common initial parameters, initial momentum = local
// gradient at the starting point.
WorldState make_world(const RunConfig& run);

// One synchronous gossip epoch: honest half-steps, adversary updates (rushing:
// it sees all honest half-steps first), per-node aggregation, then metrics on
// the post-aggregation states.
EpochTrace run_dl_epoch(WorldState& world);

// One federated round: users train from the shared global model, the server
// aggregates all user updates (mean or the configured robust rule, with the
// previous global model as its clipping reference) and broadcasts the result.
EpochTrace run_fl_round(WorldState& world);

// Builds the world and advances it for the configured number of epochs.
// Identical config => bit-identical traces.
std::vector<EpochTrace> run_experiment(const RunConfig& run);

}  // namespace dlsim
