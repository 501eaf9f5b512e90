#include "dlsim/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dlsim/rng.hpp"

namespace dlsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Sample> select_batch(const WorldState& world, int node) {
  const std::vector<Sample>& shard = world.nodes[node].shard.train_samples;
  if (world.batch <= 0 || world.batch >= static_cast<int>(shard.size())) {
    return shard;  // full local shard, deterministic
  }
  RandomStream stream(world.seed, StreamPurpose::minibatch,
                      static_cast<std::uint64_t>(world.epoch),
                      static_cast<std::uint64_t>(node));
  std::vector<Sample> batch;
  batch.reserve(world.batch);
  for (int s = 0; s < world.batch; ++s) {
    const std::size_t idx = stream.next_u64() % shard.size();
    batch.push_back(shard[idx]);
  }
  return batch;
}

void check_update(const ParamVector& v, int node, int epoch) {
  if (!all_finite(v)) {
    throw std::runtime_error("protocol error: non-finite update at node " +
                             std::to_string(node) + ", epoch " + std::to_string(epoch));
  }
}

double honest_mean(const std::vector<double>& per_node, const std::vector<int>& honest) {
  double acc = 0.0;
  for (int i : honest) acc += per_node[i];
  return acc / static_cast<double>(honest.size());
}

// Mean over finite radii; nodes without a byzantine neighbor clip at
// infinity and carry no information about the radius dynamics.
double finite_tau_mean(const std::vector<double>& tau, const std::vector<int>& honest) {
  double acc = 0.0;
  int count = 0;
  for (int i : honest) {
    if (std::isfinite(tau[i])) {
      acc += tau[i];
      ++count;
    }
  }
  return count == 0 ? kInf : acc / count;
}

EpochTrace make_trace(const WorldState& world, const std::vector<ParamVector>& states,
                      const std::vector<int>& honest, const std::vector<double>& tau) {
  EpochTrace trace;
  trace.epoch = world.epoch;
  trace.consensus = consensus_distance(states, honest);
  trace.dist_target = distance_to_target(states, honest, world.attack.target_model);
  trace.accuracy.assign(states.size(), 0.0);
  for (int i : honest) {
    trace.accuracy[i] =
        evaluate_accuracy(states[i], world.num_classes, world.nodes[i].shard.test_samples);
  }
  trace.tau = tau;
  trace.consensus_mean = honest_mean(trace.consensus, honest);
  trace.dist_target_mean = honest_mean(trace.dist_target, honest);
  trace.accuracy_mean = honest_mean(trace.accuracy, honest);
  trace.tau_mean = finite_tau_mean(tau, honest);
  return trace;
}

ParamVector aggregate_inbox(const WorldState& world, const InboxView& inbox, double tau) {
  switch (world.aggregator.kind) {
    case AggregatorKind::naive:
      return naive_aggregate(inbox, world.mixing);
    case AggregatorKind::scclip:
      return scclip_aggregate(inbox, world.mixing, tau);
    case AggregatorKind::rfa: {
      // Points in ascending sender order, self in place, weighted by the row.
      std::vector<ParamVector> points;
      std::vector<double> weights;
      for (int j = 0; j < world.mixing.n; ++j) {
        const double w = world.mixing.at(inbox.receiver, j);
        if (w == 0.0) continue;
        points.push_back(j == inbox.receiver ? inbox.self_half_step : inbox.received.at(j));
        weights.push_back(w);
      }
      return rfa_geometric_median(points, weights, world.aggregator.rfa_iters,
                                  world.aggregator.rfa_eps);
    }
  }
  throw std::logic_error("aggregate_inbox: unknown aggregator");
}

}  // namespace

std::vector<int> WorldState::honest_users() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (!nodes[i].byzantine) out.push_back(i);
  }
  return out;
}

std::vector<double> consensus_distance(const std::vector<ParamVector>& states,
                                       const std::vector<int>& honest_set) {
  if (honest_set.empty()) throw std::invalid_argument("consensus_distance: no honest nodes");
  ParamVector mean(states[honest_set.front()].size(), 0.0);
  for (int j : honest_set) mean.axpy(1.0 / honest_set.size(), states[j]);
  std::vector<double> out(states.size(), 0.0);
  for (int i : honest_set) out[i] = squared_distance(states[i], mean);
  return out;
}

std::vector<double> distance_to_target(const std::vector<ParamVector>& states,
                                       const std::vector<int>& honest_set,
                                       const ParamVector& target) {
  std::vector<double> out(states.size(), 0.0);
  for (int i : honest_set) out[i] = squared_distance(states[i], target);
  return out;
}

WorldState make_world(const RunConfig& run) {
  WorldState world;
  world.mode = run.mode;
  world.seed = run.seed;
  world.num_classes = run.task.classes;
  world.batch = run.train.batch;

  world.topo = build_topology(run.topology.kind, run.topology.nodes,
                              run.topology.k > 0 ? std::optional<int>(run.topology.k)
                                                 : std::nullopt,
                              run.topology.byzantine >= 0
                                  ? std::vector<int>{run.topology.byzantine}
                                  : std::vector<int>{});
  if (run.topology.removed >= 0) world.topo = remove_node(world.topo, run.topology.removed);
  world.mixing = uniform_mixing(world.topo, run.topology.self_weight);

  world.aggregator.kind = run.aggregator.kind;
  world.aggregator.tau_policy = run.aggregator.tau_policy;
  world.aggregator.tau_const = run.aggregator.tau_const;
  world.aggregator.tau_no_byzantine = run.aggregator.tau_floor;
  world.aggregator.rfa_iters = run.aggregator.rfa_iters;
  world.aggregator.rfa_eps = run.aggregator.rfa_eps;

  const int d = model_dim(run.task.classes, run.task.features);
  world.attack.kind = run.attack.kind;
  world.attack.victim = run.attack.victim;
  world.attack.epsilon = run.attack.epsilon;
  world.attack.noise_high = run.attack.noise_high;
  world.attack.target_model = ParamVector(d, 0.0);  // the all-zero target

  // In fl mode the last topology node is the server; everyone else is a user.
  const int num_users =
      run.mode == Mode::fl ? world.topo.num_nodes - 1 : world.topo.num_nodes;

  const Task task = make_synthetic_task(run.seed, run.task.classes, run.task.features,
                                        run.task.train_per_class, run.task.spread,
                                        run.task.test_per_class, run.task.radius);
  std::vector<Task> shards = partition_by_class(task, num_users);

  // Common starting point for every node, one seeded stream.
  ParamVector theta0(d);
  RandomStream init(run.seed, StreamPurpose::init_params);
  for (int c = 0; c < d; ++c) theta0[c] = run.train.init_scale * init.normal();

  world.nodes.resize(num_users);
  for (int i = 0; i < num_users; ++i) {
    NodeState& node = world.nodes[i];
    node.shard = std::move(shards[i]);
    node.byzantine = world.topo.is_byzantine(i);
    node.params = theta0;
    node.momentum.alpha = run.train.alpha;
    node.momentum.eta = run.train.eta;
    // m_0 is the local gradient at the common starting point.
    node.momentum.buffer =
        softmax_gradient(theta0, world.num_classes, node.shard.train_samples);
  }
  if (run.mode == Mode::fl) world.fl_global = theta0;
  return world;
}

EpochTrace run_dl_epoch(WorldState& world) {
  if (world.mode != Mode::dl) throw std::logic_error("run_dl_epoch: world is not in dl mode");
  const int n = world.topo.num_nodes;
  const std::vector<int> honest = world.topo.honest_nodes();
  const bool benign = world.attack.kind == AttackKind::honest;

  // 1. Local half-steps for every protocol-following node.
  std::vector<ParamVector> half(n);
  std::vector<MomentumState> next_momentum(n);
  for (int i = 0; i < n; ++i) {
    if (world.nodes[i].byzantine && !benign) continue;
    const std::vector<Sample> batch = select_batch(world, i);
    auto [h, m] = local_half_step(world.nodes[i].params, world.nodes[i].momentum,
                                  world.num_classes, batch);
    check_update(h, i, world.epoch);
    half[i] = std::move(h);
    next_momentum[i] = std::move(m);
  }

  // 2. The rushing adversary observes every honest half-step of this epoch.
  OmniscientView view;
  view.epoch = world.epoch;
  view.mixing = &world.mixing;
  view.honest_set = honest;
  for (int i : honest) view.honest_half_steps.emplace(i, half[i]);

  // Radii the receivers will use, computed from the same half-steps. For the
  // min_distance policy this is the honest-only lower bound; the actual
  // radius can only shrink further, which never un-clips an update.
  std::vector<double> advertised(n, kInf);
  if (world.aggregator.kind == AggregatorKind::scclip) {
    for (int i = 0; i < n; ++i) {
      if (world.nodes[i].byzantine && !benign) continue;
      InboxView honest_inbox;
      honest_inbox.receiver = i;
      honest_inbox.self_half_step = half[i];
      for (int j : world.topo.neighbors[i]) {
        if (!world.topo.is_byzantine(j) || benign) honest_inbox.received.emplace(j, half[j]);
      }
      // A benign-behaving byzantine node has no byzantine neighbors of its own.
      static const std::vector<int> kNoByz;
      const std::vector<int>& byz_view = world.nodes[i].byzantine ? kNoByz : world.topo.byzantine;
      advertised[i] = tau_policy_eval(world.aggregator, honest_inbox, world.mixing, honest,
                                      byz_view);
    }
  }

  // 3. Adversary updates, one per honest neighbor.
  std::map<int, ParamVector> byz_updates;
  if (!world.topo.byzantine.empty() && !benign) {
    view.byz_index = world.topo.byzantine.front();
    for (int i : honest) {
      if (world.mixing.at(i, view.byz_index) > 0.0) view.receiver_tau[i] = advertised[i];
    }
    switch (world.attack.kind) {
      case AttackKind::state_override:
        byz_updates = attack_state_override(view, world.attack);
        break;
      case AttackKind::state_override_clip_aware:
        byz_updates = attack_state_override_clip_aware(view, world.attack);
        break;
      case AttackKind::sandtrap:
        byz_updates = attack_sandtrap(view, world.attack);
        break;
      case AttackKind::dissensus:
        byz_updates = attack_dissensus(view, world.attack);
        break;
      case AttackKind::noisy:
        byz_updates = attack_noisy_dl(view, world.attack, world.seed);
        break;
      case AttackKind::honest:
        break;
    }
    for (auto& [receiver, update] : byz_updates) check_update(update, receiver, world.epoch);
  }

  // 4. Everyone aggregates its inbox; all nodes advance synchronously.
  std::vector<ParamVector> next(n);
  std::vector<double> tau_used(n, kInf);
  for (int i = 0; i < n; ++i) {
    if (world.nodes[i].byzantine && !benign) continue;
    InboxView inbox;
    inbox.receiver = i;
    inbox.self_half_step = half[i];
    for (int j : world.topo.neighbors[i]) {
      if (world.topo.is_byzantine(j) && !benign) {
        inbox.received.emplace(j, byz_updates.at(i));
      } else {
        inbox.received.emplace(j, half[j]);
      }
    }
    double tau = kInf;
    if (world.aggregator.kind == AggregatorKind::scclip) {
      tau = world.aggregator.tau_policy == TauPolicy::min_distance
                ? tau_policy_eval(world.aggregator, inbox, world.mixing, honest,
                                  world.topo.byzantine)
                : advertised[i];
      tau_used[i] = tau;
    }
    next[i] = aggregate_inbox(world, inbox, tau);
    check_update(next[i], i, world.epoch);
  }

  for (int i = 0; i < n; ++i) {
    if (world.nodes[i].byzantine && !benign) continue;
    world.nodes[i].params = std::move(next[i]);
    world.nodes[i].momentum = std::move(next_momentum[i]);
  }
  world.epoch += 1;

  std::vector<ParamVector> states(n);
  for (int i = 0; i < n; ++i) states[i] = world.nodes[i].params;
  return make_trace(world, states, honest, tau_used);
}

EpochTrace run_fl_round(WorldState& world) {
  if (world.mode != Mode::fl) throw std::logic_error("run_fl_round: world is not in fl mode");
  const int num_users = static_cast<int>(world.nodes.size());
  const int server = world.topo.num_nodes - 1;
  const std::vector<int> honest = world.honest_users();
  const bool benign = world.attack.kind == AttackKind::honest;

  // Users train from the shared global model.
  std::vector<ParamVector> updates(num_users);
  for (int i = 0; i < num_users; ++i) {
    if (world.nodes[i].byzantine && !benign) continue;
    const std::vector<Sample> batch = select_batch(world, i);
    auto [h, m] = local_half_step(world.nodes[i].params, world.nodes[i].momentum,
                                  world.num_classes, batch);
    check_update(h, i, world.epoch);
    updates[i] = std::move(h);
    world.nodes[i].momentum = std::move(m);
  }

  double tau = kInf;
  if (!benign && !world.topo.byzantine.empty()) {
    const int b = world.topo.byzantine.front();
    if (world.attack.kind != AttackKind::noisy) {
      throw std::runtime_error("fl mode supports only the noisy attack (or honest)");
    }
    OmniscientView view;
    view.epoch = world.epoch;
    view.mixing = &world.mixing;
    view.byz_index = b;
    view.honest_set = honest;
    for (int i : honest) view.honest_half_steps.emplace(i, updates[i]);
    updates[b] = attack_noisy_fl(view, world.attack, world.seed);
    check_update(updates[b], b, world.epoch);
  }

  // Server aggregation over all user updates, uniform weights, with the
  // previous global model as the reference point for robust rules.
  const double w = 1.0 / static_cast<double>(num_users);
  ParamVector aggregated;
  switch (world.aggregator.kind) {
    case AggregatorKind::naive: {
      ParamVector acc(world.fl_global.size(), 0.0);
      for (int i = 0; i < num_users; ++i) acc.axpy(w, updates[i]);
      aggregated = std::move(acc);
      break;
    }
    case AggregatorKind::scclip: {
      switch (world.aggregator.tau_policy) {
        case TauPolicy::constant:
          tau = world.aggregator.tau_const;
          break;
        case TauPolicy::min_distance: {
          tau = kInf;
          for (int i = 0; i < num_users; ++i) {
            tau = std::min(tau, distance(world.fl_global, updates[i]));
          }
          break;
        }
        case TauPolicy::ideal: {
          const double delta = w * static_cast<double>(num_users - honest.size());
          if (delta == 0.0) {
            tau = world.aggregator.tau_no_byzantine;
          } else {
            double acc = 0.0;
            for (int i : honest) acc += w * squared_distance(world.fl_global, updates[i]);
            tau = std::sqrt(acc / delta);
          }
          break;
        }
      }
      ParamVector acc = world.fl_global;
      for (int i = 0; i < num_users; ++i) {
        acc.axpy(w, clip(updates[i] - world.fl_global, tau));
      }
      aggregated = std::move(acc);
      break;
    }
    case AggregatorKind::rfa: {
      std::vector<double> weights(num_users, w);
      aggregated = rfa_geometric_median(updates, weights, world.aggregator.rfa_iters,
                                        world.aggregator.rfa_eps);
      break;
    }
  }
  check_update(aggregated, server, world.epoch);

  world.fl_global = std::move(aggregated);
  for (int i = 0; i < num_users; ++i) world.nodes[i].params = world.fl_global;
  world.epoch += 1;

  std::vector<ParamVector> states(num_users, world.fl_global);
  std::vector<double> tau_col(num_users, tau);
  return make_trace(world, states, honest, tau_col);
}

std::vector<EpochTrace> run_experiment(const RunConfig& run) {
  WorldState world = make_world(run);
  std::vector<EpochTrace> traces;
  traces.reserve(run.epochs);
  for (int e = 0; e < run.epochs; ++e) {
    traces.push_back(world.mode == Mode::dl ? run_dl_epoch(world) : run_fl_round(world));
  }
  return traces;
}

}  // namespace dlsim
