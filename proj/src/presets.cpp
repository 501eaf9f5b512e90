#include "dlsim/presets.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>

namespace dlsim {

namespace {

// Shared 9-node setup: 8 honest users u1..u8, byzantine node b at index 8,
// 10-class task, full-batch momentum training. Task scales below are desk
// calibrations chosen per experiment family (see README).
RunConfig base_run(const std::string& name) {
  RunConfig run;
  run.name = name;
  run.topology.byzantine = 8;
  return run;
}

RunConfig scclip_run(const std::string& name, TopologyKind kind, TauPolicy policy,
                     AttackKind attack) {
  RunConfig run = base_run(name);
  run.topology.kind = kind;
  run.aggregator.kind = AggregatorKind::scclip;
  run.aggregator.tau_policy = policy;
  run.attack.kind = attack;
  return run;
}

// State-override figure pairs: one run per clipping-radius variant. Small
// class-mean radius keeps the learner's pull at the zero target weak enough
// for the override to pin, and neighbor-only weights (the literal 1/|N_i|
// rule) give the gossip pull its full strength.
ExperimentConfig state_override_pair(TopologyKind kind, const std::string& stem,
                                     double radius) {
  ExperimentConfig config;
  for (TauPolicy policy : {TauPolicy::ideal, TauPolicy::constant}) {
    const std::string suffix = policy == TauPolicy::ideal ? "-ideal" : "-const";
    RunConfig run = scclip_run(stem + suffix, kind, policy, AttackKind::state_override);
    run.task.radius = radius;
    run.task.spread = 0.3;
    run.train.init_scale = 0.03;
    run.topology.self_weight = false;
    config.runs.push_back(std::move(run));
  }
  return config;
}

// Sandtrap figure pairs; the victim is the first honest neighbor of b (u3 in
// both graphs). The wide class-mean radius keeps the non-targets' models
// robust to the victim's stalled updates, so the accuracy split between the
// victim and the rest stays visible.
ExperimentConfig sandtrap_pair(TopologyKind kind, const std::string& stem,
                               double radius, double spread) {
  ExperimentConfig config;
  for (TauPolicy policy : {TauPolicy::ideal, TauPolicy::constant}) {
    const std::string suffix = policy == TauPolicy::ideal ? "-ideal" : "-const";
    RunConfig run = scclip_run(stem + suffix, kind, policy, AttackKind::sandtrap);
    run.attack.victim = 2;
    run.task.radius = radius;
    run.task.spread = spread;
    config.runs.push_back(std::move(run));
  }
  return config;
}

// Connectivity sweep under dissensus: honest connectivity grows from the ring
// through regular(9,4) up to the fully connected honest subgraph, while the
// adversary keeps its two ring edges throughout.
ExperimentConfig conn_sweep() {
  ExperimentConfig config;
  {
    RunConfig run = base_run("conn-ring");
    run.topology.kind = TopologyKind::ring;
    run.attack.kind = AttackKind::dissensus;
    config.runs.push_back(std::move(run));
  }
  for (const auto& [k, name] : std::map<int, std::string>{{4, "conn-regular-9-4"},
                                                          {8, "conn-complete"}}) {
    RunConfig run = base_run(name);
    run.topology.kind = TopologyKind::regular;
    run.topology.k = k;
    run.attack.kind = AttackKind::dissensus;
    config.runs.push_back(std::move(run));
  }
  return config;
}

// Inconsistency experiment: the same noisy attack against the complete dl
// topology (n different updates) and against fl (one update).
ExperimentConfig noisy_dl_vs_fl() {
  ExperimentConfig config;
  {
    RunConfig run = base_run("noisy-dl-complete");
    run.topology.kind = TopologyKind::complete;
    run.attack.kind = AttackKind::noisy;
    run.task.test_per_class = 250;
    config.runs.push_back(std::move(run));
  }
  {
    RunConfig run = base_run("noisy-fl");
    run.mode = Mode::fl;
    run.topology.kind = TopologyKind::star_fl;
    run.topology.nodes = 10;
    run.attack.kind = AttackKind::noisy;
    run.task.test_per_class = 250;
    config.runs.push_back(std::move(run));
  }
  return config;
}

// Clipping-radius manipulation probe: matched state-override and benign runs
// with the ideal radius. The steep task (large class-mean radius, larger
// step size) makes the benign radius collapse within a few epochs while the
// attack keeps distances inflated, which is the effect being traced.
ExperimentConfig tau_trace() {
  ExperimentConfig config;
  for (const auto& [topo, stem] :
       std::vector<std::pair<TopologyKind, std::string>>{
           {TopologyKind::torus3x3, "tau-torus"}, {TopologyKind::dumbbell9, "tau-dumbbell"}}) {
    for (const auto& [attack, suffix] :
         std::vector<std::pair<AttackKind, std::string>>{
             {AttackKind::state_override, "-so"}, {AttackKind::honest, "-benign"}}) {
      RunConfig run = scclip_run(stem + suffix, topo, TauPolicy::ideal, attack);
      run.task.radius = 28.0;
      run.train.eta = 0.08;
      run.train.init_scale = 0.005;
      config.runs.push_back(std::move(run));
    }
  }
  return config;
}

// Server-side robust aggregation: rfa and scclip against the noisy attack in
// fl, dl-complete and dl-ring.
ExperimentConfig ra_fl_vs_dl() {
  ExperimentConfig config;
  for (AggregatorKind agg : {AggregatorKind::rfa, AggregatorKind::scclip}) {
    const std::string stem = agg == AggregatorKind::rfa ? "ra-rfa" : "ra-scclip";
    for (const auto& [suffix, kind, mode] :
         std::vector<std::tuple<std::string, TopologyKind, Mode>>{
             {"-dl-ring", TopologyKind::ring, Mode::dl},
             {"-dl-complete", TopologyKind::complete, Mode::dl},
             {"-fl", TopologyKind::star_fl, Mode::fl}}) {
      RunConfig run = base_run(stem + suffix);
      run.mode = mode;
      run.topology.kind = kind;
      if (mode == Mode::fl) run.topology.nodes = 10;
      run.aggregator.kind = agg;
      if (agg == AggregatorKind::scclip) run.aggregator.tau_policy = TauPolicy::ideal;
      run.attack.kind = AttackKind::noisy;
      run.task.test_per_class = 250;
      config.runs.push_back(std::move(run));
    }
  }
  return config;
}

// Benign references for the accuracy table: full-network runs for both radius
// variants, plus victim-excluded torus runs. The dumbbell loses connectivity
// without u3 (it bridges the cliques), so it has no victim-excluded variant.
ExperimentConfig table1_baselines() {
  ExperimentConfig config;
  for (TopologyKind kind : {TopologyKind::torus3x3, TopologyKind::dumbbell9}) {
    const std::string stem =
        kind == TopologyKind::torus3x3 ? "baseline-torus" : "baseline-dumbbell";
    for (TauPolicy policy : {TauPolicy::ideal, TauPolicy::constant}) {
      const std::string suffix = policy == TauPolicy::ideal ? "-ideal" : "-const";
      config.runs.push_back(scclip_run(stem + suffix, kind, policy, AttackKind::honest));
    }
  }
  for (TauPolicy policy : {TauPolicy::ideal, TauPolicy::constant}) {
    const std::string suffix = policy == TauPolicy::ideal ? "-ideal" : "-const";
    RunConfig run = scclip_run("baseline-torus-no-victim" + suffix, TopologyKind::torus3x3,
                               policy, AttackKind::honest);
    run.topology.removed = 2;
    config.runs.push_back(std::move(run));
  }
  return config;
}

const std::map<std::string, std::function<ExperimentConfig()>>& preset_table() {
  static const std::map<std::string, std::function<ExperimentConfig()>> table = {
      {"fig2-torus-so",
       [] { return state_override_pair(TopologyKind::torus3x3, "fig2-torus-so", 1.6); }},
      {"fig2-dumbbell-so",
       [] { return state_override_pair(TopologyKind::dumbbell9, "fig2-dumbbell-so", 1.3); }},
      {"fig2-torus-st",
       [] { return sandtrap_pair(TopologyKind::torus3x3, "fig2-torus-st", 6.0, 0.35); }},
      {"fig2-dumbbell-st",
       [] { return sandtrap_pair(TopologyKind::dumbbell9, "fig2-dumbbell-st", 6.0, 0.35); }},
      {"conn-sweep", conn_sweep},
      {"noisy-dl-vs-fl", noisy_dl_vs_fl},
      {"tau-trace", tau_trace},
      {"ra-fl-vs-dl", ra_fl_vs_dl},
      {"table1-baselines", table1_baselines},
  };
  return table;
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string names;
    for (const std::string& n : preset_names()) {
      if (!names.empty()) names += ", ";
      names += n;
    }
    throw std::invalid_argument("unknown preset '" + name + "' (valid: " + names + ")");
  }
  ExperimentConfig config = it->second();
  for (RunConfig& run : config.runs) resolve_defaults(run);
  return config;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : preset_table()) names.push_back(name);
  return names;
}

}  // namespace dlsim
