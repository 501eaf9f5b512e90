#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlsim/config.hpp"
#include "dlsim/engine.hpp"
#include "dlsim/presets.hpp"
#include "dlsim/trace_io.hpp"

using namespace dlsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool has_error(const ConfigParseError& e, const std::string& field_part,
               const std::string& message_part = "") {
  for (const ConfigError& err : e.errors()) {
    if (err.field.find(field_part) != std::string::npos &&
        err.message.find(message_part) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("minimal preset reference expands with defaults") {
  const ExperimentConfig config = parse_config("[experiment]\npreset = fig2-torus-so\n");
  REQUIRE(config.runs.size() == 2);
  CHECK(config.runs[0].name == "fig2-torus-so-ideal");
  CHECK(config.runs[0].epochs == 300);
  CHECK(config.runs[0].train.alpha == 0.9);
  CHECK(config.runs[0].train.eta == 0.01);
  CHECK(config.runs[0].topology.kind == TopologyKind::torus3x3);
  CHECK(config.runs[0].attack.kind == AttackKind::state_override);
  CHECK(config.runs[1].aggregator.tau_policy == TauPolicy::constant);
  CHECK(config.runs[1].aggregator.tau_const == 1.0);
}

TEST_CASE("preset documents accept seed and epoch overrides only") {
  const ExperimentConfig config = parse_config(
      "[experiment]\npreset = conn-sweep\nseed = 9\nepochs = 40\n");
  for (const RunConfig& run : config.runs) {
    CHECK(run.seed == 9);
    CHECK(run.epochs == 40);
  }
  CHECK_THROWS_AS(parse_config("[experiment]\npreset = conn-sweep\n[task]\nclasses = 4\n"),
                  ConfigParseError);
}

TEST_CASE("unknown names are rejected with guidance") {
  SUBCASE("attack kind lists the valid set") {
    try {
      parse_config("[attack]\nkind = gaslight\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "attack.kind", "state_override"));
      CHECK(has_error(e, "attack.kind", "sandtrap"));
    }
  }
  SUBCASE("unknown key is named with its line") {
    try {
      parse_config("[task]\nclasses = 10\nbogus_key = 1\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      REQUIRE(e.errors().size() == 1);
      CHECK(e.errors()[0].line == 3);
      CHECK(e.errors()[0].field == "task.bogus_key");
    }
  }
  SUBCASE("unknown preset lists presets") {
    try {
      parse_config("[experiment]\npreset = nope\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "experiment.preset", "conn-sweep"));
    }
  }
  SUBCASE("syntax errors carry line numbers") {
    try {
      parse_config("[experiment\nname = x\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(e.errors()[0].line == 1);
    }
  }
}

TEST_CASE("semantic validation") {
  SUBCASE("non-positive constant radius") {
    try {
      parse_config("[aggregator]\nkind = scclip\ntau = -1\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "aggregator.tau", "> 0"));
    }
  }
  SUBCASE("sandtrap victim must neighbor the adversary") {
    const std::string text =
        "[topology]\nkind = dumbbell9\nbyzantine = 8\n[attack]\nkind = sandtrap\nvictim = 0\n";
    try {
      parse_config(text);
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "attack.victim", "neighbor"));
    }
  }
  SUBCASE("fl mode constraints") {
    try {
      parse_config("[experiment]\nmode = fl\n[topology]\nkind = ring\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "topology.kind", "star_fl"));
    }
    try {
      parse_config(
          "[experiment]\nmode = fl\n[topology]\nkind = star_fl\nnodes = 10\nbyzantine = 8\n"
          "[attack]\nkind = dissensus\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "attack.kind", "noisy"));
    }
  }
  SUBCASE("attacks need an adversary") {
    try {
      parse_config("[topology]\nkind = ring\nbyzantine = none\n[attack]\nkind = dissensus\n");
      FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
      CHECK(has_error(e, "attack.kind", "byzantine"));
    }
  }
}

TEST_CASE("defaults resolve per attack kind") {
  const ExperimentConfig noisy = parse_config(
      "[topology]\nkind = complete\nbyzantine = 8\n[attack]\nkind = noisy\n");
  CHECK(noisy.runs[0].attack.epsilon == 0.05);
  const ExperimentConfig dis = parse_config(
      "[topology]\nkind = complete\nbyzantine = 8\n[attack]\nkind = dissensus\n");
  CHECK(dis.runs[0].attack.epsilon == 1.0);
}

TEST_CASE("render and parse round-trip every preset run") {
  for (const std::string& name : preset_names()) {
    const ExperimentConfig config = preset(name);
    for (const RunConfig& run : config.runs) {
      CAPTURE(run.name);
      const ExperimentConfig back = parse_config(render_config(run));
      REQUIRE(back.runs.size() == 1);
      CHECK(back.runs[0] == run);
    }
  }
}

TEST_CASE("every preset topology keeps the honest subgraph connected") {
  for (const std::string& name : preset_names()) {
    for (const RunConfig& run : preset(name).runs) {
      CAPTURE(run.name);
      Topology topo = build_topology(
          run.topology.kind, run.topology.nodes,
          run.topology.k > 0 ? std::optional<int>(run.topology.k) : std::nullopt,
          run.topology.byzantine >= 0 ? std::vector<int>{run.topology.byzantine}
                                      : std::vector<int>{});
      if (run.topology.removed >= 0) topo = remove_node(topo, run.topology.removed);
      const auto report = validate_topology(topo, uniform_mixing(topo, run.topology.self_weight));
      CHECK(report.connected);
      CHECK(report.honest_subgraph_connected);
    }
  }
}

TEST_CASE("trace files") {
  RunConfig run;
  run.name = "trace-check";
  run.seed = 5;
  run.epochs = 12;
  run.task.classes = 9;
  run.task.features = 6;
  run.task.train_per_class = 20;
  run.task.test_per_class = 20;
  run.topology.kind = TopologyKind::ring;
  run.topology.nodes = 9;
  run.topology.byzantine = 8;
  run.attack.kind = AttackKind::noisy;
  resolve_defaults(run);
  REQUIRE(validate_run(run).empty());

  const WorldState world = make_world(run);
  const auto traces = run_experiment(run);

  SUBCASE("row count is epochs plus header and columns cover honest nodes") {
    const std::string csv = render_trace_csv(world.topo, traces);
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 13);
    CHECK(csv.rfind("epoch,c_u1,", 0) == 0);
    CHECK(csv.find("acc_u8") != std::string::npos);
    CHECK(csv.find("_b") == std::string::npos);  // byzantine column never emitted
    CHECK(csv.find("tau_mean") != std::string::npos);
  }

  SUBCASE("writes are byte-identical across reruns and manifests resolve defaults") {
    const auto dir = std::filesystem::temp_directory_path() / "dlsim-test-traces";
    std::filesystem::remove_all(dir);
    const RunOutput out1 = write_run_output(dir, run, world.topo, traces);
    const std::string csv1 = slurp(out1.trace_path);
    const std::string manifest1 = slurp(out1.manifest_path);

    const auto traces2 = run_experiment(run);
    const RunOutput out2 = write_run_output(dir, run, world.topo, traces2);
    CHECK(slurp(out2.trace_path) == csv1);
    CHECK(slurp(out2.manifest_path) == manifest1);

    CHECK(manifest1.find("alpha = 0.9") != std::string::npos);
    CHECK(manifest1.find("epsilon = 0.05") != std::string::npos);
    const ExperimentConfig parsed = parse_config(manifest1);
    CHECK(parsed.runs[0] == run);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("run experiment rejects invalid configs before simulating") {
  RunConfig run;
  run.topology.kind = TopologyKind::torus3x3;
  run.topology.nodes = 8;  // violates the builder constraint
  CHECK_THROWS_AS(make_world(run), std::invalid_argument);
}

TEST_CASE("ideal-radius floor knob") {
  const std::string base =
      "[topology]\nkind = torus3x3\nbyzantine = 8\n[aggregator]\nkind = scclip\ntau = ideal\n";
  const ExperimentConfig config = parse_config(base + "tau_floor = 0.5\n");
  CHECK(config.runs[0].aggregator.tau_floor == 0.5);
  const ExperimentConfig back = parse_config(render_config(config.runs[0]));
  CHECK(back.runs[0] == config.runs[0]);

  CHECK_THROWS_AS(parse_config(base + "tau_floor = 0\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config("[aggregator]\nkind = naive\ntau_floor = 1\n"),
                  ConfigParseError);

  // Engine honors the floor: with a tight floor every node clips, so one
  // epoch moves nobody further than the floor from its half-step.
  RunConfig run = config.runs[0];
  run.task.classes = 9;
  run.task.features = 6;
  run.task.train_per_class = 15;
  run.task.test_per_class = 10;
  run.aggregator.tau_floor = 1e-9;
  run.attack.kind = AttackKind::honest;
  resolve_defaults(run);
  REQUIRE(validate_run(run).empty());
  WorldState world = make_world(run);
  std::vector<ParamVector> halves;
  for (const NodeState& node : world.nodes) {
    halves.push_back(local_half_step(node.params, node.momentum, world.num_classes,
                                     node.shard.train_samples)
                         .first);
  }
  run_dl_epoch(world);
  for (std::size_t i = 0; i < world.nodes.size(); ++i) {
    if (world.topo.is_byzantine(static_cast<int>(i))) continue;
    const double dist = distance(world.nodes[i].params, halves[i]);
    // b's neighbors have a finite variance radius instead of the floor.
    const bool b_neighbor = world.topo.has_edge(static_cast<int>(i), 8);
    if (!b_neighbor) CHECK(dist <= 1e-9 + 1e-15);
  }
}

TEST_CASE("shortest round-trip number formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -0.0, 2.5e17}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(1.0) == "1");
}
