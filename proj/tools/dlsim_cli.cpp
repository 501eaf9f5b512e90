// Command-line front end: run experiments from config files or presets and
// emit per-run trace CSVs plus resolved-config manifests.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dlsim/config.hpp"
#include "dlsim/engine.hpp"
#include "dlsim/presets.hpp"
#include "dlsim/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int execute(dlsim::ExperimentConfig config, const std::string& out_override) {
  for (dlsim::RunConfig& run : config.runs) {
    if (!out_override.empty()) run.out_dir = out_override;
    const fs::path dir = dlsim::resolve_out_dir(run);
    const dlsim::WorldState world = dlsim::make_world(run);
    const std::vector<dlsim::EpochTrace> traces = dlsim::run_experiment(run);
    const dlsim::RunOutput output = dlsim::write_run_output(dir, run, world.topo, traces);
    const dlsim::EpochTrace& last = traces.back();
    std::cout << run.name << ": " << run.epochs << " epochs, final mean accuracy "
              << dlsim::format_double(last.accuracy_mean) << ", consensus distance "
              << dlsim::format_double(last.consensus_mean) << " -> " << output.trace_path.string()
              << "\n";
  }
  return 0;
}

// Expands a pattern like dir/*.cfg against the filesystem; a plain path is
// returned as-is.
std::vector<fs::path> expand_glob(const std::string& pattern) {
  const fs::path p(pattern);
  const std::string filename = p.filename().string();
  if (filename.find('*') == std::string::npos && filename.find('?') == std::string::npos) {
    return {p};
  }
  const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
  std::vector<fs::path> matches;
  if (!fs::exists(dir)) return matches;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    // Greedy-free wildcard match, iterative.
    std::size_t n = 0, m = 0, star = std::string::npos, restart = 0;
    bool ok = true;
    while (n < name.size()) {
      if (m < filename.size() && (filename[m] == '?' || filename[m] == name[n])) {
        ++n, ++m;
      } else if (m < filename.size() && filename[m] == '*') {
        star = m++;
        restart = n;
      } else if (star != std::string::npos) {
        m = star + 1;
        n = ++restart;
      } else {
        ok = false;
        break;
      }
    }
    while (ok && m < filename.size() && filename[m] == '*') ++m;
    if (ok && m == filename.size()) matches.push_back(entry.path());
  }
  std::sort(matches.begin(), matches.end());
  return matches;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robustness simulator for gossip and federated learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::string topo_kind;
  std::string topo_out;
  std::vector<std::string> sweep_patterns;
  int topo_nodes = 9;
  int topo_k = 0;
  int topo_byz = -1;
  std::uint64_t seed_override = 0;
  int epochs_override = 0;
  bool have_seed = false;
  bool have_epochs = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run a config file");
  run_cmd->add_option("config", config_path, "config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides config)");

  CLI::App* preset_cmd = app.add_subcommand("preset", "run a named preset");
  preset_cmd->add_option("name", preset_name, "preset name")->required();
  preset_cmd->add_option("--out", out_dir, "output directory");
  preset_cmd->add_option("--seed", seed_override, "seed override")
      ->each([&](const std::string&) { have_seed = true; });
  preset_cmd->add_option("--epochs", epochs_override, "epoch count override")
      ->each([&](const std::string&) { have_epochs = true; });

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run every config matching the globs");
  sweep_cmd->add_option("globs", sweep_patterns, "config files or patterns")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory (overrides configs)");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check a config without running it");
  validate_cmd->add_option("config", config_path, "config file")->required();

  app.add_subcommand("list-presets", "print the preset names");

  CLI::App* topo_cmd = app.add_subcommand("topology", "export a topology as an edge list");
  topo_cmd->add_option("kind", topo_kind, "ring|regular|complete|torus3x3|dumbbell9|star_fl")
      ->required();
  topo_cmd->add_option("--nodes", topo_nodes, "node count");
  topo_cmd->add_option("--k", topo_k, "regular-graph degree");
  topo_cmd->add_option("--byz", topo_byz, "byzantine node index");
  topo_cmd->add_option("--out", topo_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return execute(dlsim::parse_config(read_file(config_path)), out_dir);
    }
    if (preset_cmd->parsed()) {
      dlsim::ExperimentConfig config = dlsim::preset(preset_name);
      for (dlsim::RunConfig& run : config.runs) {
        if (have_seed) run.seed = seed_override;
        if (have_epochs) run.epochs = epochs_override;
      }
      return execute(std::move(config), out_dir);
    }
    if (sweep_cmd->parsed()) {
      std::vector<fs::path> files;
      for (const std::string& pattern : sweep_patterns) {
        for (fs::path& p : expand_glob(pattern)) files.push_back(std::move(p));
      }
      if (files.empty()) {
        std::cerr << "sweep: no config files matched\n";
        return 1;
      }
      for (const fs::path& file : files) {
        std::cout << "== " << file.string() << "\n";
        execute(dlsim::parse_config(read_file(file)), out_dir);
      }
      return 0;
    }
    if (validate_cmd->parsed()) {
      const dlsim::ExperimentConfig config = dlsim::parse_config(read_file(config_path));
      for (const dlsim::RunConfig& run : config.runs) {
        std::cout << dlsim::render_config(run) << "\n";
      }
      std::cout << "ok: " << config.runs.size() << " run(s)\n";
      return 0;
    }
    if (app.get_subcommand("list-presets")->parsed()) {
      for (const std::string& name : dlsim::preset_names()) std::cout << name << "\n";
      return 0;
    }
    if (topo_cmd->parsed()) {
      const auto kind = dlsim::topology_kind_from_string(topo_kind);
      if (!kind) throw std::invalid_argument("unknown topology kind '" + topo_kind + "'");
      const dlsim::Topology topo = dlsim::build_topology(
          *kind, topo_nodes, topo_k > 0 ? std::optional<int>(topo_k) : std::nullopt,
          topo_byz >= 0 ? std::vector<int>{topo_byz} : std::vector<int>{});
      const std::string text = dlsim::render_edge_list(topo);
      if (topo_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(topo_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + topo_out);
        out << text;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
