#include "dlsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "dlsim/presets.hpp"
#include "dlsim/trace_io.hpp"

namespace dlsim {

std::string to_string(Mode mode) { return mode == Mode::dl ? "dl" : "fl"; }

std::string ConfigError::format() const {
  std::ostringstream out;
  if (line > 0) out << "line " << line << ": ";
  if (!field.empty()) out << field << ": ";
  out << message;
  return out.str();
}

namespace {

std::string join_errors(const std::vector<ConfigError>& errors) {
  std::ostringstream out;
  out << "invalid configuration:";
  for (const auto& e : errors) out << "\n  " << e.format();
  return out.str();
}

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Entry {
  int line;
  std::string section;
  std::string key;
  std::string value;
};

}  // namespace

ConfigParseError::ConfigParseError(std::vector<ConfigError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

void resolve_defaults(RunConfig& run) {
  if (run.attack.epsilon < 0.0) {
    switch (run.attack.kind) {
      case AttackKind::dissensus: run.attack.epsilon = 1.0; break;
      case AttackKind::noisy: run.attack.epsilon = 0.05; break;
      default: run.attack.epsilon = 0.0; break;
    }
  }
}

std::vector<ConfigError> validate_run(const RunConfig& run) {
  std::vector<ConfigError> errors;
  const auto fail = [&errors](const std::string& field, const std::string& message) {
    errors.push_back({0, field, message});
  };

  if (run.epochs < 1) fail("experiment.epochs", "must be >= 1");
  if (run.name.empty()) fail("experiment.name", "must not be empty");

  if (run.task.classes < 2) fail("task.classes", "must be >= 2");
  if (run.task.features < 2) fail("task.features", "must be >= 2");
  if (run.task.train_per_class < 10) fail("task.train_per_class", "must be >= 10");
  if (run.task.test_per_class < 1) fail("task.test_per_class", "must be >= 1");
  if (!(run.task.spread > 0.0)) fail("task.spread", "must be > 0");
  if (!(run.task.radius > 0.0)) fail("task.radius", "must be > 0");

  if (run.train.alpha < 0.0 || run.train.alpha > 1.0) fail("train.alpha", "must be in [0, 1]");
  if (!(run.train.eta > 0.0)) fail("train.eta", "must be > 0");
  if (run.train.batch < 0) fail("train.batch", "must be 'full' or a positive size");
  if (run.train.init_scale < 0.0) fail("train.init_scale", "must be >= 0");

  if (run.mode == Mode::fl && run.topology.kind != TopologyKind::star_fl) {
    fail("topology.kind", "fl mode requires the star_fl topology");
  }
  if (run.mode == Mode::dl && run.topology.kind == TopologyKind::star_fl) {
    fail("topology.kind", "star_fl is the fl-mode topology");
  }
  if (run.topology.byzantine >= run.topology.nodes) {
    fail("topology.byzantine", "index out of range");
  }

  // Build the graph now so every structural constraint surfaces before any
  // simulation work.
  Topology topo;
  bool have_topo = false;
  try {
    topo = build_topology(run.topology.kind, run.topology.nodes,
                          run.topology.k > 0 ? std::optional<int>(run.topology.k)
                                             : std::nullopt,
                          run.topology.byzantine >= 0
                              ? std::vector<int>{run.topology.byzantine}
                              : std::vector<int>{});
    if (run.topology.removed >= 0) topo = remove_node(topo, run.topology.removed);
    have_topo = true;
  } catch (const std::invalid_argument& e) {
    fail("topology", e.what());
  }

  if (have_topo) {
    const int num_users =
        run.mode == Mode::fl ? topo.num_nodes - 1 : topo.num_nodes;
    if (num_users > run.task.classes) {
      fail("task.classes", "fewer classes than users; the class partition needs "
                           "num_users <= classes");
    }
  }

  if (run.aggregator.kind == AggregatorKind::scclip) {
    if (run.aggregator.tau_policy == TauPolicy::constant && !(run.aggregator.tau_const > 0.0)) {
      fail("aggregator.tau", "must be > 0");
    }
    if (!(run.aggregator.tau_floor > 0.0)) fail("aggregator.tau_floor", "must be > 0");
  }
  if (run.aggregator.rfa_iters < 1) fail("aggregator.rfa_iters", "must be >= 1");
  if (!(run.aggregator.rfa_eps > 0.0)) fail("aggregator.rfa_eps", "must be > 0");

  const AttackKind atk = run.attack.kind;
  if (atk != AttackKind::honest) {
    if (run.topology.byzantine < 0) {
      fail("attack.kind", "a non-honest attack needs topology.byzantine");
    }
    if (run.mode == Mode::fl && atk != AttackKind::noisy) {
      fail("attack.kind", "fl mode supports only the noisy attack");
    }
  }
  if (atk == AttackKind::sandtrap) {
    if (run.attack.victim < 0) {
      fail("attack.victim", "sandtrap needs a victim node");
    } else if (have_topo && run.topology.byzantine >= 0) {
      const int v = run.attack.victim;
      if (v >= topo.num_nodes || topo.is_byzantine(v)) {
        fail("attack.victim", "victim must be an honest node");
      } else if (!topo.has_edge(v, run.topology.byzantine)) {
        fail("attack.victim", "victim must neighbor the byzantine node");
      }
    }
  } else if (run.attack.victim >= 0) {
    fail("attack.victim", "only meaningful for the sandtrap attack");
  }
  if (atk == AttackKind::noisy) {
    if (!(run.attack.epsilon > 0.0 && run.attack.epsilon <= 1.0)) {
      fail("attack.epsilon", "must be in (0, 1] for the noisy attack");
    }
    if (!(run.attack.noise_high > 0.0)) fail("attack.noise_high", "must be > 0");
  } else if (atk == AttackKind::dissensus) {
    if (run.attack.epsilon < 0.0) fail("attack.epsilon", "must be >= 0");
  }

  return errors;
}

namespace {

const char* const kSections[] = {"experiment", "task",   "train", "topology",
                                 "aggregator", "attack", "output"};

bool known_section(const std::string& s) {
  return std::find_if(std::begin(kSections), std::end(kSections),
                      [&s](const char* k) { return s == k; }) != std::end(kSections);
}

class EntryReader {
 public:
  EntryReader(std::vector<Entry> entries, std::vector<ConfigError>& errors)
      : entries_(std::move(entries)), errors_(errors) {}

  const Entry* find(const std::string& section, const std::string& key) {
    for (const Entry& e : entries_) {
      if (e.section == section && e.key == key) {
        used_.insert(&e - entries_.data());
        return &e;
      }
    }
    return nullptr;
  }

  bool get_string(const std::string& section, const std::string& key, std::string& out) {
    const Entry* e = find(section, key);
    if (!e) return false;
    out = e->value;
    return true;
  }

  bool get_int(const std::string& section, const std::string& key, int& out) {
    const Entry* e = find(section, key);
    if (!e) return false;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
      errors_.push_back({e->line, section + "." + key, "expected an integer, got '" + e->value + "'"});
      return false;
    }
    out = v;
    return true;
  }

  bool get_u64(const std::string& section, const std::string& key, std::uint64_t& out) {
    const Entry* e = find(section, key);
    if (!e) return false;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (ec != std::errc() || ptr != e->value.data() + e->value.size()) {
      errors_.push_back({e->line, section + "." + key, "expected an unsigned integer, got '" + e->value + "'"});
      return false;
    }
    out = v;
    return true;
  }

  bool get_double(const std::string& section, const std::string& key, double& out) {
    const Entry* e = find(section, key);
    if (!e) return false;
    try {
      std::size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("trailing characters");
      out = v;
      return true;
    } catch (const std::exception&) {
      errors_.push_back({e->line, section + "." + key, "expected a number, got '" + e->value + "'"});
      return false;
    }
  }

  bool get_bool(const std::string& section, const std::string& key, bool& out) {
    const Entry* e = find(section, key);
    if (!e) return false;
    if (e->value == "true") { out = true; return true; }
    if (e->value == "false") { out = false; return true; }
    errors_.push_back({e->line, section + "." + key, "expected true or false, got '" + e->value + "'"});
    return false;
  }

  void report_unused() {
    for (std::size_t idx = 0; idx < entries_.size(); ++idx) {
      if (!used_.count(idx)) {
        const Entry& e = entries_[idx];
        errors_.push_back({e.line, e.section + "." + e.key, "unknown or duplicate key"});
      }
    }
  }

 private:
  std::vector<Entry> entries_;
  std::vector<ConfigError>& errors_;
  std::set<std::size_t> used_;
};

std::string valid_list(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::vector<ConfigError> errors;
  std::vector<Entry> entries;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back({line_no, "", "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) {
        errors.push_back({line_no, section, "unknown section (valid: experiment, task, train, "
                                            "topology, aggregator, attack, output)"});
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({line_no, "", "expected 'key = value', got '" + line + "'"});
      continue;
    }
    if (section.empty()) {
      errors.push_back({line_no, "", "key outside any [section]"});
      continue;
    }
    entries.push_back({line_no, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  if (!errors.empty()) throw ConfigParseError(std::move(errors));

  EntryReader reader(std::move(entries), errors);

  // A document that names a preset may only override a handful of fields.
  std::string preset_name;
  if (reader.get_string("experiment", "preset", preset_name)) {
    ExperimentConfig config;
    try {
      config = preset(preset_name);
    } catch (const std::invalid_argument& e) {
      errors.push_back({0, "experiment.preset", e.what()});
      throw ConfigParseError(std::move(errors));
    }
    std::uint64_t seed = 0;
    if (reader.get_u64("experiment", "seed", seed)) {
      for (RunConfig& run : config.runs) run.seed = seed;
    }
    int epochs = 0;
    if (reader.get_int("experiment", "epochs", epochs)) {
      for (RunConfig& run : config.runs) run.epochs = epochs;
    }
    std::string out_dir;
    if (reader.get_string("output", "dir", out_dir)) {
      for (RunConfig& run : config.runs) run.out_dir = out_dir;
    }
    reader.report_unused();
    for (const RunConfig& run : config.runs) {
      for (ConfigError e : validate_run(run)) {
        e.field = run.name + ": " + e.field;
        errors.push_back(std::move(e));
      }
    }
    if (!errors.empty()) throw ConfigParseError(std::move(errors));
    return config;
  }

  RunConfig run;
  reader.get_string("experiment", "name", run.name);
  reader.get_u64("experiment", "seed", run.seed);
  reader.get_int("experiment", "epochs", run.epochs);

  std::string value;
  if (reader.get_string("experiment", "mode", value)) {
    if (value == "dl") run.mode = Mode::dl;
    else if (value == "fl") run.mode = Mode::fl;
    else errors.push_back({reader.find("experiment", "mode")->line, "experiment.mode",
                           "expected dl or fl, got '" + value + "'"});
  }

  reader.get_int("task", "classes", run.task.classes);
  reader.get_int("task", "features", run.task.features);
  reader.get_int("task", "train_per_class", run.task.train_per_class);
  reader.get_int("task", "test_per_class", run.task.test_per_class);
  reader.get_double("task", "spread", run.task.spread);
  reader.get_double("task", "radius", run.task.radius);

  reader.get_double("train", "alpha", run.train.alpha);
  reader.get_double("train", "eta", run.train.eta);
  if (reader.get_string("train", "batch", value)) {
    if (value == "full") {
      run.train.batch = 0;
    } else {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || v <= 0) {
        errors.push_back({reader.find("train", "batch")->line, "train.batch",
                          "expected 'full' or a positive size, got '" + value + "'"});
      } else {
        run.train.batch = v;
      }
    }
  }
  reader.get_double("train", "init_scale", run.train.init_scale);

  if (reader.get_string("topology", "kind", value)) {
    if (const auto kind = topology_kind_from_string(value)) {
      run.topology.kind = *kind;
    } else {
      errors.push_back({reader.find("topology", "kind")->line, "topology.kind",
                        "unknown kind '" + value +
                            "' (valid: ring, regular, complete, torus3x3, dumbbell9, star_fl)"});
    }
  }
  reader.get_int("topology", "nodes", run.topology.nodes);
  reader.get_int("topology", "k", run.topology.k);
  if (reader.get_string("topology", "byzantine", value)) {
    if (value == "none") {
      run.topology.byzantine = -1;
    } else {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || v < 0) {
        errors.push_back({reader.find("topology", "byzantine")->line, "topology.byzantine",
                          "expected 'none' or a node index, got '" + value + "'"});
      } else {
        run.topology.byzantine = v;
      }
    }
  }
  reader.get_int("topology", "removed", run.topology.removed);
  reader.get_bool("topology", "self_weight", run.topology.self_weight);

  if (reader.get_string("aggregator", "kind", value)) {
    if (const auto kind = aggregator_kind_from_string(value)) {
      run.aggregator.kind = *kind;
    } else {
      errors.push_back({reader.find("aggregator", "kind")->line, "aggregator.kind",
                        "unknown kind '" + value + "' (valid: naive, scclip, rfa)"});
    }
  }
  if (reader.get_string("aggregator", "tau", value)) {
    const int line = reader.find("aggregator", "tau")->line;
    if (run.aggregator.kind != AggregatorKind::scclip) {
      errors.push_back({line, "aggregator.tau", "only meaningful for scclip"});
    } else if (const auto policy = tau_policy_from_string(value); policy &&
               *policy != TauPolicy::constant) {
      run.aggregator.tau_policy = *policy;
    } else {
      try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        run.aggregator.tau_policy = TauPolicy::constant;
        run.aggregator.tau_const = v;
      } catch (const std::exception&) {
        errors.push_back({line, "aggregator.tau",
                          "expected ideal, min_distance or a positive constant, got '" +
                              value + "'"});
      }
    }
  }
  if (reader.get_double("aggregator", "tau_floor", run.aggregator.tau_floor)) {
    if (run.aggregator.kind != AggregatorKind::scclip ||
        run.aggregator.tau_policy != TauPolicy::ideal) {
      errors.push_back({reader.find("aggregator", "tau_floor")->line, "aggregator.tau_floor",
                        "only meaningful for the scclip ideal radius"});
    }
  }
  reader.get_int("aggregator", "rfa_iters", run.aggregator.rfa_iters);
  reader.get_double("aggregator", "rfa_eps", run.aggregator.rfa_eps);

  if (reader.get_string("attack", "kind", value)) {
    if (const auto kind = attack_kind_from_string(value)) {
      run.attack.kind = *kind;
    } else {
      errors.push_back(
          {reader.find("attack", "kind")->line, "attack.kind",
           "unknown kind '" + value +
               "' (valid: honest, state_override, state_override_clip_aware, sandtrap, "
               "dissensus, noisy)"});
    }
  }
  reader.get_int("attack", "victim", run.attack.victim);
  reader.get_double("attack", "epsilon", run.attack.epsilon);
  reader.get_double("attack", "noise_high", run.attack.noise_high);

  reader.get_string("output", "dir", run.out_dir);

  reader.report_unused();
  if (!errors.empty()) throw ConfigParseError(std::move(errors));

  resolve_defaults(run);
  errors = validate_run(run);
  if (!errors.empty()) throw ConfigParseError(std::move(errors));

  ExperimentConfig config;
  config.runs.push_back(std::move(run));
  return config;
}

std::string render_config(const RunConfig& run) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "name = " << run.name << "\n";
  out << "seed = " << run.seed << "\n";
  out << "epochs = " << run.epochs << "\n";
  out << "mode = " << to_string(run.mode) << "\n";
  out << "\n[task]\n";
  out << "classes = " << run.task.classes << "\n";
  out << "features = " << run.task.features << "\n";
  out << "train_per_class = " << run.task.train_per_class << "\n";
  out << "test_per_class = " << run.task.test_per_class << "\n";
  out << "spread = " << format_double(run.task.spread) << "\n";
  out << "radius = " << format_double(run.task.radius) << "\n";
  out << "\n[train]\n";
  out << "alpha = " << format_double(run.train.alpha) << "\n";
  out << "eta = " << format_double(run.train.eta) << "\n";
  if (run.train.batch > 0) {
    out << "batch = " << run.train.batch << "\n";
  } else {
    out << "batch = full\n";
  }
  out << "init_scale = " << format_double(run.train.init_scale) << "\n";
  out << "\n[topology]\n";
  out << "kind = " << to_string(run.topology.kind) << "\n";
  out << "nodes = " << run.topology.nodes << "\n";
  if (run.topology.kind == TopologyKind::regular) out << "k = " << run.topology.k << "\n";
  if (run.topology.byzantine >= 0) {
    out << "byzantine = " << run.topology.byzantine << "\n";
  } else {
    out << "byzantine = none\n";
  }
  if (run.topology.removed >= 0) out << "removed = " << run.topology.removed << "\n";
  out << "self_weight = " << (run.topology.self_weight ? "true" : "false") << "\n";
  out << "\n[aggregator]\n";
  out << "kind = " << to_string(run.aggregator.kind) << "\n";
  if (run.aggregator.kind == AggregatorKind::scclip) {
    if (run.aggregator.tau_policy == TauPolicy::constant) {
      out << "tau = " << format_double(run.aggregator.tau_const) << "\n";
    } else {
      out << "tau = " << to_string(run.aggregator.tau_policy) << "\n";
    }
    if (run.aggregator.tau_policy == TauPolicy::ideal &&
        std::isfinite(run.aggregator.tau_floor)) {
      out << "tau_floor = " << format_double(run.aggregator.tau_floor) << "\n";
    }
  }
  if (run.aggregator.kind == AggregatorKind::rfa) {
    out << "rfa_iters = " << run.aggregator.rfa_iters << "\n";
    out << "rfa_eps = " << format_double(run.aggregator.rfa_eps) << "\n";
  }
  out << "\n[attack]\n";
  out << "kind = " << to_string(run.attack.kind) << "\n";
  if (run.attack.kind == AttackKind::sandtrap) out << "victim = " << run.attack.victim << "\n";
  if (run.attack.kind == AttackKind::dissensus || run.attack.kind == AttackKind::noisy) {
    out << "epsilon = " << format_double(run.attack.epsilon) << "\n";
  }
  if (run.attack.kind == AttackKind::noisy) {
    out << "noise_high = " << format_double(run.attack.noise_high) << "\n";
  }
  if (!run.out_dir.empty()) {
    out << "\n[output]\n";
    out << "dir = " << run.out_dir << "\n";
  }
  return out.str();
}

}  // namespace dlsim
