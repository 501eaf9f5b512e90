#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dlsim/aggregators.hpp"
#include "dlsim/attacks.hpp"
#include "dlsim/topology.hpp"

namespace dlsim {

enum class Mode { dl, fl };

std::string to_string(Mode mode);

struct TaskParams {
  int classes = 10;
  int features = 20;
  int train_per_class = 100;
  int test_per_class = 100;
  double spread = 0.5;
  double radius = 2.0;  // class-mean norm; spread/radius sets the overlap

  bool operator==(const TaskParams&) const = default;
};

struct TrainParams {
  double alpha = 0.9;
  double eta = 0.01;
  int batch = 0;  // 0 = full local shard per epoch
  double init_scale = 0.05;

  bool operator==(const TrainParams&) const = default;
};

struct TopologyParams {
  TopologyKind kind = TopologyKind::ring;
  int nodes = 9;
  int k = 0;           // regular only
  int byzantine = -1;  // -1 = none
  int removed = -1;    // drop this node after building (victim-excluded baselines)
  bool self_weight = true;

  bool operator==(const TopologyParams&) const = default;
};

struct AggregatorParams {
  AggregatorKind kind = AggregatorKind::naive;
  TauPolicy tau_policy = TauPolicy::constant;
  double tau_const = 1.0;
  // Radius applied by ideal-policy nodes with no byzantine neighbor, where
  // the variance formula is undefined; infinity = no clipping there.
  double tau_floor = std::numeric_limits<double>::infinity();
  int rfa_iters = 50;
  double rfa_eps = 1e-8;

  bool operator==(const AggregatorParams&) const = default;
};

struct AttackParams {
  AttackKind kind = AttackKind::honest;
  int victim = -1;
  // Negative = unset; resolved per attack kind (dissensus 1.0, noisy 0.05).
  double epsilon = -1.0;
  double noise_high = 0.01;

  bool operator==(const AttackParams&) const = default;
};

// One fully resolved simulation run. The target model of the state-override
// attacks is always the all-zero vector.
struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 1;
  int epochs = 300;
  Mode mode = Mode::dl;
  TaskParams task;
  TrainParams train;
  TopologyParams topology;
  AggregatorParams aggregator;
  AttackParams attack;
  std::string out_dir;  // empty = $DLSIM_OUT or "traces"

  bool operator==(const RunConfig&) const = default;
};

// An experiment is one or more runs sharing a purpose (a preset may expand to
// several, e.g. one per topology in a sweep).
struct ExperimentConfig {
  std::vector<RunConfig> runs;
};

struct ConfigError {
  int line = 0;  // 0 = semantic error (no single line)
  std::string field;
  std::string message;

  std::string format() const;
};

class ConfigParseError : public std::runtime_error {
 public:
  explicit ConfigParseError(std::vector<ConfigError> errors);
  const std::vector<ConfigError>& errors() const { return errors_; }

 private:
  std::vector<ConfigError> errors_;
};

// Parses the key/value config format (see README). A document either names a
// preset (plus seed/epochs/name/output overrides) or spells out one run.
// Defaults are resolved here; unknown sections and keys are rejected by name.
// Throws ConfigParseError listing every problem found.
ExperimentConfig parse_config(const std::string& text);

// Canonical text form of a resolved run; parse_config(render_config(r))
// yields exactly r. Also used as the run manifest.
std::string render_config(const RunConfig& run);

// Semantic validation only (parse_config already calls it). Returns all
// errors; empty means the run can be simulated.
std::vector<ConfigError> validate_run(const RunConfig& run);

// Resolves per-kind defaults (attack epsilon) in place.
void resolve_defaults(RunConfig& run);

}  // namespace dlsim
