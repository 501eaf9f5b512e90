#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dlsim/config.hpp"
#include "dlsim/engine.hpp"
#include "dlsim/topology.hpp"

namespace dlsim {

// Shortest round-trip decimal form of a double ("inf" for infinities), so
// trace files are byte-identical across reruns and lose no precision.
std::string format_double(double v);

// CSV text for a run: header row, then one row per epoch with per-honest-node
// consensus distance, distance to target, accuracy and clipping radius
// columns (named by node label) followed by the honest means.
std::string render_trace_csv(const Topology& topo, const std::vector<EpochTrace>& traces);

struct RunOutput {
  std::filesystem::path trace_path;
  std::filesystem::path manifest_path;
};

// Writes <name>.csv and <name>.manifest under dir. The manifest is the
// resolved config (render_config), so every default is spelled out.
RunOutput write_run_output(const std::filesystem::path& dir, const RunConfig& run,
                           const Topology& topo, const std::vector<EpochTrace>& traces);

// Output directory resolution: explicit config value, else $DLSIM_OUT, else
// "traces".
std::filesystem::path resolve_out_dir(const RunConfig& run);

}  // namespace dlsim
