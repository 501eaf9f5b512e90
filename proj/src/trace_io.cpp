#include "dlsim/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dlsim {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::logic_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

std::string render_trace_csv(const Topology& topo, const std::vector<EpochTrace>& traces) {
  // Columns cover the honest nodes only, named by label, metric-major.
  std::vector<int> honest;
  for (int i = 0; i < topo.num_nodes; ++i) {
    if (!topo.is_byzantine(i) && topo.labels[i] != "s") honest.push_back(i);
  }

  std::ostringstream out;
  out << "epoch";
  for (const char* metric : {"c", "d", "acc", "tau"}) {
    for (int i : honest) out << "," << metric << "_" << topo.labels[i];
  }
  out << ",c_mean,d_mean,acc_mean,tau_mean\n";

  for (const EpochTrace& t : traces) {
    out << t.epoch;
    for (const std::vector<double>* column :
         {&t.consensus, &t.dist_target, &t.accuracy, &t.tau}) {
      for (int i : honest) {
        out << ",";
        out << format_double(i < static_cast<int>(column->size()) ? (*column)[i] : 0.0);
      }
    }
    out << "," << format_double(t.consensus_mean) << "," << format_double(t.dist_target_mean)
        << "," << format_double(t.accuracy_mean) << "," << format_double(t.tau_mean) << "\n";
  }
  return out.str();
}

std::filesystem::path resolve_out_dir(const RunConfig& run) {
  if (!run.out_dir.empty()) return run.out_dir;
  if (const char* env = std::getenv("DLSIM_OUT"); env && *env) return env;
  return "traces";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

RunOutput write_run_output(const std::filesystem::path& dir, const RunConfig& run,
                           const Topology& topo, const std::vector<EpochTrace>& traces) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  RunOutput output;
  output.trace_path = dir / (run.name + ".csv");
  output.manifest_path = dir / (run.name + ".manifest");
  write_file(output.trace_path, render_trace_csv(topo, traces));
  write_file(output.manifest_path, render_config(run));
  return output;
}

}  // namespace dlsim
