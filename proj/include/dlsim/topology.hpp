#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dlsim {

enum class TopologyKind { ring, regular, complete, torus3x3, dumbbell9, star_fl };

std::string to_string(TopologyKind kind);
std::optional<TopologyKind> topology_kind_from_string(const std::string& name);

// Undirected communication graph. Adjacency is symmetric and irreflexive;
// self-loops live in the mixing matrix, not here. Node labels default to
// u1..u<n> with the byzantine node named "b" (and the star center "s").
struct Topology {
  int num_nodes = 0;
  std::vector<std::vector<int>> neighbors;  // sorted, no self entries
  std::vector<int> byzantine;               // sorted subset of nodes
  std::vector<std::string> labels;

  bool has_edge(int i, int j) const;
  bool is_byzantine(int i) const;
  int degree(int i) const { return static_cast<int>(neighbors[i].size()); }
  std::vector<int> honest_nodes() const;
};

// Builds one of the named graph families. Constraints: torus3x3 and dumbbell9
// require n = 9; regular requires even k with k/2 <= floor(n_honest / 2); the
// result must be connected. regular applies the circulant construction to the
// honest nodes only while the byzantine node keeps its two ring edges, so
// sweeps over k change honest connectivity without touching the adversary's.
Topology build_topology(TopologyKind kind, int n, std::optional<int> k,
                        const std::vector<int>& byz_set);

// Drops one node (preset plumbing for victim-excluded baselines). Remaining
// nodes are reindexed densely; labels and byzantine markers carry over.
// Throws if the remaining graph is disconnected.
Topology remove_node(const Topology& topo, int node);

// Row-stochastic edge weights, dense n x n.
struct MixingMatrix {
  int n = 0;
  std::vector<double> w;  // row-major

  double at(int i, int j) const { return w[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * n + j]; }
};

// Equal weights over the closed neighborhood: W_ij = 1 / |N_i u {i}| for
// j in N_i u {i}. With include_self = false the self weight is dropped and
// neighbors get 1 / |N_i|.
MixingMatrix uniform_mixing(const Topology& topo, bool include_self = true);

struct ValidationReport {
  bool connected = false;
  bool honest_subgraph_connected = false;
  bool symmetric = false;          // W_ij == W_ji within 1e-9
  bool doubly_stochastic = false;  // column sums within 1e-9 of 1
  std::vector<int> per_node_degree;
};

// Reporting only; never rejects a run.
ValidationReport validate_topology(const Topology& topo, const MixingMatrix& mixing);

// Total mixing weight of byzantine edges at an honest node i.
double byzantine_edge_weight(const MixingMatrix& mixing, int i,
                             const std::vector<int>& byz_set);

// Plain-text edge list: "n <count>" / "byz <i...>" header, then one "i j"
// line per undirected edge.
std::string render_edge_list(const Topology& topo);

}  // namespace dlsim
