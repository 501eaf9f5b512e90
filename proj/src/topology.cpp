#include "dlsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dlsim {

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::regular: return "regular";
    case TopologyKind::complete: return "complete";
    case TopologyKind::torus3x3: return "torus3x3";
    case TopologyKind::dumbbell9: return "dumbbell9";
    case TopologyKind::star_fl: return "star_fl";
  }
  return "?";
}

std::optional<TopologyKind> topology_kind_from_string(const std::string& name) {
  for (TopologyKind kind : {TopologyKind::ring, TopologyKind::regular, TopologyKind::complete,
                            TopologyKind::torus3x3, TopologyKind::dumbbell9,
                            TopologyKind::star_fl}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

bool Topology::has_edge(int i, int j) const {
  const auto& ns = neighbors[i];
  return std::binary_search(ns.begin(), ns.end(), j);
}

bool Topology::is_byzantine(int i) const {
  return std::binary_search(byzantine.begin(), byzantine.end(), i);
}

std::vector<int> Topology::honest_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < num_nodes; ++i) {
    if (!is_byzantine(i)) out.push_back(i);
  }
  return out;
}

namespace {

bool reachable_all(const std::vector<std::vector<int>>& adj, const std::vector<int>& nodes) {
  if (nodes.empty()) return true;
  std::set<int> keep(nodes.begin(), nodes.end());
  std::set<int> seen{nodes.front()};
  std::deque<int> queue{nodes.front()};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (keep.count(v) && !seen.count(v)) {
        seen.insert(v);
        queue.push_back(v);
      }
    }
  }
  return seen.size() == keep.size();
}

struct EdgeSet {
  int n;
  std::set<std::pair<int, int>> edges;

  void add(int a, int b) {
    if (a == b) throw std::logic_error("self edge");
    edges.insert({std::min(a, b), std::max(a, b)});
  }

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (auto& ns : adj) std::sort(ns.begin(), ns.end());
    return adj;
  }
};

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument("build_topology: " + message);
}

}  // namespace

Topology build_topology(TopologyKind kind, int n, std::optional<int> k,
                        const std::vector<int>& byz_set) {
  require(n >= 2, "need at least 2 nodes");
  std::vector<int> byz = byz_set;
  std::sort(byz.begin(), byz.end());
  byz.erase(std::unique(byz.begin(), byz.end()), byz.end());
  for (int b : byz) require(b >= 0 && b < n, "byzantine index out of range");
  require(static_cast<int>(byz.size()) < n, "byzantine set must be a strict subset of nodes");

  EdgeSet es{n, {}};
  switch (kind) {
    case TopologyKind::ring: {
      require(n >= 3, "ring requires n >= 3");
      for (int i = 0; i < n; ++i) es.add(i, (i + 1) % n);
      break;
    }
    case TopologyKind::regular: {
      require(k.has_value(), "regular requires k");
      const int kk = *k;
      require(kk >= 2 && kk % 2 == 0 && kk < n, "regular requires even k with 2 <= k < n");
      // Circulant over the honest nodes in index order; the byzantine node
      // keeps its two ring edges so honest connectivity sweeps leave the
      // adversary's degree unchanged.
      std::vector<int> ordered;
      for (int i = 0; i < n; ++i) {
        if (!std::binary_search(byz.begin(), byz.end(), i)) ordered.push_back(i);
      }
      const int h = static_cast<int>(ordered.size());
      require(kk / 2 <= h / 2, "regular: k/2 exceeds half the honest cycle");
      for (int idx = 0; idx < h; ++idx) {
        for (int off = 1; off <= kk / 2; ++off) {
          es.add(ordered[idx], ordered[(idx + off) % h]);
        }
      }
      for (int b : byz) {
        es.add(b, (b + 1) % n);
        es.add(b, (b - 1 + n) % n);
      }
      break;
    }
    case TopologyKind::complete: {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) es.add(i, j);
      }
      break;
    }
    case TopologyKind::torus3x3: {
      require(n == 9, "torus3x3 requires n = 9");
      // 3x3 grid, row-major, wraparound in both directions; degree 4 each.
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const int i = r * 3 + c;
          es.add(i, r * 3 + (c + 1) % 3);
          es.add(i, ((r + 1) % 3) * 3 + c);
        }
      }
      break;
    }
    case TopologyKind::dumbbell9: {
      require(n == 9, "dumbbell9 requires n = 9");
      // Two 4-cliques bridged through nodes 2 and 4, with node 8 attached to
      // both bridge ends.
      const int left[] = {0, 1, 2, 3};
      const int right[] = {4, 5, 6, 7};
      for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
          es.add(left[a], left[b]);
          es.add(right[a], right[b]);
        }
      }
      es.add(2, 4);
      es.add(2, 8);
      es.add(4, 8);
      break;
    }
    case TopologyKind::star_fl: {
      require(n >= 3, "star_fl requires n >= 3 (server plus two users)");
      const int server = n - 1;
      for (int i = 0; i < server; ++i) es.add(i, server);
      for (int b : byz) require(b != server, "star_fl: the server cannot be byzantine");
      break;
    }
  }

  Topology topo;
  topo.num_nodes = n;
  topo.neighbors = es.adjacency();
  topo.byzantine = std::move(byz);

  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  require(reachable_all(topo.neighbors, all), to_string(kind) + " graph is not connected");

  topo.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    if (topo.is_byzantine(i)) {
      topo.labels[i] = "b";
    } else if (kind == TopologyKind::star_fl && i == n - 1) {
      topo.labels[i] = "s";
    } else {
      topo.labels[i] = "u" + std::to_string(i + 1);
    }
  }
  return topo;
}

Topology remove_node(const Topology& topo, int node) {
  if (node < 0 || node >= topo.num_nodes) {
    throw std::invalid_argument("remove_node: index out of range");
  }
  Topology out;
  out.num_nodes = topo.num_nodes - 1;
  std::vector<int> remap(topo.num_nodes, -1);
  int next = 0;
  for (int i = 0; i < topo.num_nodes; ++i) {
    if (i != node) remap[i] = next++;
  }
  out.neighbors.resize(out.num_nodes);
  for (int i = 0; i < topo.num_nodes; ++i) {
    if (i == node) continue;
    for (int j : topo.neighbors[i]) {
      if (j != node) out.neighbors[remap[i]].push_back(remap[j]);
    }
    std::sort(out.neighbors[remap[i]].begin(), out.neighbors[remap[i]].end());
  }
  for (int b : topo.byzantine) {
    if (b != node) out.byzantine.push_back(remap[b]);
  }
  out.labels.resize(out.num_nodes);
  for (int i = 0; i < topo.num_nodes; ++i) {
    if (i != node) out.labels[remap[i]] = topo.labels[i];
  }

  std::vector<int> all(out.num_nodes);
  for (int i = 0; i < out.num_nodes; ++i) all[i] = i;
  if (!reachable_all(out.neighbors, all)) {
    throw std::invalid_argument("remove_node: removing " + topo.labels[node] +
                                " disconnects the graph");
  }
  return out;
}

MixingMatrix uniform_mixing(const Topology& topo, bool include_self) {
  MixingMatrix m;
  m.n = topo.num_nodes;
  m.w.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
  for (int i = 0; i < m.n; ++i) {
    const int deg = topo.degree(i);
    if (include_self) {
      const double w = 1.0 / static_cast<double>(deg + 1);
      m.at(i, i) = w;
      for (int j : topo.neighbors[i]) m.at(i, j) = w;
    } else {
      const double w = 1.0 / static_cast<double>(deg);
      for (int j : topo.neighbors[i]) m.at(i, j) = w;
    }
  }
  return m;
}

ValidationReport validate_topology(const Topology& topo, const MixingMatrix& mixing) {
  ValidationReport report;
  report.per_node_degree.resize(topo.num_nodes);
  for (int i = 0; i < topo.num_nodes; ++i) report.per_node_degree[i] = topo.degree(i);

  std::vector<int> all(topo.num_nodes);
  for (int i = 0; i < topo.num_nodes; ++i) all[i] = i;
  report.connected = reachable_all(topo.neighbors, all);
  report.honest_subgraph_connected = reachable_all(topo.neighbors, topo.honest_nodes());

  report.symmetric = true;
  report.doubly_stochastic = true;
  for (int j = 0; j < mixing.n; ++j) {
    double col = 0.0;
    for (int i = 0; i < mixing.n; ++i) {
      col += mixing.at(i, j);
      if (std::abs(mixing.at(i, j) - mixing.at(j, i)) > 1e-9) report.symmetric = false;
    }
    if (std::abs(col - 1.0) > 1e-9) report.doubly_stochastic = false;
  }
  return report;
}

double byzantine_edge_weight(const MixingMatrix& mixing, int i,
                             const std::vector<int>& byz_set) {
  for (int b : byz_set) {
    if (b == i) {
      throw std::invalid_argument("byzantine_edge_weight: node " + std::to_string(i) +
                                  " is itself byzantine");
    }
  }
  double delta = 0.0;
  for (int b : byz_set) delta += mixing.at(i, b);
  return delta;
}

std::string render_edge_list(const Topology& topo) {
  std::ostringstream out;
  out << "n " << topo.num_nodes << "\n";
  out << "byz";
  for (int b : topo.byzantine) out << " " << b;
  out << "\n";
  for (int i = 0; i < topo.num_nodes; ++i) {
    for (int j : topo.neighbors[i]) {
      if (i < j) out << i << " " << j << "\n";
    }
  }
  return out.str();
}

}  // namespace dlsim
