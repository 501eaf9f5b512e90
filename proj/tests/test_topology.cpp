#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <utility>

#include "dlsim/rng.hpp"
#include "dlsim/topology.hpp"

using namespace dlsim;

namespace {

std::set<int> neighbor_set(const Topology& t, int i) {
  return {t.neighbors[i].begin(), t.neighbors[i].end()};
}

// Reachability oracle independent of the BFS in validate_topology: boolean
// matrix closure.
bool closure_connected(const Topology& t, const std::vector<int>& keep) {
  const int n = t.num_nodes;
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::set<int> keep_set(keep.begin(), keep.end());
  for (int i : keep) {
    reach[i][i] = true;
    for (int j : t.neighbors[i]) {
      if (keep_set.count(j)) reach[i][j] = true;
    }
  }
  for (int k : keep) {
    for (int i : keep) {
      for (int j : keep) {
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
      }
    }
  }
  for (int i : keep) {
    for (int j : keep) {
      if (!reach[i][j]) return false;
    }
  }
  return true;
}

Topology random_connected(RandomStream& stream, int n) {
  Topology t;
  t.num_nodes = n;
  t.neighbors.resize(n);
  std::set<std::pair<int, int>> edges;
  auto add = [&t, &edges](int a, int b) {
    if (!edges.insert({std::min(a, b), std::max(a, b)}).second) return;
    t.neighbors[a].push_back(b);
    t.neighbors[b].push_back(a);
  };
  for (int i = 1; i < n; ++i) add(i, static_cast<int>(stream.next_u64() % i));
  const int extra = static_cast<int>(stream.next_u64() % (n + 1));
  for (int e = 0; e < extra; ++e) {
    const int a = static_cast<int>(stream.next_u64() % n);
    const int b = static_cast<int>(stream.next_u64() % n);
    if (a != b) add(a, b);
  }
  for (auto& ns : t.neighbors) std::sort(ns.begin(), ns.end());
  t.labels.resize(n);
  for (int i = 0; i < n; ++i) t.labels[i] = "u" + std::to_string(i + 1);
  return t;
}

}  // namespace

TEST_CASE("ring") {
  const Topology t = build_topology(TopologyKind::ring, 9, std::nullopt, {8});
  for (int i = 0; i < 9; ++i) CHECK(t.degree(i) == 2);
  CHECK(neighbor_set(t, 8) == std::set<int>{0, 7});
}

TEST_CASE("torus3x3 matches the published layout") {
  const Topology t = build_topology(TopologyKind::torus3x3, 9, std::nullopt, {8});
  for (int i = 0; i < 9; ++i) CHECK(t.degree(i) == 4);
  // b sits at the last grid slot; its neighbors are u3, u6, u7, u8.
  CHECK(neighbor_set(t, 8) == std::set<int>{2, 5, 6, 7});
  CHECK(t.labels[8] == "b");
  CHECK(t.labels[2] == "u3");
}

TEST_CASE("dumbbell9 matches the published layout") {
  const Topology t = build_topology(TopologyKind::dumbbell9, 9, std::nullopt, {8});
  CHECK(neighbor_set(t, 8) == std::set<int>{2, 4});
  // Two 4-cliques.
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      CHECK(t.has_edge(a, b));
      CHECK(t.has_edge(4 + a, 4 + b));
    }
  }
  CHECK(t.has_edge(2, 4));
  CHECK(t.degree(2) == 5);

  // u3 is the G1-side cut vertex, and dropping both bridge ends (u3, u5)
  // separates the cliques entirely.
  CHECK_THROWS_AS(remove_node(t, 2), std::invalid_argument);
  std::vector<int> keep;
  for (int i = 0; i < 9; ++i) {
    if (i != 2 && i != 4) keep.push_back(i);
  }
  CHECK(!closure_connected(t, keep));
  CHECK(closure_connected(t, {0, 1, 2, 3, 4, 5, 6, 7, 8}));
}

TEST_CASE("regular grows the honest connectivity only") {
  const Topology ring = build_topology(TopologyKind::ring, 9, std::nullopt, {8});
  const Topology reg = build_topology(TopologyKind::regular, 9, 4, {8});
  const Topology complete = build_topology(TopologyKind::complete, 9, std::nullopt, {8});

  CHECK(neighbor_set(reg, 8) == std::set<int>{0, 7});  // adversary keeps ring edges
  for (int i = 0; i < 8; ++i) {
    int honest = 0;
    for (int j : reg.neighbors[i]) {
      if (j != 8) ++honest;
    }
    CHECK(honest == 4);
  }

  // Strictly between the honest restriction of the ring and the complete graph.
  int ring_honest_edges = 0, reg_honest_edges = 0;
  for (int i = 0; i < 8; ++i) {
    for (int j : ring.neighbors[i]) {
      if (j > i && j != 8) ++ring_honest_edges;
    }
    for (int j : reg.neighbors[i]) {
      if (j > i && j != 8) ++reg_honest_edges;
    }
  }
  CHECK(reg_honest_edges > ring_honest_edges);
  for (int i = 0; i < 8; ++i) {
    for (int j : ring.neighbors[i]) {
      if (j != 8) CHECK(reg.has_edge(i, j));
    }
  }
  int reg_edges = 0, complete_edges = 0;
  for (int i = 0; i < 9; ++i) {
    reg_edges += reg.degree(i);
    complete_edges += complete.degree(i);
  }
  CHECK(reg_edges < complete_edges);

  // regular(9,8) saturates: honest users become fully connected.
  const Topology sat = build_topology(TopologyKind::regular, 9, 8, {8});
  for (int i = 0; i < 8; ++i) {
    int honest = 0;
    for (int j : sat.neighbors[i]) {
      if (j != 8) ++honest;
    }
    CHECK(honest == 7);
  }
  CHECK(neighbor_set(sat, 8) == std::set<int>{0, 7});
}

TEST_CASE("builder constraint violations") {
  CHECK_THROWS_WITH_AS(build_topology(TopologyKind::torus3x3, 8, std::nullopt, {}),
                       doctest::Contains("requires n = 9"), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(TopologyKind::dumbbell9, 10, std::nullopt, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_topology(TopologyKind::regular, 9, 3, {8}), std::invalid_argument);
  CHECK_THROWS_AS(build_topology(TopologyKind::regular, 9, std::nullopt, {8}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_topology(TopologyKind::ring, 9, std::nullopt, {9}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_topology(TopologyKind::star_fl, 10, std::nullopt, {9}),
                  std::invalid_argument);
}

TEST_CASE("uniform mixing") {
  SUBCASE("complete graph weights are 1/9") {
    const Topology t = build_topology(TopologyKind::complete, 9, std::nullopt, {});
    const MixingMatrix m = uniform_mixing(t);
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) CHECK(m.at(i, j) == doctest::Approx(1.0 / 9));
    }
  }

  SUBCASE("ring rows have three entries of 1/3") {
    const Topology t = build_topology(TopologyKind::ring, 9, std::nullopt, {});
    const MixingMatrix m = uniform_mixing(t);
    for (int i = 0; i < 9; ++i) {
      int nonzero = 0;
      for (int j = 0; j < 9; ++j) {
        if (m.at(i, j) != 0.0) {
          ++nonzero;
          CHECK(m.at(i, j) == doctest::Approx(1.0 / 3));
        }
      }
      CHECK(nonzero == 3);
    }
  }

  SUBCASE("torus rows have five entries of 1/5 and sum to 1") {
    const Topology t = build_topology(TopologyKind::torus3x3, 9, std::nullopt, {8});
    const MixingMatrix m = uniform_mixing(t);
    for (int i = 0; i < 9; ++i) {
      int nonzero = 0;
      double sum = 0.0;
      for (int j = 0; j < 9; ++j) {
        sum += m.at(i, j);
        if (m.at(i, j) != 0.0) {
          ++nonzero;
          CHECK(m.at(i, j) == doctest::Approx(0.2));
        }
      }
      CHECK(nonzero == 5);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("row sums are 1 for every builder and size") {
    for (int n : {3, 9, 16, 33, 64}) {
      for (TopologyKind kind : {TopologyKind::ring, TopologyKind::complete, TopologyKind::star_fl}) {
        const Topology t = build_topology(kind, n, std::nullopt, {});
        for (bool self : {true, false}) {
          const MixingMatrix m = uniform_mixing(t, self);
          for (int i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) sum += m.at(i, j);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
          }
        }
      }
      if (n > 5 && n % 2 == 1) {
        const Topology t = build_topology(TopologyKind::regular, n, 4, {n - 1});
        const MixingMatrix m = uniform_mixing(t);
        for (int i = 0; i < n; ++i) {
          double sum = 0.0;
          for (int j = 0; j < n; ++j) sum += m.at(i, j);
          CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("validation report") {
  SUBCASE("dumbbell honest subgraph stays connected through the u3-u5 edge") {
    const Topology t = build_topology(TopologyKind::dumbbell9, 9, std::nullopt, {8});
    const auto report = validate_topology(t, uniform_mixing(t));
    CHECK(report.connected);
    CHECK(report.honest_subgraph_connected);
  }

  SUBCASE("path with a byzantine cut vertex") {
    Topology t;
    t.num_nodes = 3;
    t.neighbors = {{1}, {0, 2}, {1}};
    t.byzantine = {1};
    t.labels = {"a", "b", "c"};
    const auto report = validate_topology(t, uniform_mixing(t));
    CHECK(report.connected);
    CHECK(!report.honest_subgraph_connected);
  }

  SUBCASE("torus uniform mixing is doubly stochastic") {
    const Topology t = build_topology(TopologyKind::torus3x3, 9, std::nullopt, {8});
    const auto report = validate_topology(t, uniform_mixing(t));
    CHECK(report.doubly_stochastic);
    CHECK(report.symmetric);
  }

  SUBCASE("dumbbell uniform mixing is not doubly stochastic") {
    const Topology t = build_topology(TopologyKind::dumbbell9, 9, std::nullopt, {8});
    const auto report = validate_topology(t, uniform_mixing(t));
    CHECK(!report.doubly_stochastic);
    CHECK(report.per_node_degree == std::vector<int>{3, 3, 5, 3, 5, 3, 3, 3, 2});
  }

  SUBCASE("honest connectivity agrees with a closure oracle on random graphs") {
    RandomStream stream(77, StreamPurpose::test_only);
    for (int trial = 0; trial < 60; ++trial) {
      const int n = 4 + static_cast<int>(stream.next_u64() % 9);  // up to 12
      Topology t = random_connected(stream, n);
      const int byz = static_cast<int>(stream.next_u64() % n);
      t.byzantine = {byz};
      t.labels[byz] = "b";
      const auto report = validate_topology(t, uniform_mixing(t));
      CHECK(report.honest_subgraph_connected == closure_connected(t, t.honest_nodes()));
    }
  }
}

TEST_CASE("byzantine edge weight") {
  const Topology t = build_topology(TopologyKind::torus3x3, 9, std::nullopt, {8});
  const MixingMatrix m = uniform_mixing(t);
  CHECK(byzantine_edge_weight(m, 0, t.byzantine) == 0.0);        // u1 has no byz neighbor
  CHECK(byzantine_edge_weight(m, 7, t.byzantine) == doctest::Approx(0.2));  // u8 borders b

  const Topology d = build_topology(TopologyKind::dumbbell9, 9, std::nullopt, {8});
  const MixingMatrix dm = uniform_mixing(d);
  CHECK(byzantine_edge_weight(dm, 2, d.byzantine) == doctest::Approx(1.0 / 6));

  CHECK_THROWS_AS(byzantine_edge_weight(m, 8, t.byzantine), std::invalid_argument);
}

TEST_CASE("edge list export") {
  const Topology t = build_topology(TopologyKind::ring, 4, std::nullopt, {3});
  CHECK(render_edge_list(t) == "n 4\nbyz 3\n0 1\n0 3\n1 2\n2 3\n");
}

TEST_CASE("node removal reindexes labels and byzantine markers") {
  const Topology t = build_topology(TopologyKind::torus3x3, 9, std::nullopt, {8});
  const Topology cut = remove_node(t, 2);  // drop u3
  CHECK(cut.num_nodes == 8);
  CHECK(cut.labels == std::vector<std::string>{"u1", "u2", "u4", "u5", "u6", "u7", "u8", "b"});
  CHECK(cut.byzantine == std::vector<int>{7});
  // Former edge u2-u5 (indices 1, 4) survives at shifted indices 1, 3.
  CHECK(cut.has_edge(1, 3));
  // u3's edges are gone: u2 had {u1, u3, u5, u8}, keeps {u1, u5, u8}.
  CHECK(cut.degree(1) == 3);
  const auto report = validate_topology(cut, uniform_mixing(cut));
  CHECK(report.connected);
  CHECK(report.honest_subgraph_connected);
}
