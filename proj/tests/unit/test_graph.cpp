#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "potions/graph.hpp"
#include "potions/random.hpp"

using namespace potions;

namespace {

Graph path3() { return Graph(3, {{0, 1}, {1, 2}}); }
Graph complete(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

std::vector<NodeId> as_vec(std::span<const NodeId> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("neighbors") {
  CHECK(as_vec(path3().neighbors(1)) == std::vector<NodeId>{0, 2});
  CHECK(as_vec(neighbors(complete(3), 0)) == std::vector<NodeId>{1, 2});
  CHECK(Graph(3, {}).neighbors(0).empty());
  CHECK_THROWS_AS(path3().neighbors(3), std::out_of_range);
}

TEST_CASE("degrees") {
  CHECK(degrees(complete(3)) == DegreeSequence{2, 2, 2});
  CHECK(degrees(path3()) == DegreeSequence{1, 2, 1});
  CHECK(degrees(Graph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}})) == DegreeSequence{4, 1, 1, 1, 1});
}

TEST_CASE("is_connected examples") {
  CHECK(is_connected(path3()));
  CHECK_FALSE(is_connected(Graph(4, {{0, 1}, {2, 3}})));
  CHECK(is_connected(Graph(1, {})));
}

TEST_CASE("edge_count") {
  CHECK(edge_count(complete(4)) == 6);
  CHECK(edge_count(Graph(5, {})) == 0);
}

TEST_CASE("construction rejects malformed input") {
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), GraphError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), GraphError);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), GraphError);
  CHECK_THROWS_AS(Graph(3, {{0, 1}}, {1, 2}), GraphError);
}

TEST_CASE("connectivity agrees with transitive closure on every graph with n <= 6") {
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    const std::uint64_t total = std::uint64_t{1} << pairs.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      std::vector<std::pair<NodeId, NodeId>> e;
      for (std::size_t b = 0; b < pairs.size(); ++b)
        if (mask >> b & 1) e.push_back(pairs[b]);
      const Graph g(n, e);
      REQUIRE(is_connected(g) == oracle::connected_by_closure(n, e));
    }
  }
}

TEST_CASE("random graphs: degree sum and neighbor symmetry") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_below(rng, 30);
    const double p = uniform01(rng);
    std::vector<std::pair<NodeId, NodeId>> e;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (uniform01(rng) < p) e.emplace_back(j, i);  // reversed order on purpose
    const Graph g(n, e);
    std::size_t sum = 0;
    for (std::size_t d : degrees(g)) sum += d;
    REQUIRE(sum == 2 * edge_count(g));
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j : g.neighbors(i)) REQUIRE(g.has_edge(j, i));
  }
}

TEST_CASE("edge list round trip keeps labels") {
  const Graph g(4, {{0, 1}, {1, 2}, {2, 3}}, {1, 1, 2, 2});
  std::stringstream buf;
  write_edge_list(buf, g);
  CHECK(read_edge_list(buf) == g);

  std::stringstream bare("0 1\n# comment\n1 4\n");
  const Graph h = read_edge_list(bare);
  CHECK(h.node_count() == 5);
  CHECK(h.edge_count() == 2);
  CHECK_FALSE(h.has_labels());

  std::stringstream bad("0 x\n");
  CHECK_THROWS_AS(read_edge_list(bad), GraphError);
}
