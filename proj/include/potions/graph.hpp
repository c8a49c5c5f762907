#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace potions {

using NodeId = std::uint32_t;

struct Edge {
  NodeId u;
  NodeId v;  // always u < v

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using DegreeSequence = std::vector<std::size_t>;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Undirected simple graph on nodes 0..n-1.
///
/// Immutable once built. Neighbors are stored in compressed rows; drawing a
/// partner is a single index operation. Optional block
/// labels (1 or 2) ride along as metadata and are never consulted by the
/// simulation.
class Graph {
 public:
  Graph() = default;

  /// Throws GraphError on self-loops, duplicate edges, out-of-range endpoints
  /// or a label vector whose size is neither 0 nor n.
  Graph(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges,
        std::vector<std::uint8_t> labels = {});

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Sorted ascending. Throws std::out_of_range for a bad index.
  std::span<const NodeId> neighbors(NodeId i) const;
  std::size_t degree(NodeId i) const { return neighbors(i).size(); }
  bool has_edge(NodeId i, NodeId j) const;

  /// Sorted lexicographically, each with u < v.
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.labels_ == b.labels_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<std::uint8_t> labels_;
};

std::span<const NodeId> neighbors(const Graph& g, NodeId i);
DegreeSequence degrees(const Graph& g);
bool is_connected(const Graph& g);
std::size_t edge_count(const Graph& g);

/// Edge-list text format.
///
///   # n=<N>
///   # labels=1,1,2,...      (optional, one block tag per node)
///   i j
///
/// Indices are 0-based and whitespace separated. Without an n header the node
/// count is one past the largest index seen.
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list_file(const std::string& path, const Graph& g);

}  // namespace potions
