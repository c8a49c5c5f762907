#include "potions/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace potions {

Graph::Graph(std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges,
             std::vector<std::uint8_t> labels)
    : n_(n), labels_(std::move(labels)) {
  if (!labels_.empty() && labels_.size() != n_) {
    throw GraphError("label vector has " + std::to_string(labels_.size()) +
                     " entries for " + std::to_string(n_) + " nodes");
  }
  edges_.reserve(edges.size());
  for (auto [i, j] : edges) {
    if (i >= n_ || j >= n_) {
      throw GraphError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                       ") out of range for n=" + std::to_string(n_));
    }
    if (i == j) throw GraphError("self-loop at node " + std::to_string(i));
    edges_.push_back(Edge{std::min(i, j), std::max(i, j)});
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end());
      dup != edges_.end()) {
    throw GraphError("duplicate edge (" + std::to_string(dup->u) + "," +
                     std::to_string(dup->v) + ")");
  }

  offsets_.assign(n_ + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
  targets_.resize(2 * edges_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    targets_[cursor[e.u]++] = e.v;
    targets_[cursor[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    std::sort(targets_.begin() + offsets_[i], targets_.begin() + offsets_[i + 1]);
  }
}

std::span<const NodeId> Graph::neighbors(NodeId i) const {
  if (i >= n_) {
    throw std::out_of_range("node " + std::to_string(i) + " out of range for n=" +
                            std::to_string(n_));
  }
  return {targets_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::span<const NodeId> neighbors(const Graph& g, NodeId i) { return g.neighbors(i); }

DegreeSequence degrees(const Graph& g) {
  DegreeSequence d(g.node_count());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = g.degree(static_cast<NodeId>(i));
  return d;
}

bool is_connected(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

std::size_t edge_count(const Graph& g) { return g.edge_count(); }

namespace {

std::vector<std::uint8_t> parse_labels(const std::string& text) {
  std::vector<std::uint8_t> labels;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    int v = std::stoi(tok);
    if (v != 1 && v != 2) throw GraphError("block label must be 1 or 2, got " + tok);
    labels.push_back(static_cast<std::uint8_t>(v));
  }
  return labels;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::uint8_t> labels;
  long long declared_n = -1;
  std::size_t max_index_plus_one = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::string body = line.substr(first + 1);
      auto start = body.find_first_not_of(" \t");
      body = start == std::string::npos ? "" : body.substr(start);
      while (!body.empty() && (body.back() == '\r' || body.back() == ' ')) body.pop_back();
      if (body.rfind("n=", 0) == 0) {
        declared_n = std::stoll(body.substr(2));
        if (declared_n < 0) throw GraphError("negative node count in header");
      } else if (body.rfind("labels=", 0) == 0) {
        labels = parse_labels(body.substr(7));
      }
      continue;
    }
    std::istringstream ls(line);
    long long i = -1, j = -1;
    if (!(ls >> i >> j) || i < 0 || j < 0) {
      throw GraphError("malformed edge on line " + std::to_string(line_no) + ": " + line);
    }
    edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    max_index_plus_one = std::max<std::size_t>(max_index_plus_one,
                                               static_cast<std::size_t>(std::max(i, j)) + 1);
  }
  std::size_t n = declared_n >= 0 ? static_cast<std::size_t>(declared_n) : max_index_plus_one;
  if (declared_n < 0 && !labels.empty()) n = std::max(n, labels.size());
  return Graph(n, std::move(edges), std::move(labels));
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# n=" << g.node_count() << '\n';
  if (g.has_labels()) {
    out << "# labels=";
    for (std::size_t i = 0; i < g.labels().size(); ++i) {
      out << (i ? "," : "") << static_cast<int>(g.labels()[i]);
    }
    out << '\n';
  }
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void write_edge_list_file(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write " + path);
  write_edge_list(out, g);
}

}  // namespace potions
