#include "potions/sbm.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace potions {

namespace {

constexpr double kRangeSlack = 1e-12;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0 && !std::isnan(x); }

std::string triple(double a, double b, double c) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ", " << c << ")";
  return os.str();
}

// Snaps values within rounding noise of the unit interval back onto it.
double snap_unit(double x) {
  if (x < 0.0 && x > -kRangeSlack) return 0.0;
  if (x > 1.0 && x < 1.0 + kRangeSlack) return 1.0;
  return x;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), components_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent_[a] = b;
      --components_;
    }
  }
  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::size_t components_;
};

// Row-major over i < j. sample_er and sample_connected share this so their
// random streams line up draw for draw.
template <typename OnEdge>
void draw_pairs(const ProbMatrix& p, Rng& rng, OnEdge&& on_edge) {
  const std::size_t n = p.size();
  const Eigen::MatrixXd& m = p.matrix();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Column-major storage: (j, i) is contiguous along j.
      if (uniform01(rng) < m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) {
        on_edge(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }
}

}  // namespace

void BlockMatrix::validate() const {
  if (!in_unit(a) || !in_unit(b) || !in_unit(c)) {
    throw SbmError("block probabilities must lie in [0,1], got " + triple(a, b, c));
  }
}

std::vector<std::uint8_t> SbmParams::membership() const {
  std::vector<std::uint8_t> labels(2 * n, 2);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n), 1);
  return labels;
}

void SbmParams::validate() const {
  if (n < 1) throw SbmError("block size n must be at least 1");
  block.validate();
}

ProbMatrix::ProbMatrix(Eigen::MatrixXd p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols()) throw SbmError("probability matrix must be square");
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    if (p_(i, i) != 0.0) throw SbmError("probability matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      if (!in_unit(p_(i, j))) throw SbmError("probability entry outside [0,1]");
      if (std::abs(p_(i, j) - p_(j, i)) > 1e-12) {
        throw SbmError("probability matrix must be symmetric");
      }
    }
  }
}

std::string_view to_string(FamilyId id) {
  switch (id) {
    case FamilyId::M1: return "M1";
    case FamilyId::M2: return "M2";
    case FamilyId::M3: return "M3";
    case FamilyId::M4: return "M4";
  }
  return "?";
}

FamilyId parse_family(std::string_view name) {
  if (name == "M1") return FamilyId::M1;
  if (name == "M2") return FamilyId::M2;
  if (name == "M3") return FamilyId::M3;
  if (name == "M4") return FamilyId::M4;
  throw SbmError("unknown family '" + std::string(name) + "' (expected M1..M4)");
}

std::array<double, 3> SbmFamily::direction(FamilyId id) {
  switch (id) {
    case FamilyId::M1: return {-1.0, 0.0, 1.0};
    case FamilyId::M2: return {0.0, -1.0, 1.0};
    case FamilyId::M3: return {0.0, 1.0, 0.0};
    case FamilyId::M4: return {-1.0, 1.0, 0.0};
  }
  return {};
}

SbmFamily SbmFamily::make(FamilyId id, BlockMatrix base, double theta_max) {
  SbmFamily f{base, direction(id), theta_max, id};
  f.validate();
  return f;
}

void SbmFamily::validate() const {
  base.validate();
  if (!(theta_max >= 0.0)) throw SbmError("theta_max must be nonnegative");
  if (id == FamilyId::M3) {
    if (delta != std::array<double, 3>{0.0, 1.0, 0.0}) {
      throw SbmError("family M3 requires delta (0,1,0)");
    }
  } else if (std::abs(delta[0] + delta[1] + delta[2]) > 1e-12) {
    throw SbmError(std::string("family ") + std::string(to_string(id)) +
                   " requires delta entries summing to zero");
  }
  if (delta != direction(id)) {
    throw SbmError(std::string("delta does not match family ") + std::string(to_string(id)));
  }
  for (double t : {0.0, theta_max}) {
    const double a = base.a + t * delta[0];
    const double b = base.b + t * delta[1];
    const double c = base.c + t * delta[2];
    if (!in_unit(snap_unit(a)) || !in_unit(snap_unit(b)) || !in_unit(snap_unit(c))) {
      throw SbmError("family leaves the unit cube at theta=" + std::to_string(t) + ": " +
                     triple(a, b, c));
    }
  }
}

BlockMatrix family_point(const SbmFamily& f, double theta) {
  if (!(theta >= 0.0) || theta > f.theta_max + 1e-12) {
    throw SbmError("theta=" + std::to_string(theta) + " outside [0, " +
                   std::to_string(f.theta_max) + "]");
  }
  BlockMatrix bm{snap_unit(f.base.a + theta * f.delta[0]),
                 snap_unit(f.base.b + theta * f.delta[1]),
                 snap_unit(f.base.c + theta * f.delta[2])};
  bm.validate();
  return bm;
}

ProbMatrix edge_probability_matrix(const SbmParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(params.n);
  const auto& [a, b, c] = params.block;
  Eigen::MatrixXd p(2 * n, 2 * n);
  p.topLeftCorner(n, n).setConstant(a);
  p.bottomRightCorner(n, n).setConstant(c);
  p.topRightCorner(n, n).setConstant(b);
  p.bottomLeftCorner(n, n).setConstant(b);
  p.diagonal().setZero();
  return ProbMatrix(std::move(p));
}

Graph sample_er(const ProbMatrix& p, Rng& rng, std::vector<std::uint8_t> labels) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  draw_pairs(p, rng, [&](NodeId i, NodeId j) { edges.emplace_back(i, j); });
  return Graph(p.size(), std::move(edges), std::move(labels));
}

Graph sample_sbm(const SbmParams& params, Rng& rng) {
  return sample_er(edge_probability_matrix(params), rng, params.membership());
}

ConnectivityExhausted::ConnectivityExhausted(std::uint64_t tries)
    : std::runtime_error("no connected sample after " + std::to_string(tries) + " draws"),
      tries_(tries) {}

ConnectedSample sample_connected(const ProbMatrix& p, Rng& rng, std::uint64_t max_tries,
                                 std::vector<std::uint8_t> labels) {
  if (max_tries < 1) throw std::invalid_argument("max_tries must be at least 1");
  const std::size_t n = p.size();
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::uint64_t attempt = 0; attempt < max_tries; ++attempt) {
    edges.clear();
    DisjointSets sets(n);
    draw_pairs(p, rng, [&](NodeId i, NodeId j) {
      edges.emplace_back(i, j);
      sets.unite(i, j);
    });
    if (n <= 1 || sets.components() == 1) {
      return {Graph(n, std::move(edges), std::move(labels)), attempt};
    }
  }
  throw ConnectivityExhausted(max_tries);
}

ConnectedSample sample_sbm_connected(const SbmParams& params, Rng& rng,
                                     std::uint64_t max_tries) {
  return sample_connected(edge_probability_matrix(params), rng, max_tries,
                          params.membership());
}

double expected_edges_nominal(const SbmParams& params) {
  const double n = static_cast<double>(params.n);
  return n * (n - 1.0) / 2.0 * (params.block.a + params.block.b + params.block.c);
}

double expected_edges_exact(const ProbMatrix& p) {
  const Eigen::MatrixXd& m = p.matrix();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < m.rows(); ++j) total += m(j, i);
  }
  return total;
}

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::DCP: return "DCP";
    case Structure::CCP: return "CCP";
    case Structure::Affinity: return "Affinity";
    case Structure::Ambiguous: return "Ambiguous";
  }
  return "?";
}

Structure classify_structure(const BlockMatrix& bm, double margin) {
  if (!(margin > 1.0)) throw SbmError("classification margin must exceed 1");
  auto dominates = [margin](double x, double y) { return x > 0.0 && x >= margin * y; };
  const auto& [a, b, c] = bm;
  if (dominates(a, b) && dominates(a, c)) return Structure::DCP;
  if (dominates(a, c) && dominates(b, c)) return Structure::CCP;
  if (dominates(a, b) && dominates(c, b)) return Structure::Affinity;
  return Structure::Ambiguous;
}

}  // namespace potions
