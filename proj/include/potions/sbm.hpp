#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "potions/graph.hpp"
#include "potions/random.hpp"

namespace potions {

class SbmError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 2x2 block matrix [[a, b], [b, c]].
struct BlockMatrix {
  double a = 0.0;  // within block 1
  double b = 0.0;  // between blocks
  double c = 0.0;  // within block 2

  void validate() const;
  friend bool operator==(const BlockMatrix&, const BlockMatrix&) = default;
};

/// Two equal blocks of size n. Nodes 0..n-1 belong to block 1.
struct SbmParams {
  std::size_t n = 12;
  BlockMatrix block;

  std::size_t node_count() const { return 2 * n; }
  std::vector<std::uint8_t> membership() const;
  void validate() const;
};

/// Symmetric edge-probability matrix with zero diagonal and entries in [0,1].
class ProbMatrix {
 public:
  ProbMatrix() = default;
  /// Throws SbmError if the invariants do not hold (tolerance 1e-12 on
  /// symmetry; entries must lie in [0,1] exactly).
  explicit ProbMatrix(Eigen::MatrixXd p);

  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return p_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const { return p_; }

 private:
  Eigen::MatrixXd p_;
};

enum class FamilyId { M1, M2, M3, M4 };

std::string_view to_string(FamilyId id);
FamilyId parse_family(std::string_view name);

/// Linear curve through block-matrix space: base + theta * delta.
struct SbmFamily {
  BlockMatrix base;
  std::array<double, 3> delta{};
  double theta_max = 0.0;
  FamilyId id = FamilyId::M1;

  /// Direction vector fixed by each family:
  ///   M1 (-1,0,1)  DCP -> affinity
  ///   M2 (0,-1,1)  CCP -> affinity
  ///   M3 (0,1,0)   DCP -> CCP, density grows
  ///   M4 (-1,1,0)  DCP -> CCP, density preserved
  static std::array<double, 3> direction(FamilyId id);
  static SbmFamily make(FamilyId id, BlockMatrix base, double theta_max);

  /// Checks the direction constraint and that both ends of [0, theta_max]
  /// stay inside the unit cube.
  void validate() const;
};

BlockMatrix family_point(const SbmFamily& f, double theta);

ProbMatrix edge_probability_matrix(const SbmParams& params);

/// Independent Bernoulli draw for every pair i < j, in row-major order.
Graph sample_er(const ProbMatrix& p, Rng& rng, std::vector<std::uint8_t> labels = {});
Graph sample_sbm(const SbmParams& params, Rng& rng);

class ConnectivityExhausted : public std::runtime_error {
 public:
  explicit ConnectivityExhausted(std::uint64_t tries);
  std::uint64_t tries() const { return tries_; }

 private:
  std::uint64_t tries_;
};

struct ConnectedSample {
  Graph graph;
  std::uint64_t rejections = 0;  // disconnected draws thrown away
};

/// Repeats sample_er until the draw is connected. Consumes the random stream
/// exactly like repeated sample_er calls would. Throws ConnectivityExhausted
/// after max_tries disconnected draws.
ConnectedSample sample_connected(const ProbMatrix& p, Rng& rng, std::uint64_t max_tries,
                                 std::vector<std::uint8_t> labels = {});
ConnectedSample sample_sbm_connected(const SbmParams& params, Rng& rng,
                                     std::uint64_t max_tries);

inline constexpr std::uint64_t kDefaultMaxTries = 1000;

/// C(n,2) * (a + b + c): the density held fixed by the equal-density
/// families. Between-block pairs are counted as C(n,2), not n^2.
double expected_edges_nominal(const SbmParams& params);

/// Sum of the strictly upper triangle.
double expected_edges_exact(const ProbMatrix& p);

enum class Structure { DCP, CCP, Affinity, Ambiguous };

std::string_view to_string(Structure s);

/// Labels a block matrix with a coarse regime, reading "x >> y" as
/// x >= margin * y:
///   DCP       a >> b and a >> c
///   CCP       a >> c and b >> c (and not DCP)
///   Affinity  a >> b and c >> b (and not DCP)
/// Used only for tagging output records.
Structure classify_structure(const BlockMatrix& bm, double margin = 3.0);

}  // namespace potions
