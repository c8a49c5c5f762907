#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "potions/graph.hpp"
#include "potions/random.hpp"
#include "potions/sbm.hpp"

namespace potions {

class SpectralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EmbeddingKind { ASE, LSE };

std::string_view to_string(EmbeddingKind k);
EmbeddingKind parse_embedding_kind(std::string_view s);

/// Singular values, nonincreasing and nonnegative.
struct SingularSpectrum {
  std::vector<double> values;

  void validate() const;
};

struct Embedding {
  Eigen::MatrixXd positions;  // N x d, row i is node i
  EmbeddingKind kind = EmbeddingKind::ASE;
  std::size_t dim = 0;
  SingularSpectrum spectrum;  // full spectrum of the factorized matrix

  std::size_t node_count() const { return static_cast<std::size_t>(positions.rows()); }
};

/// Zhu-Ghodsi profile likelihood elbow. For each split q the leading q values
/// and the rest get their own Gaussian mean with a shared variance
/// (floored at 1e-12); the q with the largest log-likelihood wins, the
/// smallest q on ties. Candidates run over 1..min(m-1, d_max).
std::size_t select_dimension(std::span<const double> values,
                             std::optional<std::size_t> d_max = std::nullopt);

struct EmbedOptions {
  std::optional<std::size_t> dim;    // fixed dimension; otherwise chosen by elbow
  std::optional<std::size_t> d_max;  // elbow search bound, default N/2
};

/// Rank-d factorization of a symmetric matrix through its SVD:
/// X = U_d sqrt(S_d). Each column is flipped so its largest-magnitude entry is
/// positive.
Embedding spectral_embed(const Eigen::MatrixXd& m, EmbeddingKind kind,
                         const EmbedOptions& opts = {});

Eigen::MatrixXd adjacency_matrix(const Graph& g);
/// D^{-1/2} A D^{-1/2}. Throws SpectralError on an isolated node.
Eigen::MatrixXd normalized_laplacian(const Graph& g);

Embedding ase(const Graph& g, const EmbedOptions& opts = {});
Embedding lse(const Graph& g, const EmbedOptions& opts = {});
Embedding embed(const Graph& g, EmbeddingKind kind, const EmbedOptions& opts = {});

/// p_ij = clip(X_i . X_j, 0, 1) off the diagonal. `clipped`, if given,
/// receives the number of pairs i < j that were clipped.
ProbMatrix rdpg_probabilities(const Embedding& e, std::size_t* clipped = nullptr);

struct ResampleModel {
  ProbMatrix adjusted_p;
  double ratio = 1.0;
  std::optional<EmbeddingKind> source_kind;
  std::size_t dim = 0;
  std::size_t clipped_entries = 0;  // pairs i < j clipped at either stage
  std::vector<std::uint8_t> labels;  // carried over from the source graph
};

/// r = target / sum_{i<j} p_ij, then clip(r * p, 0, 1).
ResampleModel density_adjust(const ProbMatrix& p, double target_edges);

/// Embeds g, converts to RDPG probabilities and rescales them to g's edge count.
ResampleModel build_resample_model(const Graph& g, EmbeddingKind kind,
                                   const EmbedOptions& opts = {});

ConnectedSample draw_resample(const ResampleModel& model, Rng& rng, std::uint64_t max_tries);

/// build_resample_model followed by one connected draw.
ConnectedSample resample(const Graph& g, EmbeddingKind kind, Rng& rng,
                         std::uint64_t max_tries = kDefaultMaxTries);

/// One row per node: index followed by d coordinates.
void write_embedding_csv(std::ostream& out, const Embedding& e);

/// kind, d, r, clipped-entry count and rejection count.
std::string resample_manifest_json(const ResampleModel& model, std::uint64_t rejections);

}  // namespace potions
