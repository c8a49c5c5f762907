#include "potions/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <json.hpp>

namespace potions {

namespace {

constexpr double kVarianceFloor = 1e-12;

double segment_sum_of_squares(std::span<const double> v, double& mean) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss;
}

}  // namespace

std::string_view to_string(EmbeddingKind k) {
  return k == EmbeddingKind::ASE ? "ASE" : "LSE";
}

EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "ASE" || s == "ase") return EmbeddingKind::ASE;
  if (s == "LSE" || s == "lse") return EmbeddingKind::LSE;
  throw SpectralError("unknown embedding kind '" + std::string(s) + "'");
}

void SingularSpectrum::validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw SpectralError("singular values must be nonnegative");
    if (i > 0 && values[i] > values[i - 1]) {
      throw SpectralError("singular values must be nonincreasing");
    }
  }
}

std::size_t select_dimension(std::span<const double> values, std::optional<std::size_t> d_max) {
  const std::size_t m = values.size();
  if (m < 2) throw SpectralError("dimension selection needs at least two values");
  std::size_t last = m - 1;
  if (d_max) last = std::min(last, std::max<std::size_t>(*d_max, 1));
  if (m == 2) return 1;

  std::size_t best_q = 1;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 1; q <= last; ++q) {
    double mu1 = 0.0, mu2 = 0.0;
    const double ss = segment_sum_of_squares(values.first(q), mu1) +
                      segment_sum_of_squares(values.subspan(q), mu2);
    const double var = std::max(ss / static_cast<double>(m - 2), kVarianceFloor);
    const double ll = -0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi * var) -
                      ss / (2.0 * var);
    if (ll > best_ll) {
      best_ll = ll;
      best_q = q;
    }
  }
  return best_q;
}

Embedding spectral_embed(const Eigen::MatrixXd& m, EmbeddingKind kind, const EmbedOptions& opts) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (n == 0 || m.rows() != m.cols()) throw SpectralError("cannot embed an empty or non-square matrix");
  if (opts.dim && (*opts.dim < 1 || *opts.dim > n)) {
    throw SpectralError("embedding dimension " + std::to_string(*opts.dim) +
                        " outside [1, " + std::to_string(n) + "]");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) {
    throw SpectralError("matrix has no positive singular values");
  }

  Embedding e;
  e.kind = kind;
  e.spectrum.values.assign(sv.data(), sv.data() + sv.size());
  if (opts.dim) {
    e.dim = *opts.dim;
  } else if (n == 1) {
    e.dim = 1;
  } else {
    e.dim = select_dimension(e.spectrum.values, opts.d_max.value_or(std::max<std::size_t>(n / 2, 1)));
  }

  const auto d = static_cast<Eigen::Index>(e.dim);
  e.positions = svd.matrixU().leftCols(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Eigen::Index arg = 0;
    e.positions.col(k).cwiseAbs().maxCoeff(&arg);
    if (e.positions(arg, k) < 0.0) e.positions.col(k) *= -1.0;
    e.positions.col(k) *= std::sqrt(sv(k));
  }
  return e;
}

Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Eigen::MatrixXd normalized_laplacian(const Graph& g) {
  Eigen::VectorXd inv_sqrt(static_cast<Eigen::Index>(g.node_count()));
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto deg = g.degree(i);
    if (deg == 0) {
      throw SpectralError("node " + std::to_string(i) +
                          " is isolated; the normalized Laplacian is undefined");
    }
    inv_sqrt(i) = 1.0 / std::sqrt(static_cast<double>(deg));
  }
  return inv_sqrt.asDiagonal() * adjacency_matrix(g) * inv_sqrt.asDiagonal();
}

Embedding ase(const Graph& g, const EmbedOptions& opts) {
  if (g.node_count() == 0) throw SpectralError("cannot embed an empty graph");
  return spectral_embed(adjacency_matrix(g), EmbeddingKind::ASE, opts);
}

Embedding lse(const Graph& g, const EmbedOptions& opts) {
  if (g.node_count() == 0) throw SpectralError("cannot embed an empty graph");
  return spectral_embed(normalized_laplacian(g), EmbeddingKind::LSE, opts);
}

Embedding embed(const Graph& g, EmbeddingKind kind, const EmbedOptions& opts) {
  return kind == EmbeddingKind::ASE ? ase(g, opts) : lse(g, opts);
}

ProbMatrix rdpg_probabilities(const Embedding& e, std::size_t* clipped) {
  const Eigen::Index n = e.positions.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double x = e.positions.row(i).dot(e.positions.row(j));
      if (x < 0.0 || x > 1.0) {
        ++count;
        x = std::clamp(x, 0.0, 1.0);
      }
      p(i, j) = x;
      p(j, i) = x;
    }
  }
  if (clipped) *clipped = count;
  return ProbMatrix(std::move(p));
}

ResampleModel density_adjust(const ProbMatrix& p, double target_edges) {
  if (!(target_edges > 0.0)) throw SpectralError("target edge count must be positive");
  const double expected = expected_edges_exact(p);
  if (!(expected > 0.0)) throw SpectralError("probability matrix has zero expected edges");

  ResampleModel model;
  model.ratio = target_edges / expected;
  Eigen::MatrixXd scaled = p.matrix() * model.ratio;
  const Eigen::Index n = scaled.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (scaled(i, j) > 1.0) {
        ++model.clipped_entries;
        scaled(i, j) = 1.0;
        scaled(j, i) = 1.0;
      }
    }
  }
  model.adjusted_p = ProbMatrix(std::move(scaled));
  return model;
}

ResampleModel build_resample_model(const Graph& g, EmbeddingKind kind, const EmbedOptions& opts) {
  const Embedding e = embed(g, kind, opts);
  std::size_t clipped = 0;
  const ProbMatrix p = rdpg_probabilities(e, &clipped);
  ResampleModel model = density_adjust(p, static_cast<double>(g.edge_count()));
  model.source_kind = kind;
  model.dim = e.dim;
  model.clipped_entries += clipped;
  model.labels = g.labels();
  return model;
}

ConnectedSample draw_resample(const ResampleModel& model, Rng& rng, std::uint64_t max_tries) {
  return sample_connected(model.adjusted_p, rng, max_tries, model.labels);
}

ConnectedSample resample(const Graph& g, EmbeddingKind kind, Rng& rng, std::uint64_t max_tries) {
  return draw_resample(build_resample_model(g, kind), rng, max_tries);
}

void write_embedding_csv(std::ostream& out, const Embedding& e) {
  out.precision(17);
  for (Eigen::Index i = 0; i < e.positions.rows(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < e.positions.cols(); ++k) out << ',' << e.positions(i, k);
    out << '\n';
  }
}

std::string resample_manifest_json(const ResampleModel& model, std::uint64_t rejections) {
  nlohmann::json j;
  j["kind"] = model.source_kind ? std::string(to_string(*model.source_kind)) : std::string();
  j["d"] = model.dim;
  j["r"] = model.ratio;
  j["clipped_entries"] = model.clipped_entries;
  j["rejections"] = rejections;
  return j.dump(2);
}

}  // namespace potions
