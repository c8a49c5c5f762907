#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "potions/config.hpp"
#include "potions/random.hpp"
#include "potions/recipes.hpp"
#include "potions/sbm.hpp"
#include "potions/stats.hpp"

namespace potions {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RecordSource { Base, ASE, LSE };

std::string_view to_string(RecordSource s);
RecordSource parse_record_source(std::string_view s);

struct ResultRecord {
  std::string experiment;
  FamilyId family = FamilyId::M1;
  double theta = 0.0;
  BlockMatrix block;
  Structure structure = Structure::Ambiguous;
  std::size_t network_id = 0;
  std::size_t sim_id = 0;  // resample index for ASE/LSE rows
  RecordSource source = RecordSource::Base;
  std::optional<std::uint64_t> discovery_time;
  bool censored = false;
  std::uint64_t steps_run = 0;
  std::uint64_t rejections = 0;  // disconnected draws before this run's graph
  std::uint64_t seed = 0;
};

struct EmdRecord {
  std::string experiment;
  double theta = 0.0;
  std::size_t network_id = 0;
  RecordSource kind = RecordSource::ASE;
  double emd = 0.0;
  std::size_t n_base_sims = 0;
  std::size_t n_resamples = 0;
};

struct ExperimentResult {
  ExperimentMode mode = ExperimentMode::Family;
  std::vector<ResultRecord> records;
  std::vector<EmdRecord> emd;
  std::string manifest_json;
  std::vector<std::string> warnings;
  std::size_t skipped_networks = 0;
};

/// Seed for one unit of work. Every coordinate is folded in, so a task's
/// stream does not depend on which worker runs it or when.
std::uint64_t task_seed(std::uint64_t master, std::size_t regime, std::size_t network,
                        std::size_t sim, std::uint64_t stream);

/// Sweeps theta (times b-rows) and runs sims_per_network simulations on each
/// of networks_per_theta connected samples.
ExperimentResult run_family_experiment(const ExperimentConfig& cfg, const RecipeTable& table,
                                       std::size_t jobs = 1);

/// For every base network: sims_per_network base runs, then one run on each
/// of resamples_per_embedding ASE-RDPG and LSE-RDPG draws, and the EMD between
/// base and resampled discovery times per kind.
ExperimentResult run_spectral_experiment(const ExperimentConfig& cfg, const RecipeTable& table,
                                         std::size_t jobs = 1);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RecipeTable& table,
                                 std::size_t jobs = 1);

inline constexpr std::string_view kRecordsHeader =
    "experiment,family,theta,a,b,c,structure,network_id,sim_id,source,discovery_time,"
    "censored,steps_run,seed";
inline constexpr std::string_view kEmdHeader =
    "experiment,theta,network_id,kind,emd,n_base_sims,n_resamples";

/// Shortest round-trip decimal form.
std::string format_number(double x);

void write_records_csv(std::ostream& out, std::span<const ResultRecord> records);
void write_emd_csv(std::ostream& out, std::span<const EmdRecord> rows);
std::vector<ResultRecord> read_records_csv(std::istream& in);

/// Writes records.csv, manifest.json and (spectral mode) emd.csv into dir.
void write_experiment_outputs(const std::string& dir, const ExperimentResult& result);

/// Groups records by (experiment, family, theta, a, b, c, source).
struct RecordGroup {
  std::string experiment;
  FamilyId family = FamilyId::M1;
  double theta = 0.0;
  BlockMatrix block;
  Structure structure = Structure::Ambiguous;
  RecordSource source = RecordSource::Base;
  EmpiricalDistribution distribution;
};

std::vector<RecordGroup> group_records(std::span<const ResultRecord> records);
void write_summary_csv(std::ostream& out, std::span<const RecordGroup> groups);

struct BootstrapResult {
  double diff = 0.0;         // mean(a) - mean(b)
  double p_one_sided = 1.0;  // evidence for mean(a) < mean(b)
};

/// Resamples both groups with replacement `iters` times; the p-value is the
/// share of replicates whose mean difference is not below zero, with the
/// usual +1 correction.
BootstrapResult bootstrap_mean_diff(std::span<const double> a, std::span<const double> b,
                                    std::size_t iters, Rng& rng);

/// --jobs default: POTIONS_JOBS if set and positive, else 1.
std::size_t default_jobs();

}  // namespace potions
