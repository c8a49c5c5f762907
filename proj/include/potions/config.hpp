#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "potions/sbm.hpp"

namespace potions {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentMode { Family, Spectral };

std::string_view to_string(ExperimentMode m);

/// Step ceiling applied when a config asks to run until discovery.
inline constexpr std::uint64_t kStepCeiling = 1'000'000;

/// Experiment description. JSON keys (all optional except "family"):
///
///   experiment, mode ("family" | "spectral"), family ("M1".."M4"), n,
///   base [a,b,c], delta [da,db,dc], theta [...], b_rows [...],
///   networks_per_theta, sims_per_network, resamples_per_embedding,
///   max_steps (integer, or null for "until discovery"), max_tries,
///   seed, margin, recipes (path to a recipe table JSON)
struct ExperimentConfig {
  std::string experiment_id = "experiment";
  ExperimentMode mode = ExperimentMode::Family;
  FamilyId family = FamilyId::M1;
  std::size_t n = 12;
  BlockMatrix base{0.75, 0.05, 0.05};
  std::array<double, 3> delta = SbmFamily::direction(FamilyId::M1);
  std::vector<double> theta{0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35};
  /// M1 rows: each value replaces base.b, giving one theta sweep per row.
  std::vector<double> b_rows;
  std::size_t networks_per_theta = 500;
  std::size_t sims_per_network = 1;
  std::size_t resamples_per_embedding = 100;
  std::optional<std::uint64_t> max_steps;  // nullopt: until discovery, capped at kStepCeiling
  std::uint64_t max_tries = kDefaultMaxTries;
  std::uint64_t seed = 0;
  double margin = 3.0;
  std::string recipes_path;

  /// Family curve for one b-row (or the base when there are no rows).
  SbmFamily family_for_row(std::size_t row) const;
  std::size_t row_count() const { return b_rows.empty() ? 1 : b_rows.size(); }
  std::uint64_t step_limit() const { return max_steps.value_or(kStepCeiling); }

  void validate() const;
};

/// Default theta grid for a family: M1/M2 0..0.35 by 0.05, M3 0..0.7 by 0.1,
/// M4 0..0.35 by 0.1 (0.35 appended).
std::vector<double> default_theta_grid(FamilyId id);

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace potions
