#include "potions/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace potions {

using nlohmann::json;

std::string_view to_string(ExperimentMode m) {
  return m == ExperimentMode::Family ? "family" : "spectral";
}

std::vector<double> default_theta_grid(FamilyId id) {
  // Written out rather than accumulated so the printed values stay exact.
  switch (id) {
    case FamilyId::M1:
    case FamilyId::M2: return {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35};
    case FamilyId::M3: return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    case FamilyId::M4: return {0.0, 0.1, 0.2, 0.3, 0.35};
  }
  return {};
}

SbmFamily ExperimentConfig::family_for_row(std::size_t row) const {
  BlockMatrix b0 = base;
  if (!b_rows.empty()) b0.b = b_rows.at(row);
  const double theta_max = theta.empty() ? 0.0 : *std::max_element(theta.begin(), theta.end());
  SbmFamily f{b0, delta, theta_max, family};
  f.validate();
  return f;
}

void ExperimentConfig::validate() const {
  if (experiment_id.empty() ||
      experiment_id.find_first_of(",\n\r\"") != std::string::npos) {
    throw ConfigError("experiment id must be nonempty and free of commas, quotes and newlines");
  }
  if (n < 1) throw ConfigError("n must be at least 1");
  if (theta.empty()) throw ConfigError("theta grid is empty");
  for (double t : theta) {
    if (!(t >= 0.0)) throw ConfigError("theta values must be nonnegative");
  }
  if (networks_per_theta < 1) throw ConfigError("networks_per_theta must be at least 1");
  if (sims_per_network < 1) throw ConfigError("sims_per_network must be at least 1");
  if (max_steps && *max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (max_tries < 1) throw ConfigError("max_tries must be at least 1");
  if (!(margin > 1.0)) throw ConfigError("margin must exceed 1");
  if (mode == ExperimentMode::Spectral) {
    if (family != FamilyId::M1) throw ConfigError("spectral mode runs on family M1");
    if (!b_rows.empty()) throw ConfigError("spectral mode takes a single base, not b_rows");
  }
  try {
    for (std::size_t r = 0; r < row_count(); ++r) family_for_row(r);
  } catch (const SbmError& e) {
    throw ConfigError(std::string("invalid family: ") + e.what());
  }
}

namespace {

std::array<double, 3> triple_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) {
    throw ConfigError(std::string("'") + key + "' must be an array of three numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg;
  try {
    if (j.contains("mode")) {
      const auto mode = j["mode"].get<std::string>();
      if (mode == "family") {
        cfg.mode = ExperimentMode::Family;
      } else if (mode == "spectral") {
        cfg.mode = ExperimentMode::Spectral;
      } else {
        throw ConfigError("mode must be 'family' or 'spectral'");
      }
    }
    if (!j.contains("family")) throw ConfigError("config needs a 'family'");
    cfg.family = parse_family(j["family"].get<std::string>());
    cfg.delta = SbmFamily::direction(cfg.family);
    cfg.theta = default_theta_grid(cfg.family);
    if (cfg.mode == ExperimentMode::Spectral) {
      cfg.base = {0.75, 0.05, 0.15};
      cfg.networks_per_theta = 50;
      cfg.sims_per_network = 100;
    }

    if (j.contains("experiment")) cfg.experiment_id = j["experiment"].get<std::string>();
    if (j.contains("n")) {
      const auto n = j["n"].get<long long>();
      if (n < 1) throw ConfigError("n must be at least 1");
      cfg.n = static_cast<std::size_t>(n);
    }
    if (j.contains("base")) {
      auto [a, b, c] = triple_from(j, "base");
      cfg.base = {a, b, c};
    }
    if (j.contains("delta")) cfg.delta = triple_from(j, "delta");
    if (j.contains("theta")) cfg.theta = j["theta"].get<std::vector<double>>();
    if (j.contains("b_rows")) cfg.b_rows = j["b_rows"].get<std::vector<double>>();
    auto count = [&](const char* key, std::size_t& out) {
      if (!j.contains(key)) return;
      const auto v = j[key].get<long long>();
      if (v < 0) throw ConfigError(std::string("'") + key + "' must be nonnegative");
      out = static_cast<std::size_t>(v);
    };
    count("networks_per_theta", cfg.networks_per_theta);
    count("sims_per_network", cfg.sims_per_network);
    count("resamples_per_embedding", cfg.resamples_per_embedding);
    if (j.contains("max_steps")) {
      if (j["max_steps"].is_null()) {
        cfg.max_steps.reset();
      } else {
        const auto v = j["max_steps"].get<long long>();
        if (v < 1) throw ConfigError("max_steps must be at least 1");
        cfg.max_steps = static_cast<std::uint64_t>(v);
      }
    }
    if (j.contains("max_tries")) {
      const auto v = j["max_tries"].get<long long>();
      if (v < 1) throw ConfigError("max_tries must be at least 1");
      cfg.max_tries = static_cast<std::uint64_t>(v);
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("margin")) cfg.margin = j["margin"].get<double>();
    if (j.contains("recipes")) cfg.recipes_path = j["recipes"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const SbmError& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment_id;
  j["mode"] = std::string(to_string(cfg.mode));
  j["family"] = std::string(to_string(cfg.family));
  j["n"] = cfg.n;
  j["base"] = {cfg.base.a, cfg.base.b, cfg.base.c};
  j["delta"] = cfg.delta;
  j["theta"] = cfg.theta;
  if (!cfg.b_rows.empty()) j["b_rows"] = cfg.b_rows;
  j["networks_per_theta"] = cfg.networks_per_theta;
  j["sims_per_network"] = cfg.sims_per_network;
  j["resamples_per_embedding"] = cfg.resamples_per_embedding;
  j["max_steps"] = cfg.max_steps ? json(*cfg.max_steps) : json(nullptr);
  j["max_tries"] = cfg.max_tries;
  j["seed"] = cfg.seed;
  j["margin"] = cfg.margin;
  if (!cfg.recipes_path.empty()) j["recipes"] = cfg.recipes_path;
  return j.dump(2);
}

}  // namespace potions
