#include "potions/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "potions/abm.hpp"
#include "potions/spectral.hpp"

#ifndef POTIONS_VERSION
#define POTIONS_VERSION "unknown"
#endif

namespace potions {

using nlohmann::json;

namespace {

// Stream tags mixed into task seeds. Simulation streams use the numeric
// value of RecordSource (0..2).
constexpr std::uint64_t kNetworkStream = 100;
constexpr std::uint64_t kResampleGraphStream = 200;

struct Regime {
  std::size_t index = 0;
  std::size_t row = 0;
  double theta = 0.0;
  BlockMatrix block;
  Structure structure = Structure::Ambiguous;
};

std::vector<Regime> build_regimes(const ExperimentConfig& cfg) {
  std::vector<Regime> regimes;
  for (std::size_t row = 0; row < cfg.row_count(); ++row) {
    const SbmFamily fam = cfg.family_for_row(row);
    for (double t : cfg.theta) {
      Regime r;
      r.index = regimes.size();
      r.row = row;
      r.theta = t;
      r.block = family_point(fam, t);
      r.structure = classify_structure(r.block, cfg.margin);
      regimes.push_back(r);
    }
  }
  return regimes;
}

struct TaskOutput {
  std::vector<ResultRecord> records;
  std::vector<EmdRecord> emd;
  std::uint64_t network_rejections = 0;
  bool skipped = false;
  std::vector<std::string> warnings;
  // Spectral diagnostics, indexed ASE = 0, LSE = 1.
  std::array<std::size_t, 2> dims{};
  std::array<double, 2> ratios{};
  std::array<std::size_t, 2> clipped{};
  std::array<std::uint64_t, 2> resample_rejections{};
  std::array<bool, 2> has_model{};
};

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Exceptions are
// rethrown after all workers stop, lowest task index first.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ResultRecord make_record(const ExperimentConfig& cfg, const Regime& reg, std::size_t network,
                         std::size_t sim, RecordSource source, const SimResult& res,
                         std::uint64_t rejections, std::uint64_t seed) {
  ResultRecord r;
  r.experiment = cfg.experiment_id;
  r.family = cfg.family;
  r.theta = reg.theta;
  r.block = reg.block;
  r.structure = reg.structure;
  r.network_id = network;
  r.sim_id = sim;
  r.source = source;
  r.discovery_time = res.discovery_time;
  r.censored = res.censored;
  r.steps_run = res.steps_run;
  r.rejections = rejections;
  r.seed = seed;
  return r;
}

SimResult simulate(const Graph& g, const ExperimentConfig& cfg, const RecipeTable& table,
                   std::uint64_t seed) {
  SimConfig sc;
  sc.max_steps = cfg.step_limit();
  sc.seed = seed;
  return run_simulation(g, sc, table);
}

std::string context(const ExperimentConfig& cfg, const Regime& reg, std::size_t network) {
  std::ostringstream os;
  os << cfg.experiment_id << " " << to_string(cfg.family) << " theta=" << reg.theta
     << " (a,b,c)=(" << reg.block.a << "," << reg.block.b << "," << reg.block.c
     << ") network " << network;
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json summary_json(const EmpiricalDistribution& d) {
  if (d.samples.empty()) return json{{"count", 0}, {"censored_count", d.censored_count}};
  const Summary s = summarize(d);
  return json{{"mean", s.mean},   {"median", s.median}, {"q1", s.q1},
              {"q3", s.q3},       {"min", s.min},       {"max", s.max},
              {"count", s.count}, {"censored_count", s.censored_count}};
}

json regimes_json(const std::vector<Regime>& regimes, const ExperimentConfig& cfg,
                  const std::vector<RecordGroup>& groups,
                  const std::vector<TaskOutput>& outputs) {
  json out = json::array();
  for (const Regime& reg : regimes) {
    std::uint64_t rejections = 0;
    for (std::size_t net = 0; net < cfg.networks_per_theta; ++net) {
      rejections += outputs[reg.index * cfg.networks_per_theta + net].network_rejections;
    }
    json entry{{"row", reg.row},
               {"theta", reg.theta},
               {"a", reg.block.a},
               {"b", reg.block.b},
               {"c", reg.block.c},
               {"structure", std::string(to_string(reg.structure))},
               {"network_rejections", rejections},
               {"sources", json::object()}};
    for (const RecordGroup& g : groups) {
      if (g.theta == reg.theta && g.block == reg.block) {
        entry["sources"][std::string(to_string(g.source))] = summary_json(g.distribution);
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

ExperimentResult assemble(const ExperimentConfig& cfg, const std::vector<Regime>& regimes,
                          std::vector<TaskOutput>& outputs, std::size_t expected_records,
                          double seconds, const std::string& started_at,
                          std::vector<std::string> warnings) {
  ExperimentResult result;
  result.mode = cfg.mode;
  result.warnings = std::move(warnings);
  std::uint64_t total_rejections = 0;
  std::size_t total_clipped = 0;
  json spectral = json::object();
  std::array<std::vector<double>, 2> dims, ratios;
  std::array<std::uint64_t, 2> resample_rejections{};
  for (TaskOutput& t : outputs) {
    std::move(t.records.begin(), t.records.end(), std::back_inserter(result.records));
    std::move(t.emd.begin(), t.emd.end(), std::back_inserter(result.emd));
    for (auto& w : t.warnings) result.warnings.push_back(std::move(w));
    total_rejections += t.network_rejections;
    result.skipped_networks += t.skipped ? 1 : 0;
    for (int k = 0; k < 2; ++k) {
      if (!t.has_model[k]) continue;
      dims[k].push_back(static_cast<double>(t.dims[k]));
      ratios[k].push_back(t.ratios[k]);
      total_clipped += t.clipped[k];
      resample_rejections[k] += t.resample_rejections[k];
    }
  }
  if (result.records.size() != expected_records) {
    throw ExperimentError("record count " + std::to_string(result.records.size()) +
                          " does not match the expected " + std::to_string(expected_records));
  }

  const auto groups = group_records(result.records);
  json manifest;
  manifest["config"] = json::parse(experiment_config_to_json(cfg));
  manifest["code_version"] = POTIONS_VERSION;
  manifest["started_at"] = started_at;
  manifest["wall_clock_seconds"] = seconds;
  manifest["record_count"] = result.records.size();
  manifest["emd_row_count"] = result.emd.size();
  manifest["regimes"] = regimes_json(regimes, cfg, groups, outputs);
  json diag{{"network_rejections", total_rejections},
            {"skipped_networks", result.skipped_networks},
            {"clipped_entries", total_clipped},
            {"warnings", result.warnings}};
  if (cfg.mode == ExperimentMode::Spectral) {
    for (int k = 0; k < 2; ++k) {
      const std::string name = k == 0 ? "ASE" : "LSE";
      json kj{{"models", dims[k].size()}, {"resample_rejections", resample_rejections[k]}};
      if (!dims[k].empty()) {
        kj["dimension"] = summary_json(EmpiricalDistribution{dims[k], 0});
        kj["ratio"] = summary_json(EmpiricalDistribution{ratios[k], 0});
      }
      spectral[name] = kj;
    }
    diag["spectral"] = spectral;
  }
  manifest["diagnostics"] = diag;
  result.manifest_json = manifest.dump(2);
  return result;
}

}  // namespace

std::string_view to_string(RecordSource s) {
  switch (s) {
    case RecordSource::Base: return "base";
    case RecordSource::ASE: return "ASE";
    case RecordSource::LSE: return "LSE";
  }
  return "?";
}

RecordSource parse_record_source(std::string_view s) {
  if (s == "base") return RecordSource::Base;
  if (s == "ASE") return RecordSource::ASE;
  if (s == "LSE") return RecordSource::LSE;
  throw ExperimentError("unknown record source '" + std::string(s) + "'");
}

std::uint64_t task_seed(std::uint64_t master, std::size_t regime, std::size_t network,
                        std::size_t sim, std::uint64_t stream) {
  return derive_seed({master, regime, network, sim, stream});
}

ExperimentResult run_family_experiment(const ExperimentConfig& cfg, const RecipeTable& table,
                                       std::size_t jobs) {
  cfg.validate();
  if (cfg.mode != ExperimentMode::Family) throw ExperimentError("config is not a family experiment");
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started_at = utc_timestamp();
  const auto regimes = build_regimes(cfg);
  const std::size_t per_regime = cfg.networks_per_theta;
  std::vector<TaskOutput> outputs(regimes.size() * per_regime);

  parallel_for(outputs.size(), jobs, [&](std::size_t task) {
    const Regime& reg = regimes[task / per_regime];
    const std::size_t net = task % per_regime;
    TaskOutput& out = outputs[task];
    Rng rng(task_seed(cfg.seed, reg.index, net, 0, kNetworkStream));
    ConnectedSample sample;
    try {
      sample = sample_sbm_connected(SbmParams{cfg.n, reg.block}, rng, cfg.max_tries);
    } catch (const ConnectivityExhausted& e) {
      throw ExperimentError(context(cfg, reg, net) + ": " + e.what());
    }
    out.network_rejections = sample.rejections;
    for (std::size_t sim = 0; sim < cfg.sims_per_network; ++sim) {
      const auto seed = task_seed(cfg.seed, reg.index, net, sim,
                                  static_cast<std::uint64_t>(RecordSource::Base));
      out.records.push_back(make_record(cfg, reg, net, sim, RecordSource::Base,
                                        simulate(sample.graph, cfg, table, seed),
                                        sample.rejections, seed));
    }
  });

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return assemble(cfg, regimes, outputs, regimes.size() * per_regime * cfg.sims_per_network, secs,
                  started_at, {});
}

ExperimentResult run_spectral_experiment(const ExperimentConfig& cfg, const RecipeTable& table,
                                         std::size_t jobs) {
  cfg.validate();
  if (cfg.mode != ExperimentMode::Spectral) {
    throw ExperimentError("config is not a spectral experiment");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started_at = utc_timestamp();
  const auto regimes = build_regimes(cfg);
  const std::size_t per_regime = cfg.networks_per_theta;
  std::vector<TaskOutput> outputs(regimes.size() * per_regime);
  std::vector<std::string> warnings;
  if (cfg.resamples_per_embedding == 0) {
    warnings.push_back("resamples_per_embedding is 0: no resampled runs and no EMD rows");
  }

  parallel_for(outputs.size(), jobs, [&](std::size_t task) {
    const Regime& reg = regimes[task / per_regime];
    const std::size_t net = task % per_regime;
    TaskOutput& out = outputs[task];
    auto skip = [&](const std::string& why) {
      out.records.clear();
      out.emd.clear();
      out.skipped = true;
      out.has_model = {};
      out.warnings.push_back(context(cfg, reg, net) + " skipped: " + why);
    };

    Rng rng(task_seed(cfg.seed, reg.index, net, 0, kNetworkStream));
    ConnectedSample base;
    try {
      base = sample_sbm_connected(SbmParams{cfg.n, reg.block}, rng, cfg.max_tries);
    } catch (const ConnectivityExhausted& e) {
      out.network_rejections = e.tries();
      skip(std::string("base network: ") + e.what());
      return;
    }
    out.network_rejections = base.rejections;

    EmpiricalDistribution base_dt;
    for (std::size_t sim = 0; sim < cfg.sims_per_network; ++sim) {
      const auto seed = task_seed(cfg.seed, reg.index, net, sim,
                                  static_cast<std::uint64_t>(RecordSource::Base));
      const SimResult res = simulate(base.graph, cfg, table, seed);
      if (res.discovery_time) {
        base_dt.samples.push_back(static_cast<double>(*res.discovery_time));
      } else {
        ++base_dt.censored_count;
      }
      out.records.push_back(
          make_record(cfg, reg, net, sim, RecordSource::Base, res, base.rejections, seed));
    }
    if (cfg.resamples_per_embedding == 0) return;

    for (int k = 0; k < 2; ++k) {
      const EmbeddingKind kind = k == 0 ? EmbeddingKind::ASE : EmbeddingKind::LSE;
      const RecordSource source = k == 0 ? RecordSource::ASE : RecordSource::LSE;
      ResampleModel model;
      try {
        model = build_resample_model(base.graph, kind);
      } catch (const SpectralError& e) {
        skip(std::string(to_string(kind)) + " model: " + e.what());
        return;
      }
      out.has_model[k] = true;
      out.dims[k] = model.dim;
      out.ratios[k] = model.ratio;
      out.clipped[k] = model.clipped_entries;

      EmpiricalDistribution resampled_dt;
      for (std::size_t r = 0; r < cfg.resamples_per_embedding; ++r) {
        Rng graph_rng(task_seed(cfg.seed, reg.index, net, r,
                                kResampleGraphStream + static_cast<std::uint64_t>(source)));
        ConnectedSample draw;
        try {
          draw = draw_resample(model, graph_rng, cfg.max_tries);
        } catch (const ConnectivityExhausted& e) {
          out.resample_rejections[k] += e.tries();
          skip(std::string(to_string(kind)) + "-RDPG resample: " + e.what());
          return;
        }
        out.resample_rejections[k] += draw.rejections;
        const auto seed =
            task_seed(cfg.seed, reg.index, net, r, static_cast<std::uint64_t>(source));
        const SimResult res = simulate(draw.graph, cfg, table, seed);
        if (res.discovery_time) {
          resampled_dt.samples.push_back(static_cast<double>(*res.discovery_time));
        } else {
          ++resampled_dt.censored_count;
        }
        out.records.push_back(make_record(cfg, reg, net, r, source, res, draw.rejections, seed));
      }
      if (base_dt.samples.empty() || resampled_dt.samples.empty()) {
        out.warnings.push_back(context(cfg, reg, net) + ": no uncensored runs for " +
                               std::string(to_string(kind)) + " EMD");
        continue;
      }
      out.emd.push_back(EmdRecord{cfg.experiment_id, reg.theta, net, source,
                                  emd_1d(base_dt, resampled_dt), base_dt.samples.size(),
                                  resampled_dt.samples.size()});
    }
  });

  std::size_t kept = 0;
  for (const TaskOutput& t : outputs) kept += t.skipped ? 0 : 1;
  const std::size_t expected = kept * (cfg.sims_per_network + 2 * cfg.resamples_per_embedding);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return assemble(cfg, regimes, outputs, expected, secs, started_at, std::move(warnings));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RecipeTable& table,
                                std::size_t jobs) {
  return cfg.mode == ExperimentMode::Family ? run_family_experiment(cfg, table, jobs)
                                            : run_spectral_experiment(cfg, table, jobs);
}

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw ExperimentError("cannot format number");
  return std::string(buf, end);
}

void write_records_csv(std::ostream& out, std::span<const ResultRecord> records) {
  out << kRecordsHeader << '\n';
  for (const ResultRecord& r : records) {
    out << r.experiment << ',' << to_string(r.family) << ',' << format_number(r.theta) << ','
        << format_number(r.block.a) << ',' << format_number(r.block.b) << ','
        << format_number(r.block.c) << ',' << to_string(r.structure) << ',' << r.network_id
        << ',' << r.sim_id << ',' << to_string(r.source) << ',';
    if (r.discovery_time) out << *r.discovery_time;
    out << ',' << (r.censored ? "true" : "false") << ',' << r.steps_run << ',' << r.seed << '\n';
  }
}

void write_emd_csv(std::ostream& out, std::span<const EmdRecord> rows) {
  out << kEmdHeader << '\n';
  for (const EmdRecord& e : rows) {
    out << e.experiment << ',' << format_number(e.theta) << ',' << e.network_id << ','
        << to_string(e.kind) << ',' << format_number(e.emd) << ',' << e.n_base_sims << ','
        << e.n_resamples << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_field(const std::string& s, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ExperimentError(std::string("bad ") + what + " field '" + s + "'");
  }
  return value;
}

Structure parse_structure(const std::string& s) {
  for (Structure st : {Structure::DCP, Structure::CCP, Structure::Affinity, Structure::Ambiguous}) {
    if (s == to_string(st)) return st;
  }
  throw ExperimentError("unknown structure label '" + s + "'");
}

}  // namespace

std::vector<ResultRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ExperimentError("records file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader) throw ExperimentError("unexpected records header: " + line);
  std::vector<ResultRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 14) throw ExperimentError("records row has " + std::to_string(f.size()) + " fields");
    ResultRecord r;
    r.experiment = f[0];
    try {
      r.family = parse_family(f[1]);
    } catch (const SbmError& e) {
      throw ExperimentError(e.what());
    }
    r.theta = parse_field<double>(f[2], "theta");
    r.block = {parse_field<double>(f[3], "a"), parse_field<double>(f[4], "b"),
               parse_field<double>(f[5], "c")};
    r.structure = parse_structure(f[6]);
    r.network_id = parse_field<std::size_t>(f[7], "network_id");
    r.sim_id = parse_field<std::size_t>(f[8], "sim_id");
    r.source = parse_record_source(f[9]);
    if (!f[10].empty()) r.discovery_time = parse_field<std::uint64_t>(f[10], "discovery_time");
    if (f[11] != "true" && f[11] != "false") throw ExperimentError("bad censored field");
    r.censored = f[11] == "true";
    r.steps_run = parse_field<std::uint64_t>(f[12], "steps_run");
    r.seed = parse_field<std::uint64_t>(f[13], "seed");
    records.push_back(std::move(r));
  }
  return records;
}

void write_experiment_outputs(const std::string& dir, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw ExperimentError("cannot write " + (fs::path(dir) / name).string());
    return out;
  };
  {
    auto out = open("records.csv");
    write_records_csv(out, result.records);
  }
  if (result.mode == ExperimentMode::Spectral) {
    auto out = open("emd.csv");
    write_emd_csv(out, result.emd);
  }
  auto out = open("manifest.json");
  out << result.manifest_json << '\n';
}

std::vector<RecordGroup> group_records(std::span<const ResultRecord> records) {
  using Key = std::tuple<std::string, int, double, double, double, double, int>;
  std::map<Key, RecordGroup> groups;
  for (const ResultRecord& r : records) {
    Key key{r.experiment, static_cast<int>(r.family), r.theta, r.block.a, r.block.b, r.block.c,
            static_cast<int>(r.source)};
    auto [it, fresh] = groups.try_emplace(key);
    RecordGroup& g = it->second;
    if (fresh) {
      g.experiment = r.experiment;
      g.family = r.family;
      g.theta = r.theta;
      g.block = r.block;
      g.structure = r.structure;
      g.source = r.source;
    }
    if (r.discovery_time && !r.censored) {
      g.distribution.samples.push_back(static_cast<double>(*r.discovery_time));
    } else {
      ++g.distribution.censored_count;
    }
  }
  std::vector<RecordGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const RecordGroup> groups) {
  out << "experiment,family,theta,a,b,c,structure,source,count,censored,mean,median,q1,q3,min,max\n";
  for (const RecordGroup& g : groups) {
    out << g.experiment << ',' << to_string(g.family) << ',' << format_number(g.theta) << ','
        << format_number(g.block.a) << ',' << format_number(g.block.b) << ','
        << format_number(g.block.c) << ',' << to_string(g.structure) << ','
        << to_string(g.source) << ',';
    if (g.distribution.samples.empty()) {
      out << "0," << g.distribution.censored_count << ",,,,,,\n";
      continue;
    }
    const Summary s = summarize(g.distribution);
    out << s.count << ',' << s.censored_count << ',' << format_number(s.mean) << ','
        << format_number(s.median) << ',' << format_number(s.q1) << ',' << format_number(s.q3)
        << ',' << format_number(s.min) << ',' << format_number(s.max) << '\n';
  }
}

BootstrapResult bootstrap_mean_diff(std::span<const double> a, std::span<const double> b,
                                    std::size_t iters, Rng& rng) {
  if (a.empty() || b.empty()) throw StatsError("bootstrap needs two nonempty samples");
  if (iters < 1000) throw StatsError("bootstrap needs at least 1000 iterations");
  auto mean = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto resampled_mean = [&](std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[uniform_below(rng, v.size())];
    return s / static_cast<double>(v.size());
  };
  BootstrapResult out;
  out.diff = mean(a) - mean(b);
  double not_below = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    const double d = resampled_mean(a) - resampled_mean(b);
    if (d > 0.0) {
      not_below += 1.0;
    } else if (d == 0.0) {
      not_below += 0.5;
    }
  }
  out.p_one_sided = (not_below + 1.0) / (static_cast<double>(iters) + 1.0);
  return out;
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("POTIONS_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace potions
