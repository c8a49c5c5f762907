// potions: generate SBM networks, run the innovation model, embed and
// resample graphs, and drive the parameter sweeps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "potions/abm.hpp"
#include "potions/config.hpp"
#include "potions/experiments.hpp"
#include "potions/graph.hpp"
#include "potions/recipes.hpp"
#include "potions/sbm.hpp"
#include "potions/spectral.hpp"

namespace fs = std::filesystem;
using namespace potions;

namespace {

// Usage and configuration problems exit with 2, runtime failures with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RecipeTable table_from(const std::string& path) {
  return path.empty() ? default_recipe_table() : load_recipe_table(path);
}

std::string graph_name(std::size_t i) {
  std::ostringstream os;
  os << "graph_" << std::setw(4) << std::setfill('0') << i << ".edges";
  return os.str();
}

struct GenerateArgs {
  std::size_t n = 12;
  std::vector<double> block{0.8, 0.15, 0.05};
  std::size_t count = 1;
  bool connected = false;
  std::uint64_t max_tries = kDefaultMaxTries;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& args) {
  if (args.block.size() != 3) throw UsageError("--block takes three probabilities a,b,c");
  SbmParams params{args.n, {args.block[0], args.block[1], args.block[2]}};
  try {
    params.validate();
  } catch (const SbmError& e) {
    throw UsageError(e.what());
  }
  if (args.count > 1 && args.out.empty()) throw UsageError("--count > 1 needs --out <dir>");
  Rng rng(args.seed);
  std::uint64_t rejections = 0;
  for (std::size_t i = 0; i < args.count; ++i) {
    Graph g;
    if (args.connected) {
      auto s = sample_sbm_connected(params, rng, args.max_tries);
      rejections += s.rejections;
      g = std::move(s.graph);
    } else {
      g = sample_sbm(params, rng);
    }
    if (args.out.empty()) {
      write_edge_list(std::cout, g);
    } else if (args.count == 1 && fs::path(args.out).has_extension()) {
      write_edge_list_file(args.out, g);
    } else {
      fs::create_directories(args.out);
      write_edge_list_file((fs::path(args.out) / graph_name(i)).string(), g);
    }
  }
  if (args.connected) std::cerr << "rejected draws: " << rejections << '\n';
  return 0;
}

struct SimulateArgs {
  std::string graph;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1000;
  bool until_discovery = false;
  bool trajectory = false;
  std::string recipes;
};

int run_simulate(const SimulateArgs& args) {
  const Graph g = read_edge_list_file(args.graph);
  SimConfig cfg;
  cfg.seed = args.seed;
  cfg.max_steps = args.until_discovery ? kStepCeiling : args.max_steps;
  cfg.record_trajectory = args.trajectory;
  const SimResult r = run_simulation(g, cfg, table_from(args.recipes));
  nlohmann::json j;
  j["discovery_time"] = r.discovery_time ? nlohmann::json(*r.discovery_time) : nlohmann::json(nullptr);
  j["censored"] = r.censored;
  j["steps_run"] = r.steps_run;
  j["final_scores"] = r.final_scores;
  if (args.trajectory) {
    j["mean_score"] = r.mean_score;
    j["max_score"] = r.max_score;
  }
  std::cout << j.dump() << '\n';
  return 0;
}

struct EmbedArgs {
  std::string graph;
  std::string kind = "ASE";
  std::size_t dim = 0;
  std::size_t d_max = 0;
  std::string out;
};

EmbedOptions embed_options(std::size_t dim, std::size_t d_max) {
  EmbedOptions opts;
  if (dim > 0) opts.dim = dim;
  if (d_max > 0) opts.d_max = d_max;
  return opts;
}

int run_embed(const EmbedArgs& args) {
  const Graph g = read_edge_list_file(args.graph);
  const Embedding e = embed(g, parse_embedding_kind(args.kind), embed_options(args.dim, args.d_max));
  if (args.out.empty()) {
    write_embedding_csv(std::cout, e);
  } else {
    std::ofstream out(args.out);
    if (!out) throw std::runtime_error("cannot write " + args.out);
    write_embedding_csv(out, e);
  }
  std::cerr << to_string(e.kind) << " embedding, d=" << e.dim << '\n';
  return 0;
}

struct ResampleArgs {
  std::string graph;
  std::string kind = "ASE";
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::uint64_t max_tries = kDefaultMaxTries;
  std::string out;
};

int run_resample(const ResampleArgs& args) {
  const Graph g = read_edge_list_file(args.graph);
  const ResampleModel model = build_resample_model(g, parse_embedding_kind(args.kind));
  if (args.count > 1 && args.out.empty()) throw UsageError("--count > 1 needs --out <dir>");
  Rng rng(args.seed);
  std::uint64_t rejections = 0;
  for (std::size_t i = 0; i < args.count; ++i) {
    ConnectedSample s = draw_resample(model, rng, args.max_tries);
    rejections += s.rejections;
    if (args.out.empty()) {
      write_edge_list(std::cout, s.graph);
    } else {
      fs::create_directories(args.out);
      write_edge_list_file((fs::path(args.out) / graph_name(i)).string(), s.graph);
    }
  }
  const std::string manifest = resample_manifest_json(model, rejections);
  if (args.out.empty()) {
    std::cerr << manifest << '\n';
  } else {
    std::ofstream(fs::path(args.out) / "manifest.json") << manifest << '\n';
  }
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t jobs = 0;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(args.config);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (args.seed_given) cfg.seed = args.seed;
  const std::size_t jobs = args.jobs > 0 ? args.jobs : default_jobs();
  const ExperimentResult result = run_experiment(cfg, table_from(cfg.recipes_path), jobs);
  write_experiment_outputs(args.out, result);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "wrote " << result.records.size() << " records";
  if (cfg.mode == ExperimentMode::Spectral) std::cerr << " and " << result.emd.size() << " EMD rows";
  std::cerr << " to " << args.out << '\n';
  return 0;
}

struct SummarizeArgs {
  std::string records;
  std::string out;
};

int run_summarize(const SummarizeArgs& args) {
  std::ifstream in(args.records);
  if (!in) throw std::runtime_error("cannot open " + args.records);
  const auto groups = group_records(read_records_csv(in));
  if (args.out.empty()) {
    write_summary_csv(std::cout, groups);
  } else {
    std::ofstream out(args.out);
    if (!out) throw std::runtime_error("cannot write " + args.out);
    write_summary_csv(out, groups);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Core-periphery structure and collective innovation simulations"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample 2-block SBM graphs as edge lists");
  generate->add_option("--n", gen.n, "Nodes per block")->check(CLI::PositiveNumber);
  generate->add_option("--block", gen.block, "Block probabilities a b c")->expected(3)->delimiter(',');
  generate->add_option("--count", gen.count, "Number of graphs")->check(CLI::PositiveNumber);
  generate->add_flag("--connected", gen.connected, "Reject disconnected draws");
  generate->add_option("--max-tries", gen.max_tries, "Draw cap with --connected")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out, "Output file or directory (stdout if absent)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run one simulation; prints a JSON result line");
  simulate->add_option("--graph", sim.graph, "Edge-list file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--max-steps", sim.max_steps, "Step cap")->check(CLI::PositiveNumber);
  simulate->add_flag("--until-discovery", sim.until_discovery, "Run until the crossover (safety ceiling 1e6)");
  simulate->add_flag("--trajectory", sim.trajectory, "Include per-step mean and max scores");
  simulate->add_option("--recipes", sim.recipes, "Recipe table JSON")->check(CLI::ExistingFile);

  EmbedArgs emb;
  auto* embed_cmd = app.add_subcommand("embed", "Spectral embedding to CSV");
  embed_cmd->add_option("--graph", emb.graph, "Edge-list file")->required()->check(CLI::ExistingFile);
  embed_cmd->add_option("--kind", emb.kind, "ASE or LSE")->check(CLI::IsMember({"ASE", "LSE", "ase", "lse"}));
  embed_cmd->add_option("--dim", emb.dim, "Fixed dimension (default: elbow)");
  embed_cmd->add_option("--d-max", emb.d_max, "Elbow search bound (default N/2)");
  embed_cmd->add_option("--out", emb.out, "CSV path (stdout if absent)");

  ResampleArgs res;
  auto* resample_cmd = app.add_subcommand("resample", "Draw density-adjusted RDPG resamples");
  resample_cmd->add_option("--graph", res.graph, "Edge-list file")->required()->check(CLI::ExistingFile);
  resample_cmd->add_option("--kind", res.kind, "ASE or LSE")->check(CLI::IsMember({"ASE", "LSE", "ase", "lse"}));
  resample_cmd->add_option("--count", res.count, "Number of graphs")->check(CLI::PositiveNumber);
  resample_cmd->add_option("--seed", res.seed, "Random seed");
  resample_cmd->add_option("--max-tries", res.max_tries, "Connectivity draw cap")->check(CLI::PositiveNumber);
  resample_cmd->add_option("--out", res.out, "Output directory (stdout if absent)");

  ExperimentArgs exp;
  auto* experiment = app.add_subcommand("experiment", "Run a family or spectral sweep from a config");
  experiment->add_option("--config", exp.config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", exp.out, "Output directory")->required();
  auto* seed_opt = experiment->add_option("--seed", exp.seed, "Master seed (overrides the config)");
  experiment->add_option("--jobs", exp.jobs, "Worker threads (default $POTIONS_JOBS or 1)");

  SummarizeArgs sum;
  auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate a records CSV");
  summarize_cmd->add_option("--records", sum.records, "records.csv")->required()->check(CLI::ExistingFile);
  summarize_cmd->add_option("--out", sum.out, "CSV path (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*simulate) return run_simulate(sim);
    if (*embed_cmd) return run_embed(emb);
    if (*resample_cmd) return run_resample(res);
    if (*experiment) {
      exp.seed_given = seed_opt->count() > 0;
      return run_experiment_cmd(exp);
    }
    if (*summarize_cmd) return run_summarize(sum);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
