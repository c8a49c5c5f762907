#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "potions/graph.hpp"
#include "potions/random.hpp"
#include "potions/recipes.hpp"

namespace potions {

class AbmError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AgentState {
  ItemMask inventory = 0;
  int score = 0;  // max score over inventory

  bool holds(ItemIndex i) const { return inventory & item_bit(i); }
};

struct SimConfig {
  std::optional<std::uint64_t> max_steps = 1000;  // nullopt: run until discovery
  std::uint64_t seed = 0;
  bool record_trajectory = false;
};

struct SimResult {
  std::optional<std::uint64_t> discovery_time;  // 1-based step index
  bool censored = false;
  std::uint64_t steps_run = 0;
  std::vector<int> final_scores;
  // Filled only with record_trajectory, one entry per completed step.
  std::vector<double> mean_score;
  std::vector<int> max_score;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

struct StepEvents {
  std::size_t attempts = 0;
  std::size_t innovations = 0;  // valid combinations
  std::size_t new_holdings = 0;  // agent-item pairs gained through combination or diffusion
  bool crossover = false;        // step ended early on the crossover item
};

/// Every agent receives the table's starting items. Throws AbmError for fewer
/// than two nodes or an isolated node.
std::vector<AgentState> init_population(const Graph& g, const RecipeTable& table);

/// Uniform over the focal node's neighbors. Throws AbmError if there are none.
NodeId select_partner(const Graph& g, NodeId focal, Rng& rng);

/// Up to two items, drawn without replacement with probability proportional
/// to score among the items not yet drawn.
struct ItemPick {
  std::array<ItemIndex, 2> items{};
  std::size_t count = 0;

  std::span<const ItemIndex> view() const { return {items.data(), count}; }
};

ItemPick select_items(ItemMask inventory, int k, const RecipeTable& table, Rng& rng);

/// Three picks from a dyad. Any repeated item makes the combination invalid.
std::optional<ItemIndex> attempt_combination(std::span<const ItemIndex> picks,
                                             const RecipeTable& table);

/// Gives `item` to both dyad members, then to every neighbor of either one.
/// One hop only. Returns how many agents did not already hold it.
std::size_t diffuse(ItemIndex item, NodeId u, NodeId v, const Graph& g,
                    std::span<AgentState> states, const RecipeTable& table);

/// One time step: each agent is focal once, in a fresh random order, and
/// every effect lands before the next focal acts. Stops early if the
/// crossover item is produced.
StepEvents step(const Graph& g, std::span<AgentState> states, const RecipeTable& table,
                Rng& rng);

/// Runs steps until the crossover item first appears or max_steps is hit.
/// Deterministic in (graph, table, config).
SimResult run_simulation(const Graph& g, const SimConfig& cfg, const RecipeTable& table);

}  // namespace potions
