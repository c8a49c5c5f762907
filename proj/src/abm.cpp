#include "potions/abm.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

namespace potions {

namespace {

int max_score(ItemMask inventory, const RecipeTable& table) {
  int best = 0;
  for (ItemMask m = inventory; m; m &= m - 1) {
    best = std::max(best, table.score(static_cast<ItemIndex>(std::countr_zero(m))));
  }
  return best;
}

// Adds the item; returns true if the agent did not have it.
bool give(AgentState& s, ItemIndex item, int item_score) {
  if (s.holds(item)) return false;
  s.inventory |= item_bit(item);
  s.score = std::max(s.score, item_score);
  return true;
}

}  // namespace

std::vector<AgentState> init_population(const Graph& g, const RecipeTable& table) {
  if (g.node_count() < 2) throw AbmError("the simulation needs at least two agents");
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (g.degree(i) == 0) {
      throw AbmError("node " + std::to_string(i) + " is isolated and cannot pick a partner");
    }
  }
  const ItemMask start = table.initial_items();
  return std::vector<AgentState>(g.node_count(), AgentState{start, max_score(start, table)});
}

NodeId select_partner(const Graph& g, NodeId focal, Rng& rng) {
  auto nb = g.neighbors(focal);
  if (nb.empty()) throw AbmError("node " + std::to_string(focal) + " has no neighbors");
  return nb[uniform_below(rng, nb.size())];
}

ItemPick select_items(ItemMask inventory, int k, const RecipeTable& table, Rng& rng) {
  if (k < 0 || k > 2) throw AbmError("an agent contributes one or two items");
  if (std::popcount(inventory) < k) throw AbmError("inventory smaller than requested pick");
  ItemPick pick;
  ItemMask remaining = inventory;
  for (int draw = 0; draw < k; ++draw) {
    long total = 0;
    for (ItemMask m = remaining; m; m &= m - 1) {
      total += table.score(static_cast<ItemIndex>(std::countr_zero(m)));
    }
    double target = uniform01(rng) * static_cast<double>(total);
    ItemIndex chosen = static_cast<ItemIndex>(std::countr_zero(remaining));
    for (ItemMask m = remaining; m; m &= m - 1) {
      chosen = static_cast<ItemIndex>(std::countr_zero(m));
      target -= table.score(chosen);
      if (target < 0.0) break;
    }
    pick.items[pick.count++] = chosen;
    remaining &= ~item_bit(chosen);
  }
  return pick;
}

std::optional<ItemIndex> attempt_combination(std::span<const ItemIndex> picks,
                                             const RecipeTable& table) {
  if (picks.size() != 3) throw AbmError("a combination takes exactly three items");
  ItemMask triad = 0;
  for (ItemIndex i : picks) {
    if (triad & item_bit(i)) return std::nullopt;
    triad |= item_bit(i);
  }
  return table.combine(triad);
}

std::size_t diffuse(ItemIndex item, NodeId u, NodeId v, const Graph& g,
                    std::span<AgentState> states, const RecipeTable& table) {
  const int s = table.score(item);
  std::size_t received = 0;
  received += give(states[u], item, s);
  received += give(states[v], item, s);
  for (NodeId member : {u, v}) {
    for (NodeId w : g.neighbors(member)) received += give(states[w], item, s);
  }
  return received;
}

StepEvents step(const Graph& g, std::span<AgentState> states, const RecipeTable& table,
                Rng& rng) {
  const std::size_t n = g.node_count();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_below(rng, i)]);
  }

  StepEvents events;
  for (NodeId focal : order) {
    const NodeId partner = select_partner(g, focal, rng);
    const int k = 1 + static_cast<int>(uniform_below(rng, 2));
    const ItemPick mine = select_items(states[focal].inventory, k, table, rng);
    const ItemPick theirs = select_items(states[partner].inventory, 3 - k, table, rng);
    std::array<ItemIndex, 3> picks{};
    std::copy_n(mine.items.begin(), mine.count, picks.begin());
    std::copy_n(theirs.items.begin(), theirs.count, picks.begin() + mine.count);

    ++events.attempts;
    const auto product = attempt_combination(picks, table);
    if (!product) continue;
    ++events.innovations;
    events.new_holdings += diffuse(*product, focal, partner, g, states, table);
    if (table.is_crossover_item(*product)) {
      events.crossover = true;
      break;
    }
  }
  return events;
}

SimResult run_simulation(const Graph& g, const SimConfig& cfg, const RecipeTable& table) {
  if (cfg.max_steps && *cfg.max_steps == 0) throw AbmError("max_steps must be at least 1");
  std::vector<AgentState> states = init_population(g, table);
  Rng rng(cfg.seed);
  SimResult result;
  const std::uint64_t limit = cfg.max_steps.value_or(UINT64_MAX);
  while (result.steps_run < limit) {
    const StepEvents ev = step(g, states, table, rng);
    ++result.steps_run;
    if (cfg.record_trajectory) {
      long sum = 0;
      int best = 0;
      for (const AgentState& s : states) {
        sum += s.score;
        best = std::max(best, s.score);
      }
      result.mean_score.push_back(static_cast<double>(sum) / static_cast<double>(states.size()));
      result.max_score.push_back(best);
    }
    if (ev.crossover) {
      result.discovery_time = result.steps_run;
      break;
    }
  }
  result.censored = !result.discovery_time.has_value();
  result.final_scores.reserve(states.size());
  for (const AgentState& s : states) result.final_scores.push_back(s.score);
  return result;
}

}  // namespace potions
