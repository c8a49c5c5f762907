#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace potions {

enum class Trajectory { A, B, Crossover };

std::string_view to_string(Trajectory t);

using ItemIndex = std::uint8_t;
/// Bit i set <=> item i present. Tables are limited to 64 items.
using ItemMask = std::uint64_t;

inline constexpr std::size_t kMaxItems = 64;

inline constexpr ItemMask item_bit(ItemIndex i) { return ItemMask{1} << i; }

struct Item {
  std::string id;
  Trajectory trajectory = Trajectory::A;
  int tier = 0;  // 0 for starting items
  int score = 1;
};

struct Recipe {
  std::array<ItemIndex, 3> inputs{};
  ItemIndex product = 0;
};

/// Any valid triad that contains every item of `contains` yields `product`.
struct CrossoverRule {
  ItemMask contains = 0;
  ItemIndex product = 0;
};

class RecipeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RecipeTable {
 public:
  /// Validates: at most 64 items, unique ids, positive scores, at least one
  /// tier-0 item, distinct recipe inputs, no product is a tier-0 item, each
  /// product has a single producing recipe, and the crossover product is not
  /// also produced by a recipe.
  RecipeTable(std::vector<Item> items, std::vector<Recipe> recipes,
              std::optional<CrossoverRule> crossover);

  const std::vector<Item>& items() const { return items_; }
  const Item& item(ItemIndex i) const { return items_.at(i); }
  int score(ItemIndex i) const { return scores_[i]; }
  const std::vector<Recipe>& recipes() const { return recipes_; }
  const std::optional<CrossoverRule>& crossover() const { return crossover_; }

  std::optional<ItemIndex> index_of(std::string_view id) const;
  ItemIndex require(std::string_view id) const;

  /// Tier-0 items; every agent starts with exactly these.
  ItemMask initial_items() const { return initial_; }

  /// Product of a set of three distinct items, if any. A recipe match wins
  /// over the crossover rule.
  std::optional<ItemIndex> combine(ItemMask triad) const;

  bool is_crossover_item(ItemIndex i) const {
    return crossover_ && crossover_->product == i;
  }

 private:
  std::vector<Item> items_;
  std::vector<int> scores_;
  std::vector<Recipe> recipes_;
  std::optional<CrossoverRule> crossover_;
  std::unordered_map<ItemMask, ItemIndex> by_inputs_;
  ItemMask initial_ = 0;
};

/// Two parallel ladders plus a crossover:
///   {a1,a2,a3} -> a4 (48), {a2,a3,a4} -> a5 (109), {a3,a4,a5} -> a6 (188)
///   and the same for b; starting scores 6, 8, 10.
///   Any valid triad holding both a6 and b6 -> xfinal (358).
RecipeTable default_recipe_table();

/// Same items as the default table with no recipes and no crossover.
RecipeTable empty_recipe_table();

/// JSON layout:
///   {"items":[{"id":"a1","trajectory":"A","tier":0,"score":6},...],
///    "recipes":[{"inputs":["a1","a2","a3"],"product":"a4"},...],
///    "crossover":{"contains":["a6","b6"],"product":"xfinal","score":358}}
/// The crossover product may be omitted from "items"; it is then created from
/// the crossover block with trajectory Crossover.
RecipeTable parse_recipe_table(std::string_view json_text);
RecipeTable load_recipe_table(const std::string& path);
std::string recipe_table_to_json(const RecipeTable& table);

}  // namespace potions
