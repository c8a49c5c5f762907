#include "potions/recipes.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace potions {

using nlohmann::json;

std::string_view to_string(Trajectory t) {
  switch (t) {
    case Trajectory::A: return "A";
    case Trajectory::B: return "B";
    case Trajectory::Crossover: return "Crossover";
  }
  return "?";
}

namespace {

Trajectory parse_trajectory(const std::string& s) {
  if (s == "A") return Trajectory::A;
  if (s == "B") return Trajectory::B;
  if (s == "Crossover" || s == "X") return Trajectory::Crossover;
  throw RecipeError("unknown trajectory '" + s + "'");
}

}  // namespace

RecipeTable::RecipeTable(std::vector<Item> items, std::vector<Recipe> recipes,
                         std::optional<CrossoverRule> crossover)
    : items_(std::move(items)), recipes_(std::move(recipes)), crossover_(crossover) {
  if (items_.empty()) throw RecipeError("recipe table has no items");
  if (items_.size() > kMaxItems) {
    throw RecipeError("recipe table supports at most 64 items, got " +
                      std::to_string(items_.size()));
  }
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Item& it = items_[i];
    if (!ids.insert(it.id).second) throw RecipeError("duplicate item id '" + it.id + "'");
    if (it.score <= 0) throw RecipeError("item '" + it.id + "' needs a positive score");
    if (it.tier < 0) throw RecipeError("item '" + it.id + "' has a negative tier");
    scores_.push_back(it.score);
    if (it.tier == 0) initial_ |= item_bit(static_cast<ItemIndex>(i));
  }
  if (initial_ == 0) throw RecipeError("recipe table has no tier-0 items");

  auto check_index = [&](ItemIndex i) {
    if (i >= items_.size()) throw RecipeError("recipe refers to unknown item index");
  };
  std::vector<int> produced(items_.size(), 0);
  for (const Recipe& r : recipes_) {
    ItemMask mask = 0;
    for (ItemIndex in : r.inputs) {
      check_index(in);
      mask |= item_bit(in);
    }
    check_index(r.product);
    if (std::popcount(mask) != 3) {
      throw RecipeError("recipe for '" + items_[r.product].id + "' repeats an input");
    }
    if (initial_ & item_bit(r.product)) {
      throw RecipeError("recipe produces starting item '" + items_[r.product].id + "'");
    }
    if (++produced[r.product] > 1) {
      throw RecipeError("item '" + items_[r.product].id + "' has more than one recipe");
    }
    if (!by_inputs_.emplace(mask, r.product).second) {
      throw RecipeError("two recipes share the same inputs");
    }
  }
  if (crossover_) {
    check_index(crossover_->product);
    if (crossover_->contains == 0 || std::popcount(crossover_->contains) > 3) {
      throw RecipeError("crossover rule must name between one and three items");
    }
    if (crossover_->contains >> items_.size()) {
      throw RecipeError("crossover rule refers to unknown item");
    }
    if (initial_ & item_bit(crossover_->product)) {
      throw RecipeError("crossover product cannot be a starting item");
    }
    if (produced[crossover_->product]) {
      throw RecipeError("crossover product is also produced by a recipe");
    }
  }
}

std::optional<ItemIndex> RecipeTable::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].id == id) return static_cast<ItemIndex>(i);
  }
  return std::nullopt;
}

ItemIndex RecipeTable::require(std::string_view id) const {
  if (auto i = index_of(id)) return *i;
  throw RecipeError("unknown item '" + std::string(id) + "'");
}

std::optional<ItemIndex> RecipeTable::combine(ItemMask triad) const {
  if (std::popcount(triad) != 3) return std::nullopt;
  if (auto it = by_inputs_.find(triad); it != by_inputs_.end()) return it->second;
  if (crossover_ && (triad & crossover_->contains) == crossover_->contains) {
    return crossover_->product;
  }
  return std::nullopt;
}

namespace {

std::vector<Item> ladder_items() {
  std::vector<Item> items;
  const int scores[] = {6, 8, 10, 48, 109, 188};
  for (auto [prefix, traj] : {std::pair{'a', Trajectory::A}, std::pair{'b', Trajectory::B}}) {
    for (int k = 0; k < 6; ++k) {
      items.push_back(Item{std::string(1, prefix) + std::to_string(k + 1), traj,
                           k < 3 ? 0 : k - 2, scores[k]});
    }
  }
  items.push_back(Item{"xfinal", Trajectory::Crossover, 4, 358});
  return items;
}

}  // namespace

RecipeTable default_recipe_table() {
  // a1..a6 -> 0..5, b1..b6 -> 6..11, xfinal -> 12
  std::vector<Recipe> recipes;
  for (ItemIndex base : {ItemIndex{0}, ItemIndex{6}}) {
    for (ItemIndex tier = 0; tier < 3; ++tier) {
      recipes.push_back(Recipe{{static_cast<ItemIndex>(base + tier),
                                static_cast<ItemIndex>(base + tier + 1),
                                static_cast<ItemIndex>(base + tier + 2)},
                               static_cast<ItemIndex>(base + tier + 3)});
    }
  }
  return RecipeTable(ladder_items(), std::move(recipes),
                     CrossoverRule{item_bit(5) | item_bit(11), 12});
}

RecipeTable empty_recipe_table() { return RecipeTable(ladder_items(), {}, std::nullopt); }

RecipeTable parse_recipe_table(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw RecipeError(std::string("recipe table is not valid JSON: ") + e.what());
  }
  try {
    std::vector<Item> items;
    for (const auto& j : doc.at("items")) {
      items.push_back(Item{j.at("id").get<std::string>(),
                           parse_trajectory(j.at("trajectory").get<std::string>()),
                           j.at("tier").get<int>(), j.at("score").get<int>()});
    }
    auto lookup = [&](const std::string& id) -> ItemIndex {
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].id == id) return static_cast<ItemIndex>(i);
      }
      throw RecipeError("unknown item '" + id + "'");
    };

    std::optional<CrossoverRule> crossover;
    if (doc.contains("crossover") && !doc["crossover"].is_null()) {
      const auto& x = doc["crossover"];
      const auto product = x.at("product").get<std::string>();
      bool known = std::any_of(items.begin(), items.end(),
                               [&](const Item& it) { return it.id == product; });
      if (!known) {
        int tier = 0;
        for (const Item& it : items) tier = std::max(tier, it.tier + 1);
        items.push_back(Item{product, Trajectory::Crossover, tier, x.at("score").get<int>()});
      }
      CrossoverRule rule;
      for (const auto& id : x.at("contains")) rule.contains |= item_bit(lookup(id.get<std::string>()));
      rule.product = lookup(product);
      crossover = rule;
    }

    std::vector<Recipe> recipes;
    for (const auto& j : doc.value("recipes", json::array())) {
      const auto& inputs = j.at("inputs");
      if (inputs.size() != 3) throw RecipeError("each recipe needs exactly three inputs");
      Recipe r;
      for (std::size_t k = 0; k < 3; ++k) r.inputs[k] = lookup(inputs[k].get<std::string>());
      r.product = lookup(j.at("product").get<std::string>());
      recipes.push_back(r);
    }
    return RecipeTable(std::move(items), std::move(recipes), crossover);
  } catch (const json::exception& e) {
    throw RecipeError(std::string("malformed recipe table: ") + e.what());
  }
}

RecipeTable load_recipe_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RecipeError("cannot open recipe table " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_recipe_table(buf.str());
}

std::string recipe_table_to_json(const RecipeTable& table) {
  json doc;
  doc["items"] = json::array();
  for (const Item& it : table.items()) {
    doc["items"].push_back({{"id", it.id},
                            {"trajectory", std::string(to_string(it.trajectory))},
                            {"tier", it.tier},
                            {"score", it.score}});
  }
  doc["recipes"] = json::array();
  for (const Recipe& r : table.recipes()) {
    doc["recipes"].push_back({{"inputs",
                               {table.item(r.inputs[0]).id, table.item(r.inputs[1]).id,
                                table.item(r.inputs[2]).id}},
                              {"product", table.item(r.product).id}});
  }
  if (const auto& x = table.crossover()) {
    json contains = json::array();
    for (std::size_t i = 0; i < table.items().size(); ++i) {
      if (x->contains & item_bit(static_cast<ItemIndex>(i))) contains.push_back(table.items()[i].id);
    }
    doc["crossover"] = {{"contains", contains},
                        {"product", table.item(x->product).id},
                        {"score", table.score(x->product)}};
  }
  return doc.dump(2);
}

}  // namespace potions
