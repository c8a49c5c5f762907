#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "potions/abm.hpp"
#include "potions/sbm.hpp"

using namespace potions;

namespace {

Graph complete(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, e);
}

ItemMask mask_of(const RecipeTable& t, std::initializer_list<const char*> ids) {
  ItemMask m = 0;
  for (const char* id : ids) m |= item_bit(t.require(id));
  return m;
}

// Probability that one focal act on two fresh inventories yields exactly
// {a1,a2,a3}, enumerated over k and every ordered draw sequence.
double enumerate_a4_probability() {
  const std::array<double, 6> w{6, 8, 10, 6, 8, 10};  // a1 a2 a3 b1 b2 b3
  const double total = 48.0;
  double p = 0.0;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y)
      for (int z = 0; z < 6; ++z) {
        if (y == z) continue;
        const bool hit = x != y && x != z && x < 3 && y < 3 && z < 3;
        if (!hit) continue;
        // k = 1: single draw x, then an ordered pair (y, z); k = 2 mirrors it.
        const double single = w[x] / total;
        const double pair = w[y] / total * w[z] / (total - w[y]);
        p += 0.5 * single * pair + 0.5 * pair * single;
      }
  return p;
}

}  // namespace

TEST_CASE("default recipe table") {
  const RecipeTable t = default_recipe_table();
  const auto a4 = t.combine(mask_of(t, {"a1", "a2", "a3"}));
  REQUIRE(a4);
  CHECK(t.item(*a4).id == "a4");
  CHECK(t.score(*a4) == 48);
  const auto b6 = t.combine(mask_of(t, {"b3", "b4", "b5"}));
  REQUIRE(b6);
  CHECK(t.item(*b6).id == "b6");
  CHECK(t.score(*b6) == 188);
  for (const Recipe& r : t.recipes()) CHECK(t.item(r.product).tier > 0);
  CHECK(t.score(t.require("a5")) == 109);
  CHECK(t.score(t.require("xfinal")) == 358);
  CHECK(t.initial_items() == mask_of(t, {"a1", "a2", "a3", "b1", "b2", "b3"}));
  CHECK_FALSE(t.combine(mask_of(t, {"a1", "a2", "b3"})));
}

TEST_CASE("recipe table JSON round trip and validation") {
  const RecipeTable t = default_recipe_table();
  const RecipeTable u = parse_recipe_table(recipe_table_to_json(t));
  CHECK(u.items().size() == t.items().size());
  CHECK(u.recipes().size() == t.recipes().size());
  CHECK(u.combine(mask_of(u, {"a6", "b6", "a1"})) == u.require("xfinal"));

  CHECK_THROWS_AS(parse_recipe_table("{"), RecipeError);
  CHECK_THROWS_AS(parse_recipe_table(R"({"items":[{"id":"a1","tier":0,"score":6}],
      "recipes":[{"inputs":["a1","a1","a1"],"product":"a1"}]})"), RecipeError);
  CHECK_THROWS_AS(parse_recipe_table(R"({"items":[{"id":"a1","tier":0,"score":0}]})"),
                  RecipeError);
  CHECK_THROWS_AS(parse_recipe_table(R"({"items":[{"id":"a1","tier":1,"score":3}]})"),
                  RecipeError);
}

TEST_CASE("attempt_combination") {
  const RecipeTable t = default_recipe_table();
  auto ix = [&](const char* id) { return t.require(id); };
  const std::array<ItemIndex, 3> good{ix("a3"), ix("a1"), ix("a2")};
  CHECK(attempt_combination(good, t) == ix("a4"));
  const std::array<ItemIndex, 3> dup{ix("a1"), ix("a1"), ix("a2")};
  CHECK_FALSE(attempt_combination(dup, t));
  const std::array<ItemIndex, 3> cross{ix("a6"), ix("b6"), ix("a1")};
  const auto x = attempt_combination(cross, t);
  REQUIRE(x);
  CHECK(t.score(*x) == 358);
  CHECK(t.is_crossover_item(*x));
  const std::array<ItemIndex, 3> cross_dup{ix("a6"), ix("b6"), ix("b6")};
  CHECK_FALSE(attempt_combination(cross_dup, t));
}

TEST_CASE("init_population") {
  const RecipeTable t = default_recipe_table();
  const auto states = init_population(complete(5), t);
  for (const AgentState& s : states) {
    CHECK(std::popcount(s.inventory) == 6);
    CHECK(s.score == 10);
  }
  CHECK_THROWS_AS(init_population(Graph(1, {}), t), AbmError);
  CHECK_THROWS_AS(init_population(Graph(3, {{0, 1}}), t), AbmError);
}

TEST_CASE("select_partner") {
  Rng rng(8);
  const Graph pair(2, {{0, 1}});
  for (int i = 0; i < 100; ++i) CHECK(select_partner(pair, 0, rng) == 1);
  const Graph path(3, {{0, 1}, {1, 2}});
  for (int i = 0; i < 100; ++i) CHECK(select_partner(path, 2, rng) == 1);

  const Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  std::array<int, 5> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[select_partner(star, 0, rng)];
  CHECK(counts[0] == 0);
  double chi2 = 0.0;
  for (int leaf = 1; leaf <= 4; ++leaf) {
    const double e = draws / 4.0;
    chi2 += (counts[leaf] - e) * (counts[leaf] - e) / e;
  }
  CHECK(chi2 < 16.27);  // chi-square, 3 dof, 0.999 quantile
  CHECK_THROWS_AS(select_partner(Graph(2, {}), 0, rng), AbmError);
}

TEST_CASE("select_items probabilities") {
  const RecipeTable t = default_recipe_table();
  Rng rng(21);
  const ItemMask inv = t.initial_items();

  const int single = 200000;
  std::array<int, 64> first{};
  for (int i = 0; i < single; ++i) ++first[select_items(inv, 1, t, rng).items[0]];
  for (const char* id : {"a1", "a2", "a3", "b1", "b2", "b3"}) {
    const double p = t.score(t.require(id)) / 48.0;
    const double se = std::sqrt(p * (1 - p) / single);
    CHECK(std::abs(first[t.require(id)] / double(single) - p) < 4 * se);
  }

  const int pairs = 1000000;
  const ItemIndex a3 = t.require("a3"), b3 = t.require("b3");
  int hits = 0;
  for (int i = 0; i < pairs; ++i) {
    const ItemPick pk = select_items(inv, 2, t, rng);
    REQUIRE(pk.count == 2);
    REQUIRE(pk.items[0] != pk.items[1]);
    hits += (pk.items[0] == a3 && pk.items[1] == b3);
  }
  const double p = 10.0 / 48.0 * 10.0 / 38.0;
  CHECK(std::abs(hits / double(pairs) - p) < 3 * std::sqrt(p * (1 - p) / pairs));

  const ItemMask one = item_bit(a3);
  CHECK(select_items(one, 1, t, rng).items[0] == a3);
  CHECK_THROWS_AS(select_items(one, 2, t, rng), AbmError);
}

TEST_CASE("diffuse") {
  const RecipeTable t = default_recipe_table();
  const ItemIndex a4 = t.require("a4");

  const Graph k4 = complete(4);
  auto s = init_population(k4, t);
  CHECK(diffuse(a4, 0, 1, k4, s, t) == 4);
  for (const AgentState& st : s) {
    CHECK(st.holds(a4));
    CHECK(st.score == 48);
  }
  CHECK(diffuse(a4, 2, 3, k4, s, t) == 0);

  const Graph path(4, {{0, 1}, {1, 2}, {2, 3}});
  auto p = init_population(path, t);
  CHECK(diffuse(a4, 0, 1, path, p, t) == 3);
  CHECK(p[0].holds(a4));
  CHECK(p[1].holds(a4));
  CHECK(p[2].holds(a4));
  CHECK_FALSE(p[3].holds(a4));
  CHECK(p[3].score == 10);
}

TEST_CASE("step on two agents makes two attempts") {
  const RecipeTable t = default_recipe_table();
  const Graph pair(2, {{0, 1}});
  auto s = init_population(pair, t);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const StepEvents ev = step(pair, s, t, rng);
    if (ev.crossover) break;
    CHECK(ev.attempts == 2);
  }
}

TEST_CASE("empty table never changes anything") {
  const RecipeTable t = empty_recipe_table();
  const Graph g = complete(6);
  auto s = init_population(g, t);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const StepEvents ev = step(g, s, t, rng);
    CHECK(ev.innovations == 0);
  }
  for (const AgentState& st : s) {
    CHECK(st.inventory == t.initial_items());
    CHECK(st.score == 10);
  }
  SimConfig cfg;
  cfg.max_steps = 1;
  const SimResult r = run_simulation(g, cfg, t);
  CHECK(r.censored);
  CHECK(r.steps_run == 1);
  CHECK_FALSE(r.discovery_time);
  cfg.max_steps = 0;
  CHECK_THROWS_AS(run_simulation(g, cfg, t), AbmError);
}

TEST_CASE("first-act probability of {a1,a2,a3} matches enumeration") {
  // A table with only the first A recipe isolates the event. On two agents the
  // chance that a4 exists after one step is 1 - (1 - p)^2.
  const RecipeTable base = default_recipe_table();
  std::vector<Item> items;
  for (const char* id : {"a1", "a2", "a3", "b1", "b2", "b3", "a4"}) items.push_back(base.item(base.require(id)));
  const RecipeTable t(items, {Recipe{{0, 1, 2}, 6}}, std::nullopt);

  const double p = enumerate_a4_probability();
  const double expect = 1 - (1 - p) * (1 - p);
  const Graph pair(2, {{0, 1}});
  Rng rng(77);
  const int trials = 200000;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    auto s = init_population(pair, t);
    step(pair, s, t, rng);
    hits += s[0].holds(6);
  }
  CHECK(std::abs(hits / double(trials) - expect) < 4 * std::sqrt(expect * (1 - expect) / trials));
}

TEST_CASE("simulation invariants on random SBM graphs") {
  const RecipeTable t = default_recipe_table();
  const ItemIndex x = t.require("xfinal");
  Rng graph_rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g =
        sample_sbm_connected({6, {0.8, 0.2, 0.2}}, graph_rng, 100000).graph;
    auto s = init_population(g, t);
    Rng rng(trial);
    for (int st = 0; st < 3000; ++st) {
      const auto before = s;
      const StepEvents ev = step(g, s, t, rng);
      bool any_x = false;
      for (std::size_t i = 0; i < s.size(); ++i) {
        REQUIRE((s[i].inventory & before[i].inventory) == before[i].inventory);
        REQUIRE((s[i].inventory & t.initial_items()) == t.initial_items());
        int best = 0;
        for (ItemIndex j = 0; j < t.items().size(); ++j)
          if (s[i].holds(j)) best = std::max(best, t.score(j));
        REQUIRE(s[i].score == best);
        REQUIRE(s[i].score >= before[i].score);
        any_x |= s[i].holds(x);
      }
      REQUIRE(any_x == ev.crossover);
      for (const char* line : {"a", "b"}) {
        for (int tier = 5; tier <= 6; ++tier) {
          const ItemIndex hi = t.require(line + std::to_string(tier));
          const ItemIndex lo = t.require(line + std::to_string(tier - 1));
          bool has_hi = false, has_lo = false;
          for (const AgentState& a : s) {
            has_hi |= a.holds(hi);
            has_lo |= a.holds(lo);
          }
          REQUIRE((!has_hi || has_lo));
        }
      }
      if (ev.crossover) break;
    }
  }
}

TEST_CASE("every neighbor of a producing dyad holds the product") {
  // With a single recipe the only new holdings come from that recipe.
  const RecipeTable t = default_recipe_table();
  Rng graph_rng(5);
  const Graph g = sample_sbm_connected({8, {0.5, 0.1, 0.3}}, graph_rng, 100000).graph;
  const ItemIndex a4 = t.require("a4");
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      auto s = init_population(g, t);
      diffuse(a4, u, v, g, s, t);
      for (NodeId w : g.neighbors(u)) REQUIRE(s[w].holds(a4));
      for (NodeId w : g.neighbors(v)) REQUIRE(s[w].holds(a4));
    }
  }
}

TEST_CASE("run_simulation is deterministic") {
  const RecipeTable t = default_recipe_table();
  Rng graph_rng(2);
  const Graph g = sample_sbm_connected({12, {0.75, 0.05, 0.15}}, graph_rng, 1000000).graph;
  SimConfig cfg;
  cfg.seed = 12345;
  cfg.max_steps = std::nullopt;
  cfg.record_trajectory = true;
  const SimResult a = run_simulation(g, cfg, t);
  const SimResult b = run_simulation(g, cfg, t);
  CHECK(a == b);
  REQUIRE(a.discovery_time);
  CHECK(*a.discovery_time == a.steps_run);
  CHECK(a.mean_score.size() == a.steps_run);
  CHECK(a.max_score.back() == 358);
}

TEST_CASE("mean discovery time on K24 is reproducible across seed sets") {
  const RecipeTable t = default_recipe_table();
  const Graph g = complete(24);
  auto batch = [&](std::uint64_t offset) {
    double sum = 0.0, sq = 0.0;
    const int runs = 500;
    for (int i = 0; i < runs; ++i) {
      SimConfig cfg;
      cfg.seed = offset + i;
      cfg.max_steps = std::nullopt;
      const SimResult r = run_simulation(g, cfg, t);
      REQUIRE(r.discovery_time);
      const double d = static_cast<double>(*r.discovery_time);
      sum += d;
      sq += d * d;
    }
    const double mean = sum / runs;
    return std::pair{mean, std::sqrt((sq / runs - mean * mean) / runs)};
  };
  const auto [m1, se1] = batch(0);
  const auto [m2, se2] = batch(1'000'000);
  CHECK(std::isfinite(m1));
  CHECK(batch(0).first == m1);
  CHECK(std::abs(m1 - m2) < 2 * std::sqrt(se1 * se1 + se2 * se2));
}
