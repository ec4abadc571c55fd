#include <cmath>
#include <random>

#include "blockpath/error.hpp"
#include "blockpath/graph.hpp"
#include "doctest.h"
#include "support/grid_oracle.hpp"
#include "support/random_maps.hpp"

using namespace blockpath;

namespace {

TerrainSnapshot flat(int w, int d, const std::string& block = "dirt", int h = 1) {
  return TerrainSnapshot(Rect{0, 0, w, d}, std::vector<int>(w * d, h),
                         std::vector<BlockType>(w * d, BlockType{block}), 1);
}

TerrainSnapshot two_cells(const std::string& a, int ha, const std::string& b, int hb) {
  return TerrainSnapshot(Rect{0, 0, 2, 1}, {ha, hb}, {BlockType{a}, BlockType{b}}, 1);
}

SearchRegion everything(const TerrainSnapshot& s) {
  SearchRegion r;
  r.radius = 1e9;
  r.center_x = s.bounds().width / 2.0;
  r.center_z = s.bounds().depth / 2.0;
  return r;
}

}  // namespace

TEST_CASE("edge_weight: reference values") {
  auto table = WeightTable::defaults();

  auto s = two_cells("dirt", 1, "dirt", 1);
  CHECK(*edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 0)) == 1.0);

  s = two_cells("dirt", 1, "water", 1);
  CHECK(*edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 0)) == 4.0);

  table.step_up_penalty = 0.5;
  s = two_cells("dirt", 1, "dirt", 2);
  CHECK(*edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 0)) == 1.5);

  table.max_step_height = 1;
  s = two_cells("dirt", 1, "dirt", 3);
  CHECK_FALSE(edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 0)).has_value());
  CHECK_FALSE(edge_weight(s, table, node_at(s, 1, 0), node_at(s, 0, 0)).has_value());

  auto big = flat(3, 3);
  CHECK_THROWS_AS(edge_weight(big, table, node_at(big, 0, 0), node_at(big, 2, 0)),
                  ArgumentError);
  CHECK_THROWS_AS(edge_weight(big, table, node_at(big, 1, 1), node_at(big, 1, 1)),
                  ArgumentError);
}

TEST_CASE("edge_weight: diagonal factor precedes the elevation penalty") {
  WeightTable table;
  table.step_up_penalty = 0.25;
  table.step_down_penalty = 0.75;
  TerrainSnapshot s(Rect{0, 0, 2, 2}, {1, 1, 1, 2},
                    std::vector<BlockType>(4, BlockType{"dirt"}), 1);
  CHECK(*edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 1)) ==
        std::sqrt(2.0) + 0.25);
  CHECK(*edge_weight(s, table, node_at(s, 1, 1), node_at(s, 0, 0)) ==
        std::sqrt(2.0) + 0.75);
}

TEST_CASE("edge_weight: table directionality is never symmetrized") {
  WeightTable table;
  table.set_cost("dirt", "sand", 2.0);
  table.set_cost("sand", "dirt", 3.0);
  table.set_impassable("sand", "stone");
  auto s = two_cells("dirt", 1, "sand", 1);
  CHECK(*edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 0)) == 2.0);
  CHECK(*edge_weight(s, table, node_at(s, 1, 0), node_at(s, 0, 0)) == 3.0);
  s = two_cells("sand", 1, "stone", 1);
  CHECK_FALSE(edge_weight(s, table, node_at(s, 0, 0), node_at(s, 1, 0)).has_value());
  CHECK(*edge_weight(s, table, node_at(s, 1, 0), node_at(s, 0, 0)) == 1.0);
}

TEST_CASE("neighbors: compass order, boundary and region clipping") {
  auto s = flat(5, 5);
  WeightTable table;
  const double diag = table.diagonal_multiplier;

  auto n = neighbors(s, table, everything(s), node_at(s, 2, 2));
  REQUIRE(n.size() == 8);
  const Cell order[8] = {{2, 1}, {3, 1}, {3, 2}, {3, 3}, {2, 3}, {1, 3}, {1, 2}, {1, 1}};
  for (int i = 0; i < 8; ++i) {
    CHECK(n[i].node.cell() == order[i]);
    CHECK(n[i].cost == (i % 2 ? 1.0 * diag : 1.0));
  }

  auto corner = neighbors(s, table, everything(s), node_at(s, 0, 0));
  REQUIRE(corner.size() == 3);
  CHECK(corner[0].node.cell() == Cell{1, 0});
  CHECK(corner[1].node.cell() == Cell{1, 1});
  CHECK(corner[2].node.cell() == Cell{0, 1});

  SearchRegion tight;
  tight.center_x = 2;
  tight.center_z = 2;
  tight.radius = 1.0;  // excludes diagonals at distance sqrt(2)
  auto clipped = neighbors(s, table, tight, node_at(s, 2, 2));
  CHECK(clipped.size() == 4);
  for (const auto& nb : clipped) CHECK(tight.contains(nb.node));
}

TEST_CASE("build_region") {
  WeightTable table;
  auto s = flat(20, 20);

  auto degenerate = build_region(node_at(s, 3, 4), node_at(s, 3, 4),
                                 HeuristicKind::Octile, table);
  CHECK(degenerate.radius == 0.0);
  CHECK(degenerate.contains(3, 4));
  CHECK_FALSE(degenerate.contains(3, 5));
  CHECK(region_size(s, degenerate) == 1);

  auto r = build_region(node_at(s, 0, 0), node_at(s, 10, 0), HeuristicKind::Octile, table);
  CHECK(r.radius == doctest::Approx(13.0).epsilon(1e-15));
  CHECK(r.center_x == 5.0);
  CHECK(r.center_z == 0.0);
  CHECK(r.contains(5, 12));
  // Distance exactly equals the radius: membership is inclusive.
  CHECK(r.distance_to_center(5, 13) == 13.0);
  CHECK(r.contains(5, 13));
  CHECK_FALSE(r.contains(5, 14));
  CHECK(r.contains(r.start));
  CHECK(r.contains(r.goal));
}

TEST_CASE("property: enlarging the multiplier never removes a member") {
  WeightTable table;
  std::mt19937_64 rng(3);
  auto s = flat(24, 24);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = node_at(s, testing::uniform_int(rng, 0, 23), testing::uniform_int(rng, 0, 23));
    auto b = node_at(s, testing::uniform_int(rng, 0, 23), testing::uniform_int(rng, 0, 23));
    auto base = build_region(a, b, HeuristicKind::Octile, table);
    auto wide = build_region(a, b, HeuristicKind::Octile, table, 1.30 + 0.5 * (trial % 4 + 1));
    for (int z = 0; z < 24; ++z) {
      for (int x = 0; x < 24; ++x) {
        if (base.contains(x, z)) CHECK(wide.contains(x, z));
      }
    }
  }
}

TEST_CASE("heuristic_value") {
  WeightTable table;
  GridNode a{2, 2, 1};
  for (auto k : {HeuristicKind::Octile, HeuristicKind::Euclidean, HeuristicKind::Zero}) {
    CHECK(heuristic_value(k, a, a, table) == 0.0);
  }

  GridNode u{0, 0, 1}, v{3, 4, 1};
  const double expected = 4.0 + (std::sqrt(2.0) - 1.0) * 3.0;
  CHECK(heuristic_value(HeuristicKind::Octile, u, v, table) == expected);
  CHECK(expected == doctest::Approx(5.2426).epsilon(1e-4));
  CHECK(heuristic_value(HeuristicKind::Euclidean, u, v, table) == 5.0);
  CHECK(heuristic_value(HeuristicKind::Zero, u, v, table) == 0.0);

  // On an empty uniform grid the octile value is the true shortest cost.
  auto s = flat(6, 6);
  const double brute = testing::reference_shortest(s, table, 0, 0, 3, 4,
                                                   testing::everywhere());
  CHECK(brute == doctest::Approx(expected).epsilon(1e-12));

  WeightTable scaled;
  scaled.default_cost = 2.0;
  scaled.set_cost("ice", "ice", 0.5);
  CHECK(heuristic_value(HeuristicKind::Octile, u, v, scaled) == 0.5 * expected);

  CHECK(parse_heuristic("euclidean") == HeuristicKind::Euclidean);
  CHECK_THROWS_AS(parse_heuristic("manhattan"), ArgumentError);
}

TEST_CASE("property: octile heuristic is admissible on random maps") {
  std::mt19937_64 rng(19);
  auto table = WeightTable::defaults();
  for (int trial = 0; trial < 200; ++trial) {
    const int w = testing::uniform_int(rng, 2, 8), d = testing::uniform_int(rng, 2, 8);
    auto world = testing::random_world(rng, w, d, testing::kFourBlocks, 2);
    auto s = world.scan_surface();
    const int sx = testing::uniform_int(rng, 0, w - 1), sz = testing::uniform_int(rng, 0, d - 1);
    const int gx = testing::uniform_int(rng, 0, w - 1), gz = testing::uniform_int(rng, 0, d - 1);
    const double truth = testing::reference_shortest(s, table, sx, sz, gx, gz,
                                                     testing::everywhere());
    const double h = heuristic_value(HeuristicKind::Octile, node_at(s, sx, sz),
                                     node_at(s, gx, gz), table);
    CHECK(h <= truth);
    const double he = heuristic_value(HeuristicKind::Euclidean, node_at(s, sx, sz),
                                      node_at(s, gx, gz), table);
    CHECK(he <= h + 1e-12);
  }
}

TEST_CASE("property: octile heuristic is consistent on uniform maps") {
  WeightTable table;
  table.step_up_penalty = 0;
  table.step_down_penalty = 0;
  auto s = flat(9, 9);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto goal = node_at(s, testing::uniform_int(rng, 0, 8), testing::uniform_int(rng, 0, 8));
    for (int z = 0; z < 9; ++z) {
      for (int x = 0; x < 9; ++x) {
        auto u = node_at(s, x, z);
        for (const auto& nb : neighbors(s, table, everything(s), u)) {
          const double hu = heuristic_value(HeuristicKind::Octile, u, goal, table);
          const double hv = heuristic_value(HeuristicKind::Octile, nb.node, goal, table);
          CHECK(std::abs(hu - hv) <= nb.cost + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("weight table documents") {
  const char* doc =
      "# classroom table\n"
      "default_cost 1\n"
      "step_up_penalty 0.5\n"
      "diagonal_multiplier 1.5\n"
      "pair dirt water 4\n"
      "pair water dirt impassable\n";
  auto t = load_weights(doc);
  CHECK(t.default_cost == 1.0);
  CHECK(t.step_down_penalty == 0.5);
  CHECK(t.diagonal_multiplier == 1.5);
  CHECK(*t.lookup({"dirt"}, {"water"}) == 4.0);
  CHECK_FALSE(t.lookup({"water"}, {"dirt"}).has_value());
  CHECK(*t.lookup({"stone"}, {"sand"}) == 1.0);

  auto canonical = save_weights(t);
  CHECK(save_weights(load_weights(canonical)) == canonical);
  CHECK(load_weights(canonical) == t);
  CHECK(load_weights(save_weights(WeightTable::defaults())) == WeightTable::defaults());

  CHECK_THROWS_AS(load_weights("pair dirt lava 2\n"), RegistryError);
  CHECK_THROWS_AS(load_weights("pair dirt water -1\n"), ParseError);
  CHECK_THROWS_AS(load_weights("diagonal_multiplier 0\n"), ConfigError);
  CHECK_THROWS_AS(load_weights("max_step_height -1\n"), ConfigError);
  CHECK_THROWS_AS(load_weights("speed 3\n"), ParseError);
  CHECK_THROWS_AS(load_weights("pair dirt water 2\npair dirt water 3\n"), ParseError);
}

TEST_CASE("default table carries the classroom reference costs") {
  auto t = WeightTable::defaults();
  CHECK(*t.lookup({"dirt"}, {"dirt"}) == 1.0);
  CHECK(*t.lookup({"dirt"}, {"water"}) == 4.0);
  CHECK(*t.lookup({"water"}, {"dirt"}) == 4.0);
  CHECK(*t.lookup({"grass"}, {"soul_sand"}) == 4.0);
  CHECK(t.min_finite_cost() == 1.0);
  CHECK(t.max_step_height == 1);
  t.validate();
}
