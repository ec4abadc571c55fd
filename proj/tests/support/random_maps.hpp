#pragma once

// Seeded generators shared by unit and acceptance tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "blockpath/terrain.hpp"

namespace blockpath::testing {

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Four-block palette used by the random-map properties.
inline const std::vector<std::string> kFourBlocks = {"dirt", "water", "stone",
                                                     "soul_sand"};

// World whose columns are uniform stacks of a random block with surface
// height base + [0, max_extra].
inline WorldModel random_world(std::mt19937_64& rng, int width, int depth,
                               const std::vector<std::string>& blocks,
                               int max_extra, int base = 1) {
  WorldModel world(width, depth, BlockType{blocks.front()}, base);
  for (int z = 0; z < depth; ++z) {
    for (int x = 0; x < width; ++x) {
      const auto& id = blocks[static_cast<std::size_t>(
          uniform_int(rng, 0, static_cast<int>(blocks.size()) - 1))];
      const int h = base + uniform_int(rng, 0, max_extra);
      world.set_column(x, z, std::vector<BlockType>(static_cast<std::size_t>(h),
                                                    BlockType{id}));
    }
  }
  return world;
}

// Mixed stacks with interior air, for format round-trips.
inline WorldModel random_layered_world(std::mt19937_64& rng, int width, int depth) {
  static const std::vector<std::string> ids = {"air", "dirt", "stone", "water",
                                               "ice", "sand"};
  WorldModel world(width, depth, BlockType{"stone"}, 1);
  for (int z = 0; z < depth; ++z) {
    for (int x = 0; x < width; ++x) {
      std::vector<BlockType> stack;
      const int h = uniform_int(rng, 1, 5);
      for (int i = 0; i < h; ++i) {
        stack.push_back(BlockType{ids[static_cast<std::size_t>(uniform_int(rng, 0, 5))]});
      }
      if (stack.back() == kAir) stack.back() = BlockType{"dirt"};
      world.set_column(x, z, std::move(stack));
    }
  }
  return world;
}

}  // namespace blockpath::testing
