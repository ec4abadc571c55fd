#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace blockpath {

struct BlockType {
  std::string id;

  auto operator<=>(const BlockType&) const = default;
};

inline const BlockType kAir{"air"};

// Known block ids. `air` is always present.
class BlockRegistry {
 public:
  BlockRegistry();
  BlockRegistry(std::initializer_list<std::string_view> ids);

  // air, dirt, grass, ice, sand, soul_sand, stone, water
  static BlockRegistry defaults();

  void add(std::string_view id);
  bool contains(std::string_view id) const;
  // Returns the block or throws RegistryError naming the id.
  BlockType require(std::string_view id) const;
  const std::set<std::string, std::less<>>& ids() const { return ids_; }

 private:
  std::set<std::string, std::less<>> ids_;
};

// Half-open cell rectangle [x, x+width) × [z, z+depth).
struct Rect {
  int x = 0;
  int z = 0;
  int width = 0;
  int depth = 0;

  bool empty() const { return width <= 0 || depth <= 0; }
  bool contains(int cx, int cz) const {
    return cx >= x && cx < x + width && cz >= z && cz < z + depth;
  }
  bool contains(const Rect& other) const {
    return !other.empty() && other.x >= x && other.z >= z &&
           other.x + other.width <= x + width &&
           other.z + other.depth <= z + depth;
  }
  auto operator<=>(const Rect&) const = default;
};

// Immutable top-down view of a world region. Cell accessors take world
// coordinates.
class TerrainSnapshot {
 public:
  TerrainSnapshot(Rect bounds, std::vector<int> heights,
                  std::vector<BlockType> blocks, std::uint64_t revision,
                  std::uint64_t world_version = 0);

  const Rect& bounds() const { return bounds_; }
  std::uint64_t revision() const { return revision_; }
  // Mutation counter of the source world at capture time.
  std::uint64_t world_version() const { return world_version_; }

  bool contains(int x, int z) const { return bounds_.contains(x, z); }
  int height(int x, int z) const;
  const BlockType& block(int x, int z) const;

  bool operator==(const TerrainSnapshot&) const = default;

 private:
  std::size_t index(int x, int z) const;

  Rect bounds_;
  std::vector<int> heights_;
  std::vector<BlockType> blocks_;
  std::uint64_t revision_;
  std::uint64_t world_version_;
};

// Voxel world of width × depth columns. Each column is a bottom-up stack;
// the block at stack index i occupies height level i + 1. Columns never end
// in air and never become empty.
class WorldModel {
 public:
  static constexpr int kMaxHeight = 256;

  // Every column starts as `fill_height` copies of `fill`.
  WorldModel(int width, int depth, const BlockType& fill, int fill_height,
             BlockRegistry registry = BlockRegistry::defaults());

  int width() const { return width_; }
  int depth() const { return depth_; }
  Rect extent() const { return Rect{0, 0, width_, depth_}; }
  const BlockRegistry& registry() const { return registry_; }

  const std::vector<BlockType>& column(int x, int z) const;
  void set_column(int x, int z, std::vector<BlockType> stack);

  int surface_height(int x, int z) const;
  const BlockType& surface_block(int x, int z) const;

  // Places or replaces the block at level y (1-based). Placing above the
  // surface pads the gap with air; placing air at the surface lowers it to
  // the next solid block.
  void set_block(int x, int z, int y, const BlockType& block);

  // Captures the surface over `bounds`; bumps the capture revision.
  TerrainSnapshot scan_surface(const Rect& bounds);
  TerrainSnapshot scan_surface() { return scan_surface(extent()); }

  // Incremented by every successful mutation.
  std::uint64_t version() const { return version_; }
  std::uint64_t last_revision() const { return revision_; }

  // Structural equality of the terrain only (ignores counters).
  bool same_terrain(const WorldModel& other) const {
    return width_ == other.width_ && depth_ == other.depth_ &&
           columns_ == other.columns_;
  }

 private:
  std::size_t index(int x, int z) const;
  void check_xz(int x, int z) const;

  int width_;
  int depth_;
  BlockRegistry registry_;
  std::vector<std::vector<BlockType>> columns_;
  std::uint64_t version_ = 0;
  std::uint64_t revision_ = 0;
};

WorldModel load_map(std::string_view document,
                    const BlockRegistry& registry = BlockRegistry::defaults());
std::string save_map(const WorldModel& world);

WorldModel load_map_file(const std::string& path,
                         const BlockRegistry& registry = BlockRegistry::defaults());
void save_map_file(const WorldModel& world, const std::string& path);

}  // namespace blockpath
