#include <algorithm>

#include "blockpath/error.hpp"
#include "blockpath/terrain.hpp"

namespace blockpath {

BlockRegistry::BlockRegistry() { ids_.insert(kAir.id); }

BlockRegistry::BlockRegistry(std::initializer_list<std::string_view> ids)
    : BlockRegistry() {
  for (auto id : ids) add(id);
}

BlockRegistry BlockRegistry::defaults() {
  return BlockRegistry{"dirt", "grass", "ice", "sand", "soul_sand", "stone",
                       "water"};
}

void BlockRegistry::add(std::string_view id) {
  if (id.empty()) throw ArgumentError("block id must be non-empty");
  ids_.emplace(id);
}

bool BlockRegistry::contains(std::string_view id) const {
  return ids_.find(id) != ids_.end();
}

BlockType BlockRegistry::require(std::string_view id) const {
  if (!contains(id)) {
    throw RegistryError("unknown block id '" + std::string(id) + "'");
  }
  return BlockType{std::string(id)};
}

TerrainSnapshot::TerrainSnapshot(Rect bounds, std::vector<int> heights,
                                 std::vector<BlockType> blocks,
                                 std::uint64_t revision,
                                 std::uint64_t world_version)
    : bounds_(bounds),
      heights_(std::move(heights)),
      blocks_(std::move(blocks)),
      revision_(revision),
      world_version_(world_version) {
  if (bounds_.empty()) throw ArgumentError("snapshot bounds are empty");
  const auto cells = static_cast<std::size_t>(bounds_.width) *
                     static_cast<std::size_t>(bounds_.depth);
  if (heights_.size() != cells || blocks_.size() != cells) {
    throw ArgumentError("snapshot arrays do not match bounds");
  }
  for (const auto& b : blocks_) {
    if (b == kAir) throw ArgumentError("air cannot be a surface block");
  }
}

std::size_t TerrainSnapshot::index(int x, int z) const {
  if (!bounds_.contains(x, z)) {
    throw BoundsError("cell (" + std::to_string(x) + "," + std::to_string(z) +
                      ") outside snapshot");
  }
  return static_cast<std::size_t>(z - bounds_.z) *
             static_cast<std::size_t>(bounds_.width) +
         static_cast<std::size_t>(x - bounds_.x);
}

int TerrainSnapshot::height(int x, int z) const { return heights_[index(x, z)]; }

const BlockType& TerrainSnapshot::block(int x, int z) const {
  return blocks_[index(x, z)];
}

WorldModel::WorldModel(int width, int depth, const BlockType& fill,
                       int fill_height, BlockRegistry registry)
    : width_(width), depth_(depth), registry_(std::move(registry)) {
  if (width <= 0 || depth <= 0) {
    throw ArgumentError("world dimensions must be positive");
  }
  if (fill == kAir) throw ArgumentError("fill block cannot be air");
  if (fill_height < 1 || fill_height > kMaxHeight) {
    throw BoundsError("fill height out of range");
  }
  registry_.require(fill.id);
  columns_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(depth),
                  std::vector<BlockType>(static_cast<std::size_t>(fill_height), fill));
}

void WorldModel::check_xz(int x, int z) const {
  if (x < 0 || z < 0 || x >= width_ || z >= depth_) {
    throw BoundsError("cell (" + std::to_string(x) + "," + std::to_string(z) +
                      ") outside " + std::to_string(width_) + "x" +
                      std::to_string(depth_) + " world");
  }
}

std::size_t WorldModel::index(int x, int z) const {
  check_xz(x, z);
  return static_cast<std::size_t>(z) * static_cast<std::size_t>(width_) +
         static_cast<std::size_t>(x);
}

const std::vector<BlockType>& WorldModel::column(int x, int z) const {
  return columns_[index(x, z)];
}

void WorldModel::set_column(int x, int z, std::vector<BlockType> stack) {
  auto& col = columns_[index(x, z)];
  while (!stack.empty() && stack.back() == kAir) stack.pop_back();
  if (stack.empty()) throw ConstraintError("column must contain a solid block");
  if (stack.size() > static_cast<std::size_t>(kMaxHeight)) {
    throw BoundsError("column exceeds max height");
  }
  for (const auto& b : stack) registry_.require(b.id);
  col = std::move(stack);
  ++version_;
}

int WorldModel::surface_height(int x, int z) const {
  return static_cast<int>(column(x, z).size());
}

const BlockType& WorldModel::surface_block(int x, int z) const {
  return column(x, z).back();
}

void WorldModel::set_block(int x, int z, int y, const BlockType& block) {
  auto& col = columns_[index(x, z)];
  if (y < 1 || y > kMaxHeight) {
    throw BoundsError("height level " + std::to_string(y) + " out of range");
  }
  registry_.require(block.id);
  const auto level = static_cast<std::size_t>(y);

  if (block == kAir) {
    if (level > col.size()) return;
    if (col.size() == 1) {
      throw ConstraintError("cannot remove the last block of a column");
    }
    col[level - 1] = kAir;
    while (col.back() == kAir) col.pop_back();
  } else if (level > col.size()) {
    col.resize(level - 1, kAir);
    col.push_back(block);
  } else {
    col[level - 1] = block;
  }
  ++version_;
}

TerrainSnapshot WorldModel::scan_surface(const Rect& bounds) {
  if (bounds.empty()) throw ArgumentError("scan bounds are empty");
  if (!extent().contains(bounds)) throw BoundsError("scan bounds exceed world");

  std::vector<int> heights;
  std::vector<BlockType> blocks;
  const auto cells = static_cast<std::size_t>(bounds.width) *
                     static_cast<std::size_t>(bounds.depth);
  heights.reserve(cells);
  blocks.reserve(cells);
  for (int z = bounds.z; z < bounds.z + bounds.depth; ++z) {
    for (int x = bounds.x; x < bounds.x + bounds.width; ++x) {
      heights.push_back(surface_height(x, z));
      blocks.push_back(surface_block(x, z));
    }
  }
  return TerrainSnapshot(bounds, std::move(heights), std::move(blocks),
                         ++revision_, version_);
}

}  // namespace blockpath
