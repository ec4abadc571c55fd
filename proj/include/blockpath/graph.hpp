#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blockpath/terrain.hpp"

namespace blockpath {

// Traversal costs between surface blocks. Pair lookups are directional:
// (from, to) and (to, from) are independent entries.
class WeightTable {
 public:
  // std::nullopt marks an impassable transition.
  using PairCost = std::optional<double>;

  double default_cost = 1.0;
  double step_up_penalty = 0.5;
  double step_down_penalty = 0.5;
  double diagonal_multiplier = std::sqrt(2.0);
  int max_step_height = 1;

  // Symmetric table: dirt/dirt 1.0, anything to or from water 4.0,
  // soul sand 4.0, ice 1.5, everything else default_cost.
  static WeightTable defaults();

  void set_cost(std::string_view from, std::string_view to, double cost);
  void set_impassable(std::string_view from, std::string_view to);
  // Unlisted pairs fall back to default_cost.
  PairCost lookup(const BlockType& from, const BlockType& to) const;

  // Smallest finite cost among default_cost and all listed pairs.
  double min_finite_cost() const;

  // Throws ConfigError if any invariant is broken.
  void validate() const;

  const std::map<std::pair<std::string, std::string>, PairCost>& pairs() const {
    return pairs_;
  }

  bool operator==(const WeightTable&) const = default;

 private:
  std::map<std::pair<std::string, std::string>, PairCost> pairs_;
};

WeightTable load_weights(std::string_view document,
                         const BlockRegistry& registry = BlockRegistry::defaults());
std::string save_weights(const WeightTable& table);
WeightTable load_weights_file(const std::string& path,
                              const BlockRegistry& registry = BlockRegistry::defaults());

struct Cell {
  int x = 0;
  int z = 0;
  auto operator<=>(const Cell&) const = default;
};

struct GridNode {
  int x = 0;
  int z = 0;
  int height = 0;

  Cell cell() const { return Cell{x, z}; }
  auto operator<=>(const GridNode&) const = default;
};

// Reads the node at (x, z) from the snapshot; BoundsError if outside.
GridNode node_at(const TerrainSnapshot& snapshot, int x, int z);

enum class HeuristicKind { Octile, Euclidean, Zero };

std::string_view to_string(HeuristicKind kind);
HeuristicKind parse_heuristic(std::string_view name);

double heuristic_value(HeuristicKind kind, const GridNode& u, const GridNode& v,
                       const WeightTable& table);

inline constexpr double kRegionMultiplier = 1.30;

// Disc of admissible cells centred on the start/goal midpoint.
struct SearchRegion {
  GridNode start;
  GridNode goal;
  double radius = 0;
  double center_x = 0;
  double center_z = 0;

  bool contains(int x, int z) const {
    const double dx = x - center_x;
    const double dz = z - center_z;
    return dx * dx + dz * dz <= radius * radius;
  }
  bool contains(const GridNode& n) const { return contains(n.x, n.z); }
  double distance_to_center(int x, int z) const {
    return std::hypot(x - center_x, z - center_z);
  }
};

SearchRegion build_region(const GridNode& start, const GridNode& goal,
                          HeuristicKind kind, const WeightTable& table,
                          double multiplier = kRegionMultiplier);

// Cost of moving u -> v, or nullopt when the move is not allowed
// (impassable pair or too tall a step). ArgumentError unless 8-adjacent.
std::optional<double> edge_weight(const TerrainSnapshot& snapshot,
                                  const WeightTable& table, const GridNode& u,
                                  const GridNode& v);

struct Neighbor {
  GridNode node;
  double cost = 0;
  bool operator==(const Neighbor&) const = default;
};

// Compass order used everywhere a neighbor sweep happens. N is -z.
inline constexpr std::array<std::pair<int, int>, 8> kCompassOffsets = {{
    {0, -1},   // N
    {1, -1},   // NE
    {1, 0},    // E
    {1, 1},    // SE
    {0, 1},    // S
    {-1, 1},   // SW
    {-1, 0},   // W
    {-1, -1},  // NW
}};

std::vector<Neighbor> neighbors(const TerrainSnapshot& snapshot,
                                const WeightTable& table,
                                const SearchRegion& region, const GridNode& u);

// Number of snapshot cells inside the region.
std::size_t region_size(const TerrainSnapshot& snapshot, const SearchRegion& region);

}  // namespace blockpath
