#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "blockpath/error.hpp"
#include "blockpath/graph.hpp"

namespace blockpath {

GridNode node_at(const TerrainSnapshot& snapshot, int x, int z) {
  return GridNode{x, z, snapshot.height(x, z)};
}

std::string_view to_string(HeuristicKind kind) {
  switch (kind) {
    case HeuristicKind::Octile: return "octile";
    case HeuristicKind::Euclidean: return "euclidean";
    case HeuristicKind::Zero: return "zero";
  }
  return "octile";
}

HeuristicKind parse_heuristic(std::string_view name) {
  if (name == "octile") return HeuristicKind::Octile;
  if (name == "euclidean") return HeuristicKind::Euclidean;
  if (name == "zero") return HeuristicKind::Zero;
  throw ArgumentError("unknown heuristic '" + std::string(name) + "'");
}

double heuristic_value(HeuristicKind kind, const GridNode& u, const GridNode& v,
                       const WeightTable& table) {
  const double dx = std::abs(u.x - v.x);
  const double dz = std::abs(u.z - v.z);
  const double c_min = table.min_finite_cost();
  switch (kind) {
    case HeuristicKind::Zero:
      return 0.0;
    case HeuristicKind::Euclidean:
      return c_min * std::sqrt(dx * dx + dz * dz);
    case HeuristicKind::Octile: {
      const double hi = std::max(dx, dz);
      const double lo = std::min(dx, dz);
      const double diag = table.diagonal_multiplier;
      // Outside [1, 2] the usual octile form would overestimate.
      if (diag < 1.0) return c_min * diag * hi;
      const double d = std::min(diag, 2.0);
      return c_min * (hi + (d - 1.0) * lo);
    }
  }
  return 0.0;
}

SearchRegion build_region(const GridNode& start, const GridNode& goal,
                          HeuristicKind kind, const WeightTable& table,
                          double multiplier) {
  if (multiplier <= 0) throw ArgumentError("region multiplier must be positive");
  SearchRegion region;
  region.start = start;
  region.goal = goal;
  region.center_x = (start.x + goal.x) / 2.0;
  region.center_z = (start.z + goal.z) / 2.0;
  region.radius = multiplier * heuristic_value(kind, start, goal, table);
  return region;
}

std::optional<double> edge_weight(const TerrainSnapshot& snapshot,
                                  const WeightTable& table, const GridNode& u,
                                  const GridNode& v) {
  const int dx = std::abs(u.x - v.x);
  const int dz = std::abs(u.z - v.z);
  if (dx > 1 || dz > 1 || (dx == 0 && dz == 0)) {
    throw ArgumentError("edge_weight requires 8-adjacent nodes");
  }
  const auto base = table.lookup(snapshot.block(u.x, u.z), snapshot.block(v.x, v.z));
  if (!base) return std::nullopt;

  const int rise = snapshot.height(v.x, v.z) - snapshot.height(u.x, u.z);
  if (std::abs(rise) > table.max_step_height) return std::nullopt;

  const bool diagonal = dx == 1 && dz == 1;
  double cost = *base * (diagonal ? table.diagonal_multiplier : 1.0);
  // Penalty is per block climbed or dropped, added after the diagonal factor.
  if (rise > 0) cost += table.step_up_penalty * rise;
  if (rise < 0) cost += table.step_down_penalty * -rise;
  return cost;
}

std::vector<Neighbor> neighbors(const TerrainSnapshot& snapshot,
                                const WeightTable& table,
                                const SearchRegion& region, const GridNode& u) {
  std::vector<Neighbor> out;
  out.reserve(8);
  for (const auto& [ox, oz] : kCompassOffsets) {
    const int x = u.x + ox;
    const int z = u.z + oz;
    if (!snapshot.contains(x, z) || !region.contains(x, z)) continue;
    const GridNode v{x, z, snapshot.height(x, z)};
    if (auto w = edge_weight(snapshot, table, u, v)) out.push_back({v, *w});
  }
  return out;
}

std::size_t region_size(const TerrainSnapshot& snapshot, const SearchRegion& region) {
  const auto& b = snapshot.bounds();
  std::size_t n = 0;
  for (int z = b.z; z < b.z + b.depth; ++z) {
    for (int x = b.x; x < b.x + b.width; ++x) {
      if (region.contains(x, z)) ++n;
    }
  }
  return n;
}

}  // namespace blockpath
