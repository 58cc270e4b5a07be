#pragma once

#include <set>
#include <utility>
#include <vector>

#include "auvfleet/types.hpp"

namespace auvfleet {

/// Range-limited communication topology over agent positions. Edges are
/// unordered pairs stored with i < j; the graph is immutable once built.
class ProximityGraph {
 public:
  ProximityGraph(int vertex_count, double comm_range,
                 std::set<std::pair<int, int>> edges);

  int vertex_count() const { return vertex_count_; }
  double comm_range() const { return comm_range_; }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }

  bool has_edge(int i, int j) const;

  /// Neighbour set N_i = { j | (i,j) in E }. Throws std::out_of_range when
  /// i is not a vertex.
  std::set<int> neighbors(int i) const;

  /// True iff every vertex is reachable from vertex 0 (single component).
  /// An empty graph is connected vacuously.
  bool is_connected() const;

 private:
  int vertex_count_;
  double comm_range_;
  std::set<std::pair<int, int>> edges_;
};

/// Edge (i,j) present iff ||p_i - p_j|| <= comm_range (inclusive).
ProximityGraph build_edges(const std::vector<Vec3>& positions, double comm_range);

}  // namespace auvfleet
