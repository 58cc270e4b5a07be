#include "auvfleet/proximity_graph.hpp"

#include <queue>
#include <stdexcept>
#include <string>

#include "auvfleet/errors.hpp"

namespace auvfleet {

ProximityGraph::ProximityGraph(int vertex_count, double comm_range,
                               std::set<std::pair<int, int>> edges)
    : vertex_count_(vertex_count), comm_range_(comm_range), edges_(std::move(edges)) {
  if (vertex_count_ < 0) throw DimensionError("vertex count must be nonnegative");
  for (const auto& [i, j] : edges_) {
    if (i == j) throw DimensionError("self-loop in proximity graph");
    if (i < 0 || j < 0 || i >= vertex_count_ || j >= vertex_count_ || i >= j)
      throw DimensionError("edge endpoints must satisfy 0 <= i < j < n");
  }
}

bool ProximityGraph::has_edge(int i, int j) const {
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return edges_.count({i, j}) > 0;
}

std::set<int> ProximityGraph::neighbors(int i) const {
  if (i < 0 || i >= vertex_count_)
    throw std::out_of_range("vertex index " + std::to_string(i) + " out of range (n=" +
                            std::to_string(vertex_count_) + ")");
  std::set<int> out;
  for (const auto& [a, b] : edges_) {
    if (a == i) out.insert(b);
    if (b == i) out.insert(a);
  }
  return out;
}

bool ProximityGraph::is_connected() const {
  if (vertex_count_ <= 1) return true;
  std::vector<bool> seen(vertex_count_, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int u : neighbors(v)) {
      if (!seen[u]) {
        seen[u] = true;
        ++reached;
        frontier.push(u);
      }
    }
  }
  return reached == vertex_count_;
}

ProximityGraph build_edges(const std::vector<Vec3>& positions, double comm_range) {
  if (!(comm_range > 0.0)) throw ConfigError("communication range must be positive");
  std::set<std::pair<int, int>> edges;
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((positions[i] - positions[j]).norm() <= comm_range) edges.insert({i, j});
  return ProximityGraph(n, comm_range, std::move(edges));
}

}  // namespace auvfleet
