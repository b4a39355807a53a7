#pragma once

#include <string>
#include <vector>

#include "quakecast/gridding.hpp"

namespace quakecast {

struct GraphNode {
  int bin = 0;  // grid bin id
  int row = 0;
  int col = 0;
  double lat = 0.0;  // cell-center coordinates
  double lon = 0.0;
};

enum class EdgeOrigin { epsilon, merge };

struct GraphEdge {
  int a = 0;  // node positions in the node list, a < b
  int b = 0;
  EdgeOrigin origin = EdgeOrigin::epsilon;
};

/// Undirected graph over active bins. Node order matches the bin list it was
/// built from; edges carry their construction origin.
struct BinGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  /// Sorted neighbor positions per node (no self).
  std::vector<std::vector<int>> adjacency() const;
};

/// Nodes for the given bins of a grid, in the given order.
std::vector<GraphNode> make_nodes(const SpatialGrid& grid, const std::vector<int>& bins);

/// Connects node pairs whose center distance (Euclidean in degree space) is
/// at most epsilon. May be disconnected.
BinGraph epsilon_nng(const std::vector<GraphNode>& nodes, double epsilon);

/// Repeatedly joins the two closest components by a merge-tagged edge until
/// the graph is connected. Tie-breaks on ascending (min bin id, max bin id),
/// so the result does not depend on node input order.
BinGraph connect_components(BinGraph graph);

struct DegreeStats {
  std::vector<int> degrees;
  int component_count = 0;
};

DegreeStats degree_stats(const BinGraph& graph);

/// nodes.tsv: "bin row col lat lon" per node; edges.tsv: "i j tag" per edge
/// with i, j bin ids and tag in {epsilon, merge}.
void save_graph(const BinGraph& graph, const std::string& dir);
BinGraph load_graph(const std::string& dir);

}  // namespace quakecast
