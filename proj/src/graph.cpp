#include "quakecast/graph.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "quakecast/util.hpp"

namespace quakecast {

namespace {

double node_distance(const GraphNode& a, const GraphNode& b) {
  double dlat = a.lat - b.lat;
  double dlon = a.lon - b.lon;
  return std::sqrt(dlat * dlat + dlon * dlon);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

std::vector<std::vector<int>> BinGraph::adjacency() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const GraphEdge& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

std::vector<GraphNode> make_nodes(const SpatialGrid& grid, const std::vector<int>& bins) {
  std::vector<GraphNode> nodes;
  nodes.reserve(bins.size());
  for (int bin : bins) {
    if (bin < 0 || bin >= grid.total_bins())
      throw std::invalid_argument("graph: bin id " + std::to_string(bin) + " outside grid");
    auto [lat, lon] = grid.bin_center(bin);
    nodes.push_back({bin, grid.bin_row(bin), grid.bin_col(bin), lat, lon});
  }
  return nodes;
}

BinGraph epsilon_nng(const std::vector<GraphNode>& nodes, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("graph: epsilon must be positive");
  BinGraph g;
  g.nodes = nodes;
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (node_distance(nodes[i], nodes[j]) <= epsilon)
        g.edges.push_back({i, j, EdgeOrigin::epsilon});
    }
  }
  return g;
}

BinGraph connect_components(BinGraph graph) {
  const int n = static_cast<int>(graph.nodes.size());
  if (n == 0) return graph;
  UnionFind uf(n);
  int components = n;
  for (const GraphEdge& e : graph.edges)
    if (uf.unite(e.a, e.b)) --components;

  while (components > 1) {
    // globally closest inter-component pair; ties by (min bin, max bin)
    int best_a = -1, best_b = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    long long best_key_lo = 0, best_key_hi = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (uf.find(i) == uf.find(j)) continue;
        double d = node_distance(graph.nodes[i], graph.nodes[j]);
        long long lo = std::min(graph.nodes[i].bin, graph.nodes[j].bin);
        long long hi = std::max(graph.nodes[i].bin, graph.nodes[j].bin);
        if (d < best_dist ||
            (d == best_dist && (lo < best_key_lo || (lo == best_key_lo && hi < best_key_hi)))) {
          best_dist = d;
          best_a = i;
          best_b = j;
          best_key_lo = lo;
          best_key_hi = hi;
        }
      }
    }
    graph.edges.push_back({best_a, best_b, EdgeOrigin::merge});
    uf.unite(best_a, best_b);
    --components;
  }
  return graph;
}

DegreeStats degree_stats(const BinGraph& graph) {
  DegreeStats stats;
  stats.degrees.assign(graph.nodes.size(), 0);
  UnionFind uf(graph.nodes.size());
  int components = static_cast<int>(graph.nodes.size());
  for (const GraphEdge& e : graph.edges) {
    stats.degrees[e.a]++;
    stats.degrees[e.b]++;
    if (uf.unite(e.a, e.b)) --components;
  }
  stats.component_count = components;
  return stats;
}

void save_graph(const BinGraph& graph, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/nodes.tsv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/nodes.tsv");
    for (const GraphNode& nd : graph.nodes)
      out << nd.bin << '\t' << nd.row << '\t' << nd.col << '\t' << fmt_g17(nd.lat) << '\t'
          << fmt_g17(nd.lon) << '\n';
  }
  {
    std::ofstream out(dir + "/edges.tsv");
    if (!out) throw std::runtime_error("cannot write " + dir + "/edges.tsv");
    for (const GraphEdge& e : graph.edges)
      out << graph.nodes[e.a].bin << '\t' << graph.nodes[e.b].bin << '\t'
          << (e.origin == EdgeOrigin::epsilon ? "epsilon" : "merge") << '\n';
  }
}

BinGraph load_graph(const std::string& dir) {
  BinGraph g;
  std::ifstream nin(dir + "/nodes.tsv");
  if (!nin) throw std::runtime_error("cannot read " + dir + "/nodes.tsv");
  std::string line;
  std::vector<int> bin_to_pos;
  while (std::getline(nin, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    GraphNode nd;
    std::string bin, row, col, lat, lon;
    if (!(ss >> bin >> row >> col >> lat >> lon)) throw std::runtime_error("bad node line: " + line);
    nd.bin = static_cast<int>(parse_int(bin));
    nd.row = static_cast<int>(parse_int(row));
    nd.col = static_cast<int>(parse_int(col));
    nd.lat = parse_double(lat);
    nd.lon = parse_double(lon);
    if (nd.bin >= static_cast<int>(bin_to_pos.size())) bin_to_pos.resize(nd.bin + 1, -1);
    bin_to_pos[nd.bin] = static_cast<int>(g.nodes.size());
    g.nodes.push_back(nd);
  }
  std::ifstream ein(dir + "/edges.tsv");
  if (!ein) throw std::runtime_error("cannot read " + dir + "/edges.tsv");
  while (std::getline(ein, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string a, b, tag;
    if (!(ss >> a >> b >> tag)) throw std::runtime_error("bad edge line: " + line);
    int bin_a = static_cast<int>(parse_int(a));
    int bin_b = static_cast<int>(parse_int(b));
    auto pos = [&](int bin) {
      if (bin < 0 || bin >= static_cast<int>(bin_to_pos.size()) || bin_to_pos[bin] < 0)
        throw std::runtime_error("edge references unknown bin " + std::to_string(bin));
      return bin_to_pos[bin];
    };
    GraphEdge e;
    e.a = pos(bin_a);
    e.b = pos(bin_b);
    if (e.a > e.b) std::swap(e.a, e.b);
    if (tag == "epsilon")
      e.origin = EdgeOrigin::epsilon;
    else if (tag == "merge")
      e.origin = EdgeOrigin::merge;
    else
      throw std::runtime_error("unknown edge tag: " + tag);
    g.edges.push_back(e);
  }
  return g;
}

}  // namespace quakecast
