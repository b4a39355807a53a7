#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>

#include "quakecast/graph.hpp"
#include "quakecast/util.hpp"
#include "testutil.hpp"

using namespace quakecast;

namespace {

using EdgeKey = std::pair<int, int>;  // (min bin, max bin)

std::set<EdgeKey> edge_keys(const BinGraph& g, std::optional<EdgeOrigin> origin = std::nullopt) {
  std::set<EdgeKey> keys;
  for (const GraphEdge& e : g.edges) {
    if (origin && e.origin != *origin) continue;
    int a = g.nodes[e.a].bin, b = g.nodes[e.b].bin;
    keys.insert({std::min(a, b), std::max(a, b)});
  }
  return keys;
}

std::vector<GraphNode> line_nodes(int n, double spacing) {
  std::vector<GraphNode> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({i, 0, i, 33.0, -118.0 + spacing * i});
  return nodes;
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("two nodes 0.2 degrees apart stay unconnected at eps 0.15") {
  BinGraph g = epsilon_nng(line_nodes(2, 0.2), 0.15);
  CHECK(g.edges.empty());
}

TEST_CASE("full study grid at eps 0.15 gives interior degree exactly 8") {
  RegionFilter r{32.0, 36.0, -120.0, -114.0, 0, 1};
  SpatialGrid grid = make_grid(r, 0.1);
  std::vector<int> all_bins(grid.total_bins());
  for (int b = 0; b < grid.total_bins(); ++b) all_bins[b] = b;
  BinGraph g = epsilon_nng(make_nodes(grid, all_bins), 0.15);
  DegreeStats stats = degree_stats(g);
  CHECK(stats.component_count == 1);
  for (int b = 0; b < grid.total_bins(); ++b) {
    int row = grid.bin_row(b), col = grid.bin_col(b);
    bool interior = row > 0 && row < grid.n_rows - 1 && col > 0 && col < grid.n_cols - 1;
    if (interior) {
      REQUIRE(stats.degrees[b] == 8);
    } else {
      CHECK(stats.degrees[b] < 8);
    }
  }
}

TEST_CASE("random node set matches the all-pairs distance oracle") {
  Rng rng(31);
  std::vector<GraphNode> nodes;
  for (int i = 0; i < 50; ++i)
    nodes.push_back({i, 0, 0, rng.uniform(33.0, 34.0), rng.uniform(-118.0, -117.0)});
  double eps = 0.2;
  BinGraph g = epsilon_nng(nodes, eps);
  std::set<EdgeKey> got = edge_keys(g);
  std::set<EdgeKey> expect;
  for (int i = 0; i < 50; ++i) {
    for (int j = i + 1; j < 50; ++j) {
      double d = std::hypot(nodes[i].lat - nodes[j].lat, nodes[i].lon - nodes[j].lon);
      if (d <= eps) expect.insert({std::min(nodes[i].bin, nodes[j].bin),
                                   std::max(nodes[i].bin, nodes[j].bin)});
    }
  }
  CHECK(got == expect);
}

TEST_CASE("already-connected graph is unchanged by component merging") {
  BinGraph g = epsilon_nng(line_nodes(4, 0.1), 0.15);
  BinGraph merged = connect_components(g);
  CHECK(edge_keys(merged) == edge_keys(g));
  CHECK(edge_keys(merged, EdgeOrigin::merge).empty());
}

TEST_CASE("two clusters join at the closest cross-cluster pair (brute force)") {
  std::vector<GraphNode> nodes;
  // cluster A along -118.0, cluster B along -117.0
  double lat_a[3] = {33.00, 33.05, 33.10};
  for (int i = 0; i < 3; ++i) nodes.push_back({i, 0, 0, lat_a[i], -118.0});
  double lat_b[3] = {33.02, 33.08, 33.14};
  for (int i = 0; i < 3; ++i) nodes.push_back({3 + i, 0, 0, lat_b[i], -117.0});
  BinGraph g = connect_components(epsilon_nng(nodes, 0.15));
  std::set<EdgeKey> merges = edge_keys(g, EdgeOrigin::merge);
  REQUIRE(merges.size() == 1);

  double best = 1e9;
  EdgeKey best_pair{-1, -1};
  for (int i = 0; i < 3; ++i) {
    for (int j = 3; j < 6; ++j) {
      double d = std::hypot(nodes[i].lat - nodes[j].lat, nodes[i].lon - nodes[j].lon);
      if (d < best) {
        best = d;
        best_pair = {i, j};
      }
    }
  }
  CHECK(*merges.begin() == best_pair);
}

TEST_CASE("four singletons on a line merge into the path graph") {
  BinGraph g = connect_components(epsilon_nng(line_nodes(4, 1.0), 0.15));
  DegreeStats stats = degree_stats(g);
  CHECK(stats.component_count == 1);
  std::set<EdgeKey> merges = edge_keys(g, EdgeOrigin::merge);
  CHECK(merges == std::set<EdgeKey>{{0, 1}, {1, 2}, {2, 3}});
  CHECK(g.edges.size() == 3);  // initial components - 1
}

TEST_CASE("degree stats on a path and on isolated nodes") {
  BinGraph path = connect_components(epsilon_nng(line_nodes(3, 1.0), 0.15));
  DegreeStats s = degree_stats(path);
  CHECK(s.degrees == std::vector<int>{1, 2, 1});
  CHECK(s.component_count == 1);

  BinGraph isolated = epsilon_nng(line_nodes(5, 1.0), 0.15);
  DegreeStats si = degree_stats(isolated);
  CHECK(si.degrees == std::vector<int>{0, 0, 0, 0, 0});
  CHECK(si.component_count == 5);
}

TEST_CASE("degree stats match a union-find recount on a random graph") {
  Rng rng(77);
  std::vector<GraphNode> nodes;
  for (int i = 0; i < 60; ++i)
    nodes.push_back({i, 0, 0, rng.uniform(33.0, 33.5), rng.uniform(-118.0, -117.5)});
  BinGraph g = epsilon_nng(nodes, 0.07);
  DegreeStats stats = degree_stats(g);

  std::vector<int> parent(nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  std::vector<int> deg(nodes.size(), 0);
  for (const GraphEdge& e : g.edges) {
    deg[e.a]++;
    deg[e.b]++;
    parent[find(e.a)] = find(e.b);
  }
  std::set<int> roots;
  for (std::size_t i = 0; i < parent.size(); ++i) roots.insert(find(static_cast<int>(i)));
  CHECK(stats.degrees == deg);
  CHECK(stats.component_count == static_cast<int>(roots.size()));
}

TEST_CASE("edges are undirected: each pair appears once with a < b") {
  Rng rng(5);
  std::vector<GraphNode> nodes;
  for (int i = 0; i < 30; ++i)
    nodes.push_back({i, 0, 0, rng.uniform(33.0, 33.3), rng.uniform(-118.0, -117.7)});
  BinGraph g = connect_components(epsilon_nng(nodes, 0.1));
  std::set<std::pair<int, int>> seen;
  for (const GraphEdge& e : g.edges) {
    CHECK(e.a < e.b);
    CHECK(seen.insert({e.a, e.b}).second);
  }
  auto adj = g.adjacency();
  for (const GraphEdge& e : g.edges) {
    CHECK(std::count(adj[e.a].begin(), adj[e.a].end(), e.b) == 1);
    CHECK(std::count(adj[e.b].begin(), adj[e.b].end(), e.a) == 1);
  }
}

TEST_CASE("removing merge edges restores the epsilon graph exactly") {
  Rng rng(13);
  RegionFilter r{32.0, 36.0, -120.0, -114.0, 0, 1};
  SpatialGrid grid = make_grid(r, 0.1);
  std::vector<int> bins(grid.total_bins());
  for (int b = 0; b < grid.total_bins(); ++b) bins[b] = b;
  rng.shuffle(bins);
  bins.resize(300);
  BinGraph eps = epsilon_nng(make_nodes(grid, bins), 0.15);
  BinGraph merged = connect_components(eps);
  CHECK(degree_stats(merged).component_count == 1);
  CHECK(edge_keys(merged, EdgeOrigin::epsilon) == edge_keys(eps));
}

TEST_CASE("edge set does not depend on node input order") {
  Rng rng(41);
  RegionFilter r = testutil::mini_region();
  SpatialGrid grid = make_grid(r, 0.1);
  std::vector<int> bins;
  for (int b = 0; b < grid.total_bins(); b += 3) bins.push_back(b);
  BinGraph a = connect_components(epsilon_nng(make_nodes(grid, bins), 0.15));
  std::vector<int> shuffled = bins;
  rng.shuffle(shuffled);
  BinGraph b = connect_components(epsilon_nng(make_nodes(grid, shuffled), 0.15));
  CHECK(edge_keys(a) == edge_keys(b));
  CHECK(edge_keys(a, EdgeOrigin::merge) == edge_keys(b, EdgeOrigin::merge));
}

TEST_CASE("graph round-trips through the text export") {
  RegionFilter r = testutil::mini_region();
  SpatialGrid grid = make_grid(r, 0.1);
  std::vector<int> bins = {5, 17, 23, 42, 77, 91};
  BinGraph g = connect_components(epsilon_nng(make_nodes(grid, bins), 0.25));
  std::string dir = (std::filesystem::temp_directory_path() / "qc_graph_rt").string();
  std::filesystem::remove_all(dir);
  save_graph(g, dir);
  BinGraph back = load_graph(dir);
  REQUIRE(back.nodes.size() == g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(back.nodes[i].bin == g.nodes[i].bin);
    CHECK(back.nodes[i].lat == g.nodes[i].lat);
    CHECK(back.nodes[i].lon == g.nodes[i].lon);
  }
  CHECK(edge_keys(back) == edge_keys(g));
  CHECK(edge_keys(back, EdgeOrigin::merge) == edge_keys(g, EdgeOrigin::merge));
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
