#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qlinsolve/error.hpp"
#include "qlinsolve/linalg.hpp"
#include "qlinsolve/rng.hpp"

namespace qls {

// Undirected edge between 0-based nodes, stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  auto operator<=>(const Edge&) const = default;
};

class Graph {
 public:
  Graph() = default;

  Graph(std::size_t node_count, std::vector<Edge> edges) : n_(node_count) {
    if (n_ == 0) throw Error("graph must have at least one node");
    for (auto& e : edges) {
      if (e.u >= n_ || e.v >= n_)
        throw Error("edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) +
                    ") references a node outside 1.." + std::to_string(n_));
      if (e.u == e.v) throw Error("self-loop at node " + std::to_string(e.u + 1));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end())
      throw Error("duplicate edge (" + std::to_string(dup->u + 1) + "," +
                  std::to_string(dup->v + 1) + ")");
    edges_ = std::move(edges);
    adj_.assign(n_, {});
    for (const auto& e : edges_) {
      adj_[e.u].push_back(e.v);
      adj_[e.v].push_back(e.u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
  }

  static Graph from_one_based(std::size_t node_count,
                              const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (auto [i, j] : pairs) {
      if (i == 0 || j == 0) throw Error("node labels are 1-based");
      edges.push_back({i - 1, j - 1});
    }
    return Graph(node_count, std::move(edges));
  }

  std::size_t node_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adj_.at(i); }
  std::size_t degree(std::size_t i) const { return adj_.at(i).size(); }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& a : adj_) d = std::max(d, a.size());
    return d;
  }

  bool connected() const {
    if (n_ == 0) return false;
    std::vector<char> seen(n_, 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      const auto i = frontier.front();
      frontier.pop();
      for (auto j : adj_[i])
        if (!seen[j]) {
          seen[j] = 1;
          ++reached;
          frontier.push(j);
        }
    }
    return reached == n_;
  }

  // Same graph with node i renamed perm[i].
  Graph relabeled(const std::vector<std::size_t>& perm) const {
    if (perm.size() != n_) throw Error("permutation has wrong length");
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const auto& e : edges_) edges.push_back({perm[e.u], perm[e.v]});
    return Graph(n_, std::move(edges));
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
};

struct LaplacianSummary {
  Matrix L;
  double lambda2 = 0.0;  // 0 for a single node
  double lambdaN = 0.0;
  std::size_t dstar = 0;
};

inline LaplacianSummary build_laplacian(const Graph& g) {
  if (!g.connected()) throw Error("graph not connected");
  const auto n = g.node_count();
  std::vector<long long> exact(n * n, 0);
  for (const auto& e : g.edges()) {
    exact[e.u * n + e.u] += 1;
    exact[e.v * n + e.v] += 1;
    exact[e.u * n + e.v] -= 1;
    exact[e.v * n + e.u] -= 1;
  }
  LaplacianSummary out;
  out.L = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.L(i, j) = static_cast<double>(exact[i * n + j]);
  const Vector ev = sym_eigenvalues(out.L);
  out.lambda2 = n >= 2 ? ev(1) : 0.0;
  out.lambdaN = ev(ev.size() - 1);
  out.dstar = g.max_degree();
  return out;
}

enum class GraphKind { cycle, star, complete, erdos_renyi };

inline std::string_view to_string(GraphKind k) {
  switch (k) {
    case GraphKind::cycle: return "cycle";
    case GraphKind::star: return "star";
    case GraphKind::complete: return "complete";
    case GraphKind::erdos_renyi: return "erdos_renyi";
  }
  return "?";
}

inline GraphKind parse_graph_kind(std::string_view s) {
  if (s == "cycle") return GraphKind::cycle;
  if (s == "star") return GraphKind::star;
  if (s == "complete") return GraphKind::complete;
  if (s == "erdos_renyi" || s == "er") return GraphKind::erdos_renyi;
  throw Error("unknown graph kind '" + std::string(s) + "'");
}

struct GeneratedGraph {
  Graph graph;
  std::uint64_t seed_used = 0;
  std::size_t attempts = 1;
};

inline constexpr std::size_t kMaxGraphAttempts = 10000;

inline GeneratedGraph generate_graph(GraphKind kind, std::size_t n, double p, std::uint64_t seed) {
  if (n < 2) throw Error("generated graphs need n >= 2");
  std::vector<Edge> edges;
  switch (kind) {
    case GraphKind::cycle:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
      if (n > 2) edges.push_back({0, n - 1});
      return {Graph(n, std::move(edges)), seed, 1};
    case GraphKind::star:
      for (std::size_t i = 1; i < n; ++i) edges.push_back({0, i});
      return {Graph(n, std::move(edges)), seed, 1};
    case GraphKind::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
      return {Graph(n, std::move(edges)), seed, 1};
    case GraphKind::erdos_renyi:
      break;
  }
  if (!(p > 0.0 && p <= 1.0)) throw Error("erdos_renyi probability must lie in (0, 1]");
  for (std::size_t attempt = 0; attempt < kMaxGraphAttempts; ++attempt) {
    const std::uint64_t s = seed + attempt;
    Rng rng(s);
    edges.clear();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform01() < p) edges.push_back({i, j});
    Graph g(n, edges);
    if (g.connected()) return {std::move(g), s, attempt + 1};
  }
  throw Error("no connected erdos_renyi draw within " + std::to_string(kMaxGraphAttempts) +
              " attempts");
}

namespace detail {

inline std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

// "N <count>" then one 1-based "i j" pair per line.
inline Graph read_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_comment(line);
    if (detail::blank(line)) continue;
    std::istringstream ls(line);
    auto fail = [&](const std::string& what) {
      throw Error("graph line " + std::to_string(lineno) + ": " + what);
    };
    if (!have_header) {
      std::string tag;
      long long count = 0;
      if (!(ls >> tag >> count) || tag != "N" || count <= 0) fail("expected 'N <count>'");
      n = static_cast<std::size_t>(count);
      have_header = true;
    } else {
      long long i = 0, j = 0;
      if (!(ls >> i >> j) || i <= 0 || j <= 0) fail("expected a 1-based pair 'i j'");
      pairs.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    std::string extra;
    if (ls >> extra) fail("unexpected token '" + extra + "'");
  }
  if (!have_header) throw Error("graph file has no 'N <count>' header");
  return Graph::from_one_based(n, pairs);
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file '" + path + "'");
  return read_graph(in);
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << "N " << g.node_count() << "\n";
  for (const auto& e : g.edges()) out << e.u + 1 << " " << e.v + 1 << "\n";
}

}  // namespace qls
