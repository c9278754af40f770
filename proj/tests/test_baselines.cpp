#include "dlfrm/baselines.hpp"
#include "dlfrm/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

namespace dlfrm {
namespace {

Network graph(int n, const std::vector<std::pair<int, int>> &edges) {
  Network net;
  net.n_entities = n;
  for (const auto &[a, b] : edges)
    net.links.push_back({a, b, 1, -1});
  return net;
}

/// sum_l beta^l * (walks of length l from i to j), by depth-first
/// enumeration over an explicit symmetric adjacency matrix.
double katz_by_enumeration(const std::vector<std::vector<bool>> &adj, int i,
                           int j, double beta, int max_len) {
  const int n = static_cast<int>(adj.size());
  std::vector<long> counts(static_cast<std::size_t>(max_len) + 1, 0);
  std::function<void(int, int)> walk = [&](int at, int len) {
    if (len > 0 && at == j)
      ++counts[static_cast<std::size_t>(len)];
    if (len == max_len)
      return;
    for (int v = 0; v < n; ++v)
      if (adj[static_cast<std::size_t>(at)][static_cast<std::size_t>(v)])
        walk(v, len + 1);
  };
  walk(i, 0);
  double s = 0.0;
  for (int l = 1; l <= max_len; ++l)
    s += std::pow(beta, l) * static_cast<double>(counts[static_cast<std::size_t>(l)]);
  return s;
}

void expect_katz_matches(const Network &net, double beta, int max_len) {
  const AdjacencyIndex idx(net);
  const int n = net.n_entities;
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
  for (const auto &l : net.links) {
    adj[static_cast<std::size_t>(l.src)][static_cast<std::size_t>(l.dst)] = true;
    adj[static_cast<std::size_t>(l.dst)][static_cast<std::size_t>(l.src)] = true;
  }
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd row = katz_from(idx, i, beta, max_len);
    for (int j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double want = katz_by_enumeration(adj, i, j, beta, max_len);
      ASSERT_NEAR(row[j], want, 1e-12) << i << "->" << j;
    }
  }
}

TEST(CommonNeighbors, Examples) {
  // G(0) = {2, 3}, G(1) = {3, 4}
  const AdjacencyIndex idx(graph(5, {{0, 2}, {0, 3}, {1, 3}, {1, 4}}));
  EXPECT_EQ(common_neighbors(idx, 0, 1), 1);
  const AdjacencyIndex disjoint(graph(6, {{0, 2}, {1, 3}}));
  EXPECT_EQ(common_neighbors(disjoint, 0, 1), 0);
  std::vector<std::pair<int, int>> edges;
  for (int v = 2; v < 7; ++v) {
    edges.emplace_back(0, v);
    edges.emplace_back(1, v);
  }
  const AdjacencyIndex same(graph(7, edges));
  EXPECT_EQ(common_neighbors(same, 0, 1), 5);
}

TEST(Jaccard, Examples) {
  const AdjacencyIndex idx(graph(5, {{0, 2}, {0, 3}, {1, 3}, {1, 4}}));
  EXPECT_DOUBLE_EQ(jaccard(idx, 0, 1), 1.0 / 3.0);
  const AdjacencyIndex empty(graph(3, {}));
  EXPECT_EQ(jaccard(empty, 0, 1), 0.0);
  const AdjacencyIndex same(graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}));
  EXPECT_DOUBLE_EQ(jaccard(same, 0, 1), 1.0);
}

TEST(Katz, Examples) {
  const AdjacencyIndex chain(graph(3, {{0, 1}, {1, 2}}));
  EXPECT_NEAR(katz_truncated(chain, 0, 2, 0.1, 3), 0.01, 1e-15);
  const AdjacencyIndex far(graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}));
  EXPECT_EQ(katz_truncated(far, 0, 5, 0.1, 4), 0.0);
  const AdjacencyIndex direct(graph(2, {{0, 1}}));
  EXPECT_NEAR(katz_truncated(direct, 0, 1, 0.1, 1), 0.1, 1e-15);
}

TEST(Adjacency, SortedDedupedSymmetric) {
  const AdjacencyIndex idx(graph(4, {{2, 0}, {0, 2}, {0, 1}, {3, 0}}));
  EXPECT_EQ(idx.neighbors(0), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(idx.neighbors(2), (std::vector<int>{0}));
}

TEST(Katz, MatchesEnumerationOnAllSmallGraphs) {
  // Every undirected simple graph on up to 5 nodes.
  for (int n = 2; n <= 5; ++n) {
    std::vector<std::pair<int, int>> slots;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        slots.emplace_back(a, b);
    for (unsigned mask = 0; mask < (1u << slots.size()); ++mask) {
      std::vector<std::pair<int, int>> edges;
      for (std::size_t e = 0; e < slots.size(); ++e)
        if (mask & (1u << e))
          edges.push_back(slots[e]);
      for (int len = 1; len <= 4; ++len)
        expect_katz_matches(graph(n, edges), 0.3, len);
    }
  }
}

TEST(Katz, MatchesEnumerationOnRandomLargerGraphs) {
  RngStream rng(1);
  for (int n = 6; n <= 8; ++n)
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<std::pair<int, int>> edges;
      const double p = rng.uniform();
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b && rng.uniform() < p * 0.5)
            edges.emplace_back(a, b);
      expect_katz_matches(graph(n, edges), 0.2, 4);
    }
}

TEST(Measures, SymmetricOnSymmetrizedGraphs) {
  RngStream rng(2);
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < 12; ++a)
    for (int b = 0; b < 12; ++b)
      if (a != b && rng.uniform() < 0.2)
        edges.emplace_back(a, b);
  const AdjacencyIndex idx(graph(12, edges));
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      if (i == j)
        continue;
      EXPECT_EQ(common_neighbors(idx, i, j), common_neighbors(idx, j, i));
      EXPECT_DOUBLE_EQ(jaccard(idx, i, j), jaccard(idx, j, i));
      EXPECT_NEAR(katz_truncated(idx, i, j, 0.05, 4), katz_truncated(idx, j, i, 0.05, 4), 1e-15);
    }
}

TEST(Measures, AddingAnEdgeNeverDecreasesCnOrKatz) {
  RngStream rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < 9; ++a)
      for (int b = a + 1; b < 9; ++b)
        if (rng.uniform() < 0.25)
          edges.emplace_back(a, b);
    const AdjacencyIndex before(graph(9, edges));
    const int a = static_cast<int>(rng.uniform() * 9);
    const int b = (a + 1 + static_cast<int>(rng.uniform() * 8)) % 9;
    edges.emplace_back(a, b);
    const AdjacencyIndex after(graph(9, edges));
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        if (i == j)
          continue;
        EXPECT_GE(common_neighbors(after, i, j), common_neighbors(before, i, j));
        EXPECT_GE(katz_truncated(after, i, j, 0.1, 4), katz_truncated(before, i, j, 0.1, 4));
      }
  }
}

TEST(BaselineScores, MatchPerPairFunctions) {
  const AdjacencyIndex idx(graph(6, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 1}}));
  const std::vector<std::pair<int, int>> pairs{{0, 2}, {4, 3}, {5, 0}, {0, 2}, {1, 3}};
  const KatzParams kp{0.1, 3};
  const Eigen::VectorXd cn = baseline_scores(idx, BaselineKind::common_neighbors, pairs);
  const Eigen::VectorXd jc = baseline_scores(idx, BaselineKind::jaccard, pairs);
  const Eigen::VectorXd kz = baseline_scores(idx, BaselineKind::katz, pairs, kp);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    const auto e = static_cast<Eigen::Index>(p);
    EXPECT_EQ(cn[e], static_cast<double>(common_neighbors(idx, i, j)));
    EXPECT_EQ(jc[e], jaccard(idx, i, j));
    EXPECT_NEAR(kz[e], katz_truncated(idx, i, j, kp.beta, kp.max_len), 1e-15);
  }
}

TEST(BaselineKind, Parsing) {
  for (BaselineKind k : {BaselineKind::common_neighbors, BaselineKind::jaccard, BaselineKind::katz})
    EXPECT_EQ(parse_baseline(to_string(k)), k);
  EXPECT_THROW(parse_baseline("adamic"), UsageError);
}

} // namespace
} // namespace dlfrm
