#include "dlfrm/baselines.hpp"

#include "dlfrm/errors.hpp"

#include <algorithm>
#include <map>

namespace dlfrm {
namespace {

void sort_unique(std::vector<int> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

long intersection_size(const std::vector<int> &a, const std::vector<int> &b) {
  long count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

} // namespace

AdjacencyIndex::AdjacencyIndex(const Network &positives)
    : neighbors_(static_cast<std::size_t>(positives.n_entities)) {
  for (const auto &l : positives.links) {
    if (l.sign <= 0 || l.src == l.dst)
      continue;
    if (l.src < 0 || l.dst < 0 || l.src >= positives.n_entities ||
        l.dst >= positives.n_entities)
      throw RangeError("adjacency link references an unknown entity");
    neighbors_[static_cast<std::size_t>(l.src)].push_back(l.dst);
    neighbors_[static_cast<std::size_t>(l.dst)].push_back(l.src);
  }
  for (auto &v : neighbors_)
    sort_unique(v);
}

long common_neighbors(const AdjacencyIndex &idx, int i, int j) {
  return intersection_size(idx.neighbors(i), idx.neighbors(j));
}

double jaccard(const AdjacencyIndex &idx, int i, int j) {
  const auto &a = idx.neighbors(i);
  const auto &b = idx.neighbors(j);
  const long inter = intersection_size(a, b);
  const long uni = static_cast<long>(a.size() + b.size()) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Eigen::VectorXd katz_from(const AdjacencyIndex &idx, int i, double beta,
                          int max_len) {
  const int n = idx.n_entities();
  Eigen::VectorXd walks = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd next(n);
  Eigen::VectorXd score = Eigen::VectorXd::Zero(n);
  walks[i] = 1.0;
  double damp = 1.0;
  for (int len = 1; len <= max_len; ++len) {
    next.setZero();
    for (int u = 0; u < n; ++u) {
      if (walks[u] == 0.0)
        continue;
      for (int v : idx.neighbors(u))
        next[v] += walks[u];
    }
    walks.swap(next);
    damp *= beta;
    score += damp * walks;
  }
  return score;
}

double katz_truncated(const AdjacencyIndex &idx, int i, int j, double beta,
                      int max_len) {
  return katz_from(idx, i, beta, max_len)[j];
}

BaselineKind parse_baseline(const std::string &text) {
  if (text == "cn" || text == "common-neighbors")
    return BaselineKind::common_neighbors;
  if (text == "jaccard")
    return BaselineKind::jaccard;
  if (text == "katz")
    return BaselineKind::katz;
  throw UsageError("unknown baseline `" + text + "` (cn, jaccard, katz)");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
  case BaselineKind::common_neighbors:
    return "cn";
  case BaselineKind::jaccard:
    return "jaccard";
  case BaselineKind::katz:
    return "katz";
  }
  return "?";
}

Eigen::VectorXd baseline_scores(const AdjacencyIndex &idx, BaselineKind kind,
                                const std::vector<std::pair<int, int>> &pairs,
                                const KatzParams &katz) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(pairs.size()));
  if (kind == BaselineKind::katz) {
    std::map<int, std::vector<std::size_t>> by_source;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      by_source[pairs[p].first].push_back(p);
    for (const auto &[src, members] : by_source) {
      const Eigen::VectorXd row = katz_from(idx, src, katz.beta, katz.max_len);
      for (std::size_t p : members)
        out[static_cast<Eigen::Index>(p)] = row[pairs[p].second];
    }
    return out;
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    out[static_cast<Eigen::Index>(p)] =
        kind == BaselineKind::jaccard
            ? jaccard(idx, i, j)
            : static_cast<double>(common_neighbors(idx, i, j));
  }
  return out;
}

} // namespace dlfrm
