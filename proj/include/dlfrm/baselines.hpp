#pragma once

#include "dlfrm/netdata.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace dlfrm {

/// Neighbourhoods of the positive training links, symmetrized, sorted and
/// deduplicated.
class AdjacencyIndex {
public:
  explicit AdjacencyIndex(const Network &positives);

  int n_entities() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<int> &neighbors(int i) const {
    return neighbors_[static_cast<std::size_t>(i)];
  }

private:
  std::vector<std::vector<int>> neighbors_;
};

long common_neighbors(const AdjacencyIndex &idx, int i, int j);

/// |G(i) & G(j)| / |G(i) | G(j)|, 0 when both are empty.
double jaccard(const AdjacencyIndex &idx, int i, int j);

/// sum_{l=1..max_len} beta^l * (number of length-l walks from i over the
/// neighbour graph), for every target at once.
Eigen::VectorXd katz_from(const AdjacencyIndex &idx, int i, double beta,
                          int max_len);

double katz_truncated(const AdjacencyIndex &idx, int i, int j, double beta,
                      int max_len);

enum class BaselineKind { common_neighbors, jaccard, katz };

BaselineKind parse_baseline(const std::string &text);
std::string to_string(BaselineKind kind);

struct KatzParams {
  double beta = 0.005;
  int max_len = 4;
};

/// Scores for many pairs; Katz reuses one walk expansion per source.
Eigen::VectorXd baseline_scores(const AdjacencyIndex &idx, BaselineKind kind,
                                const std::vector<std::pair<int, int>> &pairs,
                                const KatzParams &katz = {});

} // namespace dlfrm
