#pragma once

#include "dlfrm/randvar.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace dlfrm {

struct Link {
  int src = 0;
  int dst = 0;
  int sign = 1;      // +1 link, -1 non-link
  int relation = -1; // -1 when the input carries no relation column
};

/// Directed, signed link observations over entities 0..n_entities-1.
struct Network {
  int n_entities = 0;
  std::vector<Link> links;

  bool has_relations() const;
  std::size_t positive_count() const;
};

/// One observed entry of the link indicator matrix.
struct Observation {
  int src = 0;
  int dst = 0;
  int sign = 1;

  friend bool operator==(const Observation &, const Observation &) = default;
};

struct LinkSplit {
  int n_entities = 0;
  std::vector<Observation> train;
  std::vector<Observation> dev;
  std::vector<Observation> test;
};

/// Reads `src dst [relation]` lines (whitespace separated, 0-based ids,
/// '#' comments). Duplicate triples are dropped. With `symmetrize`, every
/// link is also stored reversed.
Network load_edge_list(const std::filesystem::path &path,
                       std::optional<int> n_entities = std::nullopt,
                       bool symmetrize = false);

/// Every ordered off-diagonal pair is an observation, signed by presence.
/// floor((1 - train_frac) * total) entries go to test; a dev set of the same
/// size (at most half of the remainder) is carved from the training share.
LinkSplit split_dense(const Network &net, double train_frac, RngStream &rng);

/// pos_train_frac of the positives plus neg_multiple times as many sampled
/// non-links train the model; test holds the remaining positives and as many
/// non-links drawn from outside the training set.
LinkSplit split_sparse(const Network &net, double pos_train_frac,
                       int neg_multiple, RngStream &rng);

/// Moves `count` uniformly chosen training observations to dev.
void carve_dev(LinkSplit &split, std::size_t count, RngStream &rng);

/// One single-relation network per distinct relation id (ascending).
std::vector<Network> per_relation_views(const Network &net);

/// Text format: header comments then `role src dst sign` lines.
void write_split(const LinkSplit &split, const std::filesystem::path &path);
LinkSplit read_split(const std::filesystem::path &path);

/// Positive training links as a network (for proximity baselines).
Network training_network(const LinkSplit &split);

} // namespace dlfrm
