#pragma once

#include "dlfrm/netdata.hpp"
#include "dlfrm/relmodel.hpp"

namespace dlfrm {

/// Planted-feature network drawn from the link model itself. Feature 0 is
/// shared by every entity and carries the background rate; the remaining
/// `communities` features are Bernoulli(membership) with weight `strength`
/// on the diagonal of U and N(0, spread^2) off it.
struct SyntheticSpec {
  int n_entities = 100;
  int communities = 3;
  double membership = 0.3;
  double strength = 4.0;
  double spread = 1.0;
  double density = 0.1; // target mean link probability over ordered pairs

  void validate() const;
};

struct SyntheticNetwork {
  Network net;         // positive links only
  LatentState truth;   // full-structure Z and U that generated it
  Eigen::MatrixXd omega; // true link scores, zero diagonal
};

/// The background weight U_00 is set by bisection so that the mean of
/// sigmoid(omega) over off-diagonal pairs equals spec.density; every link
/// is then an independent Bernoulli(sigmoid(omega_ij)) draw.
SyntheticNetwork generate_synthetic(const SyntheticSpec &spec, RngStream &rng);

/// AUC of the true scores on a set of observations (the Bayes ranking).
double oracle_auc(const SyntheticNetwork &syn,
                  const std::vector<Observation> &obs);

} // namespace dlfrm
