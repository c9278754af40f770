#pragma once

#include "dlfrm/netdata.hpp"
#include "dlfrm/randvar.hpp"
#include "dlfrm/relmodel.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace dlfrm {

struct ChainConfig {
  int n_iters = 500;
  int burn_in = 250;
  int thin = 1;
  bool compact_every_sweep = true;

  void validate() const;
};

/// Training observations with per-entity incidence lists. Link order fixes
/// the indexing of lambda and of the cached omegas.
class TrainingSet {
public:
  TrainingSet() = default;
  TrainingSet(int n_entities, std::vector<Observation> links);

  int n_entities() const { return n_entities_; }
  std::size_t size() const { return links_.size(); }
  const std::vector<Observation> &links() const { return links_; }
  const Observation &operator[](std::size_t i) const { return links_[i]; }

  /// Indices of training links leaving / entering entity n.
  std::span<const int> outgoing(int n) const { return out_[static_cast<std::size_t>(n)]; }
  std::span<const int> incoming(int n) const { return in_[static_cast<std::size_t>(n)]; }

  /// Replace an observed sign (used when y itself is resampled).
  void set_sign(std::size_t link, int sign) { links_[link].sign = sign; }

private:
  int n_entities_ = 0;
  std::vector<Observation> links_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

/// Cached quantities kept consistent with (Z, eta) by every kernel.
struct SuffStats {
  Eigen::VectorXd feature_counts; // column sums of Z
  Eigen::VectorXd omega;          // per training link

  void rebuild(const LatentState &state, const TrainingSet &train);
};

SuffStats make_stats(const LatentState &state, const TrainingSet &train);

/// Largest |cached omega - recomputed omega| and count mismatch.
double cache_error(const LatentState &state, const SuffStats &stats,
                   const TrainingSet &train);

/// Z ~ IBP(alpha), eta ~ N(0, nu^-2 I), every lambda = 1.
LatentState init_chain(const TrainingSet &train, const HyperParams &hp,
                       RngStream &rng);

/// log q(z_nk = 1 | rest) - log q(z_nk = 0 | rest) under the augmented
/// likelihood; -infinity when no other entity owns feature k.
double active_feature_log_odds(const LatentState &state, int n, int k,
                               const SuffStats &stats,
                               const TrainingSet &train,
                               const HyperParams &hp);

/// Redraws z_n1..z_nK in succession; cached omegas and counts follow.
void resample_active_features(LatentState &state, int n, SuffStats &stats,
                              const TrainingSet &train, const HyperParams &hp,
                              RngStream &rng);

/// Unnormalised log masses of k_n = 0..k_max new features for entity n,
/// with the new weights integrated out.
Eigen::VectorXd new_feature_log_masses(const LatentState &state, int n,
                                       const SuffStats &stats,
                                       const TrainingSet &train,
                                       const HyperParams &hp);

/// Draws k_n and, when positive, appends k_n features owned by n and draws
/// their weights from the Gaussian conditional. Returns k_n.
int sample_new_features(LatentState &state, int n, SuffStats &stats,
                        const TrainingSet &train, const HyperParams &hp,
                        RngStream &rng);

/// Precision and shift of the Gaussian conditional of eta given (Z, lambda):
/// precision = sum rho Z_ij Z_ij^T + nu^2 I, shift = sum kappa Z_ij.
struct WeightPosterior {
  Eigen::MatrixXd precision;
  Eigen::VectorXd shift;
};

WeightPosterior weight_posterior(const LatentState &state,
                                 const TrainingSet &train,
                                 const HyperParams &hp);

/// eta ~ N(precision^-1 shift, precision^-1); refreshes cached omegas.
void resample_weights(LatentState &state, SuffStats &stats,
                      const TrainingSet &train, const HyperParams &hp,
                      RngStream &rng);

/// Lower bound applied to |ell - y omega| before the inverse Gaussian draw.
inline constexpr double kHingeGapFloor = 1e-8;

/// Logistic: lambda ~ PG(c, omega). Hinge: 1/lambda ~ IG(1/(c|zeta|), 1)
/// with zeta = ell - y omega.
void resample_lambda(LatentState &state, const SuffStats &stats,
                     const TrainingSet &train, const HyperParams &hp,
                     RngStream &rng);

/// Drops all-zero feature columns together with their weights. Returns the
/// previous index of every surviving column.
std::vector<int> compact(LatentState &state, SuffStats &stats);

/// Recompute every cached omega from (Z, eta).
void refresh_omega(const LatentState &state, SuffStats &stats,
                   const TrainingSet &train);

double train_log_pseudo_lik(const SuffStats &stats, const TrainingSet &train,
                            const HyperParams &hp);

/// Wall-clock seconds per kernel family.
struct PhaseTimes {
  double sample_z = 0.0;
  double sample_u = 0.0;
  double sample_lambda = 0.0;

  double total() const { return sample_z + sample_u + sample_lambda; }
  PhaseTimes &operator+=(const PhaseTimes &o) {
    sample_z += o.sample_z;
    sample_u += o.sample_u;
    sample_lambda += o.sample_lambda;
    return *this;
  }
};

struct SweepDiagnostics {
  long iteration = 0;
  int K = 0;
  PhaseTimes times;
  double log_pseudo_lik = 0.0;
};

/// Feature phase of a sweep: every entity in index order gets its active
/// features then its new features; all-zero columns are dropped afterwards
/// when `compact_after` is set. Returns, per final column, its index before
/// the sweep or -1 for a feature born during it.
std::vector<int> sweep_features(LatentState &state, SuffStats &stats,
                    const TrainingSet &train, const HyperParams &hp,
                    RngStream &rng, bool compact_after = true);

/// One full sweep: features, weights, augmentation variables.
SweepDiagnostics gibbs_sweep(LatentState &state, SuffStats &stats,
                             const TrainingSet &train, const HyperParams &hp,
                             const ChainConfig &cfg, RngStream &rng);

} // namespace dlfrm
