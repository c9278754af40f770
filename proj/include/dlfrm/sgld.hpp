#pragma once

#include "dlfrm/gibbs.hpp"
#include "dlfrm/randvar.hpp"
#include "dlfrm/relmodel.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace dlfrm {

enum class ScheduleKind { polynomial, adagrad };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string &text);

/// Stepsize schedule plus the mutable state it carries across steps.
struct SgldSchedule {
  ScheduleKind kind = ScheduleKind::polynomial;
  double a = 0.1;       // polynomial: eps_t = a (b + t)^-gamma
  double b = 10.0;
  double gamma = 0.55;
  double adagrad_base = 1e-2; // adagrad: eps = base / (1e-8 + sqrt(G))
  double max_stepsize = 1.0;  // cap on per-coordinate adagrad stepsizes
  bool curvature_cap = true;  // eps_d <= 1 / (Gershgorin row sum d of the precision)
  bool inject_noise = true;   // false gives plain preconditioned ascent
  int inner_iters = 10;       // SGLD steps per sweep
  int batch_size = 0;         // 0 means the full training set

  long step = 0;                    // t, advanced by every sgld_step
  Eigen::VectorXd accumulator;      // per-coordinate sum of squared gradients

  double polynomial_stepsize(long t) const;
  void validate() const;
};

struct Minibatch {
  std::vector<int> links; // distinct training-link indices
  double scale = 1.0;     // |I| / m
};

/// Uniform draw of m distinct links (m <= 0 or m >= n gives all links).
Minibatch draw_minibatch(std::size_t n_links, int m, RngStream &rng);

/// Gradient pieces of log q(eta | lambda, Z) for fixed features and
/// augmentation variables; eta varies freely.
class WeightGradient {
public:
  WeightGradient(const LatentState &state, const TrainingSet &train,
                 const HyperParams &hp);

  Eigen::Index dim() const { return dim_; }
  double omega(const Eigen::VectorXd &eta, int link) const;
  /// -nu^2 eta + scale * sum_batch (kappa - rho omega) Z_ij.
  Eigen::VectorXd gradient(const Eigen::VectorXd &eta,
                           const Minibatch &batch) const;
  /// Per-coordinate stepsize under which the full-data drift contracts:
  /// 1 / (nu^2 + sum_l rho_l Z_l,d sum_e Z_l,e).
  const Eigen::VectorXd &stable_stepsize() const { return stable_; }

private:
  const TrainingSet *train_;
  Structure structure_;
  int k_ = 0;
  Eigen::Index dim_ = 0;
  double nu_sq_ = 1.0;
  std::vector<std::vector<int>> active_;
  Eigen::VectorXd kappa_;
  Eigen::VectorXd rho_;
  Eigen::VectorXd stable_;
};

/// One Langevin update eta + eps/2 grad + N(0, eps); advances the schedule.
/// With sched.curvature_cap each eps_d is clipped to grad.stable_stepsize().
Eigen::VectorXd sgld_step(const Eigen::VectorXd &eta, const Minibatch &batch,
                          const WeightGradient &grad, SgldSchedule &sched,
                          RngStream &rng);

/// Convenience overload building the gradient from the current state.
Eigen::VectorXd sgld_step(const Eigen::VectorXd &eta, const Minibatch &batch,
                          const LatentState &state, const TrainingSet &train,
                          const HyperParams &hp, SgldSchedule &sched,
                          RngStream &rng);

/// Weight phase of a stochastic sweep: sched.inner_iters SGLD steps on eta,
/// then the cached omegas are refreshed.
void sgld_weights(LatentState &state, SuffStats &stats,
                  const TrainingSet &train, const HyperParams &hp,
                  SgldSchedule &sched, RngStream &rng);

/// Carries the AdaGrad accumulator across a change of feature set. `origin`
/// maps each new feature to its previous index, or -1 for a new feature.
void remap_accumulator(SgldSchedule &sched, Structure structure,
                       const std::vector<int> &origin, int k_before);

} // namespace dlfrm
