#include "dlfrm/chain.hpp"

#include "dlfrm/errors.hpp"

#include <chrono>

namespace dlfrm {

Variant parse_variant(const std::string &text) {
  if (text == "dlfrm")
    return {WeightSampler::exact, Structure::full};
  if (text == "stodlfrm")
    return {WeightSampler::sgld, Structure::full};
  if (text == "diagdlfrm")
    return {WeightSampler::exact, Structure::diagonal};
  throw UsageError("unknown variant `" + text +
                   "` (dlfrm, stodlfrm, diagdlfrm)");
}

std::string to_string(const Variant &variant) {
  if (variant.structure == Structure::diagonal)
    return "diagdlfrm";
  return variant.weights == WeightSampler::sgld ? "stodlfrm" : "dlfrm";
}

Chain::Chain(TrainingSet train, HyperParams hp, WeightSampler weights,
             SgldSchedule sgld, RngStream rng)
    : train_(std::move(train)), hp_(hp), weights_(weights),
      sgld_(std::move(sgld)), rng_(std::move(rng)) {
  hp_.validate();
  sgld_.validate();
  state_ = init_chain(train_, hp_, rng_);
  stats_ = make_stats(state_, train_);
}

Chain::Chain(TrainingSet train, const Checkpoint &cp, WeightSampler weights,
             SgldSchedule sgld)
    : train_(std::move(train)), hp_(cp.hp), weights_(weights),
      sgld_(std::move(sgld)), rng_(RngStream::restore(cp.rng_state)),
      state_(cp.state), iteration_(cp.iteration) {
  if (state_.n_entities() != train_.n_entities() ||
      static_cast<std::size_t>(state_.lambda.size()) != train_.size())
    throw CheckpointError("checkpoint does not match the training split");
  if (state_.structure != hp_.structure)
    throw CheckpointError("checkpoint structure disagrees with its hyperparameters");
  sgld_.step = cp.sgld_step;
  sgld_.accumulator = cp.sgld_accumulator;
  sgld_.validate();
  stats_ = make_stats(state_, train_);
}

SweepDiagnostics Chain::step() {
  using Clock = std::chrono::steady_clock;
  auto secs = [](Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  };

  SweepDiagnostics diag;
  const int k_before = state_.K();
  auto t0 = Clock::now();
  const std::vector<int> origin =
      sweep_features(state_, stats_, train_, hp_, rng_, true);
  diag.times.sample_z = secs(t0);

  t0 = Clock::now();
  if (weights_ == WeightSampler::exact) {
    resample_weights(state_, stats_, train_, hp_, rng_);
  } else {
    remap_accumulator(sgld_, state_.structure, origin, k_before);
    sgld_weights(state_, stats_, train_, hp_, sgld_, rng_);
  }
  diag.times.sample_u = secs(t0);

  t0 = Clock::now();
  resample_lambda(state_, stats_, train_, hp_, rng_);
  diag.times.sample_lambda = secs(t0);

  diag.iteration = ++iteration_;
  diag.K = state_.K();
  diag.log_pseudo_lik = train_log_pseudo_lik(stats_, train_, hp_);
  return diag;
}

Checkpoint Chain::checkpoint() const {
  Checkpoint cp;
  cp.state = state_;
  cp.hp = hp_;
  cp.rng_state = rng_.serialize();
  cp.iteration = iteration_;
  cp.sgld_step = sgld_.step;
  cp.sgld_accumulator = sgld_.accumulator;
  return cp;
}

} // namespace dlfrm
