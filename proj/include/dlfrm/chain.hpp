#pragma once

#include "dlfrm/gibbs.hpp"
#include "dlfrm/sgld.hpp"

#include <string>

namespace dlfrm {

enum class WeightSampler { exact, sgld };

/// Model variants: DLFRM (exact weights, full U), stoDLFRM (SGLD weights,
/// full U) and diagDLFRM (exact weights, diagonal U).
struct Variant {
  WeightSampler weights = WeightSampler::exact;
  Structure structure = Structure::full;
};

Variant parse_variant(const std::string &text);
std::string to_string(const Variant &variant);

/// A single Markov chain: owns the state, its caches, and its random stream.
class Chain {
public:
  Chain(TrainingSet train, HyperParams hp, WeightSampler weights,
        SgldSchedule sgld, RngStream rng);

  /// Resume from a checkpoint; `sgld` supplies the schedule settings, the
  /// checkpoint supplies its step counter and accumulator.
  Chain(TrainingSet train, const Checkpoint &cp, WeightSampler weights,
        SgldSchedule sgld);

  SweepDiagnostics step();

  const LatentState &state() const { return state_; }
  const SuffStats &stats() const { return stats_; }
  const TrainingSet &train() const { return train_; }
  const HyperParams &hyper() const { return hp_; }
  const SgldSchedule &schedule() const { return sgld_; }
  long iteration() const { return iteration_; }

  Checkpoint checkpoint() const;

private:
  TrainingSet train_;
  HyperParams hp_;
  WeightSampler weights_;
  SgldSchedule sgld_;
  RngStream rng_;
  LatentState state_;
  SuffStats stats_;
  long iteration_ = 0;
};

} // namespace dlfrm
