#pragma once

#include "dlfrm/chain.hpp"
#include "dlfrm/eval.hpp"
#include "dlfrm/relmodel.hpp"
#include "dlfrm/sgld.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace dlfrm::cli {

/// Everything that determines a run. Every field has a default, and the
/// whole struct round-trips through JSON; missing keys keep their defaults.
struct RunConfig {
  // data
  std::string data;      // edge list
  int n_entities = 0;    // 0 infers from the edge list
  bool symmetrize = false;
  std::string split_file;

  // split
  std::string split_mode = "dense";
  double train_frac = 0.8;
  double pos_frac = 0.9;
  int neg_multiple = 10;

  // model
  std::string variant = "dlfrm";
  HyperParams hp;

  // chain
  ChainConfig chain;
  int eval_every = 10;
  int checkpoint_every = 50;
  int runs = 1;

  SgldSchedule sgld;

  std::uint64_t seed = 1;
  std::string out;

  Variant model_variant() const;
  /// HyperParams with the structure implied by the variant.
  HyperParams hyper() const;
  ExperimentConfig experiment() const;
  void validate() const;
};

nlohmann::json to_json(const RunConfig &cfg);
RunConfig from_json(const nlohmann::json &j, RunConfig base = {});

RunConfig load_config(const std::filesystem::path &path, RunConfig base = {});
void save_config(const RunConfig &cfg, const std::filesystem::path &path);

/// `$DLFRM_OUTPUT_DIR/name`, or `runs/name` when the variable is unset.
std::filesystem::path default_output(const std::string &name);

} // namespace dlfrm::cli
