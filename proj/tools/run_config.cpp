#include "run_config.hpp"

#include "dlfrm/errors.hpp"

#include <cstdlib>
#include <fstream>

namespace dlfrm::cli {

using nlohmann::json;

Variant RunConfig::model_variant() const { return parse_variant(variant); }

HyperParams RunConfig::hyper() const {
  HyperParams h = hp;
  h.structure = model_variant().structure;
  return h;
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.chain = chain;
  e.weights = model_variant().weights;
  e.sgld = sgld;
  e.eval_every = eval_every;
  return e;
}

void RunConfig::validate() const {
  if (split_mode != "dense" && split_mode != "sparse")
    throw UsageError("split mode must be `dense` or `sparse`");
  if (n_entities < 0)
    throw UsageError("entity count must be non-negative");
  if (checkpoint_every < 1)
    throw UsageError("checkpoint cadence must be at least 1");
  if (runs < 1)
    throw UsageError("at least one run is required");
  hyper().validate();
  experiment().validate();
}

json to_json(const RunConfig &c) {
  return {
      {"data",
       {{"path", c.data},
        {"n_entities", c.n_entities},
        {"symmetrize", c.symmetrize},
        {"split_file", c.split_file}}},
      {"split",
       {{"mode", c.split_mode},
        {"train_frac", c.train_frac},
        {"pos_frac", c.pos_frac},
        {"neg_multiple", c.neg_multiple}}},
      {"model",
       {{"variant", c.variant},
        {"loss", to_string(c.hp.loss)},
        {"alpha", c.hp.alpha},
        {"nu_sq", c.hp.nu_sq},
        {"c_pos", c.hp.c_pos},
        {"c_neg", c.hp.c_neg},
        {"ell", c.hp.ell},
        {"k_max", c.hp.k_max},
        {"pg_terms", c.hp.pg_terms}}},
      {"chain",
       {{"iters", c.chain.n_iters},
        {"burn_in", c.chain.burn_in},
        {"thin", c.chain.thin},
        {"eval_every", c.eval_every},
        {"checkpoint_every", c.checkpoint_every},
        {"runs", c.runs}}},
      {"sgld",
       {{"schedule", to_string(c.sgld.kind)},
        {"a", c.sgld.a},
        {"b", c.sgld.b},
        {"gamma", c.sgld.gamma},
        {"adagrad_base", c.sgld.adagrad_base},
        {"max_stepsize", c.sgld.max_stepsize},
        {"curvature_cap", c.sgld.curvature_cap},
        {"noise", c.sgld.inject_noise},
        {"inner_iters", c.sgld.inner_iters},
        {"batch_size", c.sgld.batch_size}}},
      {"seed", c.seed},
      {"out", c.out},
  };
}

namespace {

template <typename T>
void read(const json &j, const char *section, const char *key, T &field) {
  if (!j.contains(section))
    return;
  const json &s = j.at(section);
  if (s.contains(key))
    field = s.at(key).get<T>();
}

} // namespace

RunConfig from_json(const json &j, RunConfig c) {
  try {
    read(j, "data", "path", c.data);
    read(j, "data", "n_entities", c.n_entities);
    read(j, "data", "symmetrize", c.symmetrize);
    read(j, "data", "split_file", c.split_file);
    read(j, "split", "mode", c.split_mode);
    read(j, "split", "train_frac", c.train_frac);
    read(j, "split", "pos_frac", c.pos_frac);
    read(j, "split", "neg_multiple", c.neg_multiple);
    read(j, "model", "variant", c.variant);
    std::string loss = to_string(c.hp.loss);
    read(j, "model", "loss", loss);
    c.hp.loss = parse_loss(loss);
    read(j, "model", "alpha", c.hp.alpha);
    read(j, "model", "nu_sq", c.hp.nu_sq);
    read(j, "model", "c_pos", c.hp.c_pos);
    read(j, "model", "c_neg", c.hp.c_neg);
    read(j, "model", "ell", c.hp.ell);
    read(j, "model", "k_max", c.hp.k_max);
    read(j, "model", "pg_terms", c.hp.pg_terms);
    read(j, "chain", "iters", c.chain.n_iters);
    read(j, "chain", "burn_in", c.chain.burn_in);
    read(j, "chain", "thin", c.chain.thin);
    read(j, "chain", "eval_every", c.eval_every);
    read(j, "chain", "checkpoint_every", c.checkpoint_every);
    read(j, "chain", "runs", c.runs);
    std::string schedule = to_string(c.sgld.kind);
    read(j, "sgld", "schedule", schedule);
    c.sgld.kind = parse_schedule_kind(schedule);
    read(j, "sgld", "a", c.sgld.a);
    read(j, "sgld", "b", c.sgld.b);
    read(j, "sgld", "gamma", c.sgld.gamma);
    read(j, "sgld", "adagrad_base", c.sgld.adagrad_base);
    read(j, "sgld", "max_stepsize", c.sgld.max_stepsize);
    read(j, "sgld", "curvature_cap", c.sgld.curvature_cap);
    read(j, "sgld", "noise", c.sgld.inject_noise);
    read(j, "sgld", "inner_iters", c.sgld.inner_iters);
    read(j, "sgld", "batch_size", c.sgld.batch_size);
    if (j.contains("seed"))
      c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out"))
      c.out = j.at("out").get<std::string>();
  } catch (const json::exception &e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path &path, RunConfig base) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  return from_json(j, std::move(base));
}

void save_config(const RunConfig &cfg, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

std::filesystem::path default_output(const std::string &name) {
  const char *root = std::getenv("DLFRM_OUTPUT_DIR");
  return std::filesystem::path(root && *root ? root : "runs") / name;
}

} // namespace dlfrm::cli
