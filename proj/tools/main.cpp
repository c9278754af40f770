#include "run_config.hpp"

#include "dlfrm/baselines.hpp"
#include "dlfrm/errors.hpp"
#include "dlfrm/eval.hpp"
#include "dlfrm/netdata.hpp"
#include "dlfrm/synthetic.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace dlfrm;
using cli::RunConfig;

namespace {

constexpr const char *kManifest = "manifest.json";
constexpr const char *kCheckpoint = "checkpoint.txt";
constexpr const char *kSamples = "samples.txt";

fs::path output_dir(const RunConfig &cfg, const std::string &fallback) {
  const fs::path dir = cfg.out.empty() ? cli::default_output(fallback) : fs::path(cfg.out);
  fs::create_directories(dir);
  return dir;
}

Network load_data(const RunConfig &cfg) {
  if (cfg.data.empty())
    throw UsageError("no dataset given (--data)");
  std::optional<int> n;
  if (cfg.n_entities > 0)
    n = cfg.n_entities;
  return load_edge_list(cfg.data, n, cfg.symmetrize);
}

LinkSplit load_split(const RunConfig &cfg) {
  if (cfg.split_file.empty())
    throw UsageError("no split file given (--split)");
  return read_split(cfg.split_file);
}

void add_data_options(CLI::App *app, RunConfig &cfg) {
  app->add_option("--data", cfg.data, "edge list: `src dst [relation]` per line");
  app->add_option("--n-entities", cfg.n_entities, "entity count (0 infers it)");
  app->add_flag("--symmetrize", cfg.symmetrize, "store every link in both directions");
}

void add_model_options(CLI::App *app, RunConfig &cfg, std::string &loss,
                       std::string &schedule) {
  app->add_option("--variant", cfg.variant, "dlfrm, stodlfrm or diagdlfrm");
  app->add_option("--loss", loss, "logistic or hinge");
  app->add_option("--alpha", cfg.hp.alpha, "IBP concentration");
  app->add_option("--nu-sq", cfg.hp.nu_sq, "prior precision of each weight");
  app->add_option("--c-pos", cfg.hp.c_pos, "cost on positive links");
  app->add_option("--c-neg", cfg.hp.c_neg, "cost on negative links");
  app->add_option("--ell", cfg.hp.ell, "hinge margin");
  app->add_option("--k-max", cfg.hp.k_max, "most new features per entity update");
  app->add_option("--pg-terms", cfg.hp.pg_terms, "series terms per Polya-Gamma draw");
  app->add_option("--iters", cfg.chain.n_iters, "Gibbs sweeps");
  app->add_option("--burn-in", cfg.chain.burn_in, "sweeps discarded before sampling");
  app->add_option("--thin", cfg.chain.thin, "keep every thin-th sweep after burn-in");
  app->add_option("--eval-every", cfg.eval_every, "sweeps between AUC trace points");
  app->add_option("--checkpoint-every", cfg.checkpoint_every, "sweeps between checkpoints");
  app->add_option("--runs", cfg.runs, "independent chains");
  app->add_option("--schedule", schedule, "SGLD stepsizes: polynomial or adagrad (default: adagrad for hinge loss)");
  app->add_option("--sgld-a", cfg.sgld.a, "polynomial stepsize a");
  app->add_option("--sgld-b", cfg.sgld.b, "polynomial stepsize b");
  app->add_option("--sgld-gamma", cfg.sgld.gamma, "polynomial stepsize exponent");
  app->add_option("--adagrad-base", cfg.sgld.adagrad_base, "AdaGrad base stepsize");
  app->add_option("--max-stepsize", cfg.sgld.max_stepsize, "cap on AdaGrad stepsizes");
  app->add_option("--curvature-cap", cfg.sgld.curvature_cap,
                  "clip stepsizes to the stable per-coordinate bound (true/false)");
  app->add_option("--sgld-noise", cfg.sgld.inject_noise, "inject Langevin noise (true/false)");
  app->add_option("--inner-iters", cfg.sgld.inner_iters, "SGLD steps per sweep");
  app->add_option("--batch-size", cfg.sgld.batch_size, "links per minibatch (0: all)");
}

void add_common_options(CLI::App *app, RunConfig &cfg) {
  app->add_option("--seed", cfg.seed, "random seed");
  app->add_option("--out", cfg.out, "output directory");
}

// ---------------------------------------------------------------- split

int cmd_split(const RunConfig &cfg) {
  cfg.validate();
  const Network net = load_data(cfg);
  RngStream rng(cfg.seed);
  const LinkSplit split = cfg.split_mode == "dense"
                              ? split_dense(net, cfg.train_frac, rng)
                              : split_sparse(net, cfg.pos_frac, cfg.neg_multiple, rng);
  const fs::path dir = output_dir(cfg, "split-" + std::to_string(cfg.seed));
  write_split(split, dir / "split.txt");
  RunConfig manifest = cfg;
  manifest.split_file = (dir / "split.txt").string();
  manifest.out = dir.string();
  cli::save_config(manifest, dir / kManifest);
  std::cout << "train " << split.train.size() << "  dev " << split.dev.size() << "  test "
            << split.test.size() << "  -> " << (dir / "split.txt").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const SyntheticSpec &spec, const RunConfig &cfg) {
  spec.validate();
  RngStream rng(cfg.seed);
  const SyntheticNetwork syn = generate_synthetic(spec, rng);
  const fs::path path = cfg.out.empty() ? cli::default_output("synthetic.txt") : fs::path(cfg.out);
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << "# synthetic network, " << spec.n_entities << " entities, seed " << cfg.seed << '\n';
  for (const auto &l : syn.net.links)
    out << l.src << ' ' << l.dst << '\n';
  std::cout << syn.net.links.size() << " links -> " << path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

std::vector<std::vector<double>> read_csv(const fs::path &path) {
  std::vector<std::vector<double>> rows;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, double> read_phase_times(const fs::path &path) {
  std::map<std::string, double> out{{"sample_Z", 0.0}, {"sample_U", 0.0}, {"sample_lambda", 0.0}};
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string name, secs;
    std::getline(ss, name, ',');
    std::getline(ss, secs, ',');
    out[name] = std::stod(secs);
  }
  return out;
}

/// Runs (or resumes) one chain, writing checkpoints, kept samples and the
/// diagnostics CSVs into dir.
EvalReport train_chain(const RunConfig &cfg, const LinkSplit &split, const fs::path &dir,
                       bool resume, long stop_after) {
  const Variant variant = cfg.model_variant();
  const TrainingSet train(split.n_entities, split.train);
  const auto pairs = pairs_of(split.test);
  const auto labels = labels_of(split.test);
  const bool scorable = !split.test.empty() &&
                        std::count(labels.begin(), labels.end(), 1) > 0 &&
                        std::count(labels.begin(), labels.end(), -1) > 0;
  ScoreAccumulator acc(pairs);
  EvalReport report;
  report.phase_times = phase_map({});

  std::unique_ptr<Chain> chain;
  if (resume) {
    const Checkpoint cp = load_checkpoint(dir / kCheckpoint);
    if (!(cp.hp == cfg.hyper()))
      throw CheckpointError("checkpoint hyperparameters differ from the manifest");
    chain = std::make_unique<Chain>(train, cp, variant.weights, cfg.sgld);
    std::vector<std::pair<long, LatentState>> kept;
    {
      std::ifstream in(dir / kSamples);
      if (in)
        kept = read_samples(in);
    }
    std::ofstream rewrite(dir / kSamples, std::ios::trunc);
    for (const auto &[it, s] : kept) {
      if (it > cp.iteration)
        break;
      write_sample(rewrite, it, s);
      acc.add(s);
    }
    for (const auto &row : read_csv(dir / "k_trace.csv"))
      if (row.size() == 2 && row[0] <= static_cast<double>(cp.iteration))
        report.k_trace.emplace_back(static_cast<long>(row[0]), static_cast<int>(row[1]));
    for (const auto &row : read_csv(dir / "auc_trace.csv"))
      if (row.size() == 2 && row[0] <= static_cast<double>(cp.iteration))
        report.auc_trace.emplace_back(static_cast<long>(row[0]), row[1]);
    report.phase_times = read_phase_times(dir / "phase_times.csv");
  } else {
    chain = std::make_unique<Chain>(train, cfg.hyper(), variant.weights, cfg.sgld,
                                    RngStream(cfg.seed));
    std::ofstream(dir / kSamples, std::ios::trunc);
  }

  std::ofstream samples(dir / kSamples, std::ios::app);
  samples << std::setprecision(17);
  auto persist = [&] {
    samples.flush();
    save_checkpoint(dir / kCheckpoint, chain->checkpoint());
    write_report_csvs(report, dir);
  };

  const ChainConfig &cc = cfg.chain;
  long steps = 0;
  while (chain->iteration() < cc.n_iters) {
    if (stop_after >= 0 && steps == stop_after)
      return report;
    const SweepDiagnostics d = chain->step();
    ++steps;
    const long it = d.iteration;
    report.k_trace.emplace_back(it, d.K);
    report.phase_times["sample_Z"] += d.times.sample_z;
    report.phase_times["sample_U"] += d.times.sample_u;
    report.phase_times["sample_lambda"] += d.times.sample_lambda;
    if (it > cc.burn_in && (it - cc.burn_in) % cc.thin == 0) {
      write_sample(samples, it, chain->state());
      acc.add(chain->state());
    }
    if (scorable && it % cfg.eval_every == 0) {
      const Eigen::VectorXd s = acc.count() > 0 ? acc.mean() : state_scores(chain->state(), pairs);
      report.auc_trace.emplace_back(it, auc(s, labels));
    }
    if (it % cfg.checkpoint_every == 0 || it == cc.n_iters)
      persist();
  }

  report.n_samples = acc.count();
  report.test_scores = acc.count() > 0 ? acc.mean() : state_scores(chain->state(), pairs);
  if (scorable) {
    report.auc = auc(report.test_scores, labels);
    report.roc = roc_curve(report.test_scores, labels);
  }
  double k_sum = 0.0;
  long k_n = 0;
  for (const auto &[it, k] : report.k_trace)
    if (it > cc.burn_in && (it - cc.burn_in) % cc.thin == 0) {
      k_sum += k;
      ++k_n;
    }
  report.mean_k = k_n > 0 ? k_sum / static_cast<double>(k_n) : 0.0;
  write_report_csvs(report, dir);
  return report;
}

int cmd_train(RunConfig cfg, bool resume, long stop_after) {
  fs::path dir;
  if (resume) {
    if (cfg.out.empty())
      throw UsageError("--resume needs the run directory (--out)");
    dir = cfg.out;
    const RunConfig saved = cli::load_config(dir / kManifest);
    cfg = saved;
  } else {
    cfg.validate();
    dir = output_dir(cfg, "train-" + cfg.variant + "-" + std::to_string(cfg.seed));
    cfg.out = dir.string();
    cli::save_config(cfg, dir / kManifest);
  }
  cfg.validate();
  const LinkSplit split = load_split(cfg);
  const EvalReport report = train_chain(cfg, split, dir, resume, stop_after);
  if (stop_after >= 0 && report.test_scores.size() == 0) {
    std::cout << "stopped after " << stop_after << " sweeps; resume with --resume\n";
    return 0;
  }
  std::ofstream summary(dir / "summary.txt");
  print_summary(summary, report);
  print_summary(std::cout, report);
  return 0;
}

// ---------------------------------------------------------------- baselines

struct BaselineOptions {
  std::string method = "katz";
  KatzParams katz;
  std::string scores_file;
};

int cmd_baseline(const RunConfig &cfg, const BaselineOptions &opt) {
  const LinkSplit split = load_split(cfg);
  const AdjacencyIndex idx(training_network(split));
  const auto pairs = pairs_of(split.test);
  const Eigen::VectorXd scores = baseline_scores(idx, parse_baseline(opt.method), pairs, opt.katz);
  if (!opt.scores_file.empty()) {
    const fs::path path(opt.scores_file);
    if (path.has_parent_path())
      fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
      throw IoError("cannot write " + path.string());
    out << std::setprecision(17) << "src,dst,score\n";
    for (std::size_t p = 0; p < pairs.size(); ++p)
      out << pairs[p].first << ',' << pairs[p].second << ','
          << scores[static_cast<Eigen::Index>(p)] << '\n';
  }
  std::cout << std::fixed << std::setprecision(4) << opt.method << " AUC "
            << auc(scores, labels_of(split.test)) << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval_run(const fs::path &dir) {
  const RunConfig cfg = cli::load_config(dir / kManifest);
  const LinkSplit split = load_split(cfg);
  std::ifstream in(dir / kSamples);
  if (!in)
    throw UsageError("no posterior samples in " + dir.string());
  ScoreAccumulator acc(pairs_of(split.test));
  double k_sum = 0.0;
  for (const auto &[it, s] : read_samples(in)) {
    acc.add(s);
    k_sum += s.K();
  }
  if (acc.count() == 0)
    throw UsageError("no posterior samples in " + dir.string() + " (still in burn-in?)");
  EvalReport report;
  const auto labels = labels_of(split.test);
  report.test_scores = acc.mean();
  report.auc = auc(report.test_scores, labels);
  report.roc = roc_curve(report.test_scores, labels);
  report.n_samples = acc.count();
  report.mean_k = k_sum / static_cast<double>(acc.count());
  report.phase_times = read_phase_times(dir / "phase_times.csv");
  for (const auto &row : read_csv(dir / "k_trace.csv"))
    report.k_trace.emplace_back(static_cast<long>(row[0]), static_cast<int>(row[1]));
  for (const auto &row : read_csv(dir / "auc_trace.csv"))
    report.auc_trace.emplace_back(static_cast<long>(row[0]), row[1]);
  write_report_csvs(report, dir);
  print_summary(std::cout, report);
  return 0;
}

int cmd_eval_single(const RunConfig &cfg) {
  cfg.validate();
  const Network net = load_data(cfg);
  const RelationReport r = run_single_relation_mode(net, cfg.train_frac, cfg.hyper(),
                                                    cfg.experiment(), RngStream(cfg.seed));
  const fs::path dir = output_dir(cfg, "single-" + std::to_string(cfg.seed));
  std::ofstream out(dir / "relations.csv");
  out << std::setprecision(17) << "relation,auc\n";
  for (std::size_t i = 0; i < r.aucs.size(); ++i)
    out << r.relation_ids[i] << ',' << r.aucs[i] << '\n';
  std::cout << std::fixed << std::setprecision(4) << "relations " << r.aucs.size()
            << "  mean AUC " << r.mean_auc << '\n';
  return 0;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const RunConfig &cfg, const std::vector<double> &ratios) {
  cfg.validate();
  const LinkSplit split = load_split(cfg);
  const auto points = sweep_cost_ratio(split, cfg.hyper(), ratios, cfg.experiment(),
                                       RngStream(cfg.seed), cfg.runs);
  const fs::path dir = output_dir(cfg, "sweep-" + std::to_string(cfg.seed));
  RunConfig manifest = cfg;
  manifest.out = dir.string();
  cli::save_config(manifest, dir / kManifest);
  std::ofstream out(dir / "cost_ratio.csv");
  out << std::setprecision(17) << "ratio,auc,sd\n";
  for (const auto &p : points)
    out << p.ratio << ',' << p.auc << ',' << p.sd << '\n';
  std::cout << std::fixed << std::setprecision(4) << "ratio      AUC       sd\n";
  for (const auto &p : points)
    std::cout << std::setw(5) << std::setprecision(1) << p.ratio << std::setw(10)
              << std::setprecision(4) << p.auc << std::setw(9) << p.sd << '\n';
  return 0;
}

/// --config is read before the other options so flags override it.
std::optional<std::string> find_config(int argc, char **argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc)
      return std::string(argv[i + 1]);
    if (std::strncmp(argv[i], "--config=", 9) == 0)
      return std::string(argv[i] + 9);
  }
  return std::nullopt;
}

int run(int argc, char **argv) {
  RunConfig cfg;
  std::string schedule; // empty: AdaGrad for hinge loss, polynomial otherwise
  if (const auto path = find_config(argc, argv)) {
    cfg = cli::load_config(*path);
    schedule = to_string(cfg.sgld.kind);
  }

  std::string loss = to_string(cfg.hp.loss);
  std::string config_path;

  CLI::App app{"Discriminative latent feature relational models for link prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "JSON run configuration; flags override it");

  auto *split = app.add_subcommand("split", "split a network into train/dev/test");
  add_data_options(split, cfg);
  split->add_option("--mode", cfg.split_mode, "dense (all pairs) or sparse (sampled non-links)");
  split->add_option("--train-frac", cfg.train_frac, "dense: share of pairs kept for training");
  split->add_option("--pos-frac", cfg.pos_frac, "sparse: share of positives kept for training");
  split->add_option("--neg-multiple", cfg.neg_multiple, "sparse: sampled non-links per positive");
  add_common_options(split, cfg);

  SyntheticSpec spec;
  auto *gen = app.add_subcommand("generate", "draw a planted-feature network");
  gen->add_option("--n", spec.n_entities, "entities");
  gen->add_option("--communities", spec.communities, "planted features besides the background");
  gen->add_option("--membership", spec.membership, "probability of owning a planted feature");
  gen->add_option("--strength", spec.strength, "within-feature weight");
  gen->add_option("--spread", spec.spread, "sd of the other weights");
  gen->add_option("--density", spec.density, "expected link density");
  add_common_options(gen, cfg);

  bool resume = false;
  long stop_after = -1;
  auto *train = app.add_subcommand("train", "run a posterior chain on a split");
  train->add_option("--split", cfg.split_file, "split file");
  add_model_options(train, cfg, loss, schedule);
  train->add_flag("--resume", resume, "continue the run in --out from its checkpoint");
  train->add_option("--stop-after", stop_after, "stop after this many sweeps (testing)");
  add_common_options(train, cfg);

  std::string run_dir;
  std::string relation_mode = "joint";
  BaselineOptions bopt;
  std::string eval_baseline;
  auto *eval = app.add_subcommand("eval", "score a trained run, a baseline, or per-relation chains");
  eval->add_option("--run", run_dir, "run directory written by train");
  eval->add_option("--baseline", eval_baseline, "cn, jaccard or katz");
  eval->add_option("--beta", bopt.katz.beta, "Katz damping");
  eval->add_option("--max-len", bopt.katz.max_len, "Katz path-length cutoff");
  eval->add_option("--scores", bopt.scores_file, "write src,dst,score CSV here");
  eval->add_option("--split", cfg.split_file, "split file");
  eval->add_option("--relation-mode", relation_mode, "joint or single");
  eval->add_option("--train-frac", cfg.train_frac, "single mode: share of pairs for training");
  add_data_options(eval, cfg);
  add_model_options(eval, cfg, loss, schedule);
  add_common_options(eval, cfg);

  std::vector<double> ratios{1, 2, 5, 10, 15};
  auto *sweep = app.add_subcommand("sweep", "AUC against the cost ratio c+/c-");
  sweep->add_option("--split", cfg.split_file, "split file");
  sweep->add_option("--ratios", ratios, "cost ratios")->delimiter(',');
  add_model_options(sweep, cfg, loss, schedule);
  add_common_options(sweep, cfg);

  auto *base = app.add_subcommand("baseline", "proximity scores for the test pairs");
  base->add_option("--split", cfg.split_file, "split file")->required();
  base->add_option("--method", bopt.method, "cn, jaccard or katz");
  base->add_option("--beta", bopt.katz.beta, "Katz damping");
  base->add_option("--max-len", bopt.katz.max_len, "Katz path-length cutoff");
  base->add_option("--scores", bopt.scores_file, "output CSV (src,dst,score)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
  }
  cfg.hp.loss = parse_loss(loss);
  if (schedule.empty())
    schedule = cfg.hp.loss == Loss::hinge ? "adagrad" : "polynomial";
  cfg.sgld.kind = parse_schedule_kind(schedule);

  if (*split)
    return cmd_split(cfg);
  if (*gen)
    return cmd_generate(spec, cfg);
  if (*train)
    return cmd_train(cfg, resume, stop_after);
  if (*base)
    return cmd_baseline(cfg, bopt);
  if (*sweep)
    return cmd_sweep(cfg, ratios);
  if (!run_dir.empty())
    return cmd_eval_run(run_dir);
  if (!eval_baseline.empty()) {
    bopt.method = eval_baseline;
    return cmd_baseline(cfg, bopt);
  }
  if (relation_mode == "single")
    return cmd_eval_single(cfg);
  throw UsageError("eval needs --run, --baseline or --relation-mode single");
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const Error &e) {
    std::cerr << "dlfrm: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error &e) {
    std::cerr << "dlfrm: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception &e) {
    std::cerr << "dlfrm: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::usage);
  }
}
