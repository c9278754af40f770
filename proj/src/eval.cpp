#include "dlfrm/eval.hpp"

#include "dlfrm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace dlfrm {
namespace {

void check_labels(const Eigen::VectorXd &scores, const std::vector<int> &labels,
                  long &n_pos, long &n_neg) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw UsageError("scores and labels differ in length");
  n_pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y > 0; });
  n_neg = static_cast<long>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw UsageError("AUC needs at least one positive and one negative label");
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (std::isnan(scores[i]))
      throw NumericalError("NaN score");
}

std::vector<Eigen::Index> order_by_score(const Eigen::VectorXd &scores) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return scores[a] < scores[b];
  });
  return order;
}

std::ofstream open_csv(const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

} // namespace

double auc(const Eigen::VectorXd &scores, const std::vector<int> &labels) {
  long n_pos = 0;
  long n_neg = 0;
  check_labels(scores, labels, n_pos, n_neg);
  const auto order = order_by_score(scores);
  // Sum of mid-ranks (1-based) of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]])
      ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t)
      if (labels[static_cast<std::size_t>(order[t])] > 0)
        rank_sum += mid;
    i = j + 1;
  }
  const double p = static_cast<double>(n_pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_curve(const Eigen::VectorXd &scores,
                                const std::vector<int> &labels) {
  long n_pos = 0;
  long n_neg = 0;
  check_labels(scores, labels, n_pos, n_neg);
  auto order = order_by_score(scores);
  std::reverse(order.begin(), order.end());
  std::vector<RocPoint> roc{{0.0, 0.0}};
  long tp = 0;
  long fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[static_cast<std::size_t>(order[j])] > 0)
        ++tp;
      else
        ++fp;
      ++j;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return roc;
}

double trapezoid_area(const std::vector<RocPoint> &roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
  return area;
}

std::vector<std::pair<int, int>> pairs_of(const std::vector<Observation> &obs) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(obs.size());
  for (const auto &o : obs)
    pairs.emplace_back(o.src, o.dst);
  return pairs;
}

std::vector<int> labels_of(const std::vector<Observation> &obs) {
  std::vector<int> labels;
  labels.reserve(obs.size());
  for (const auto &o : obs)
    labels.push_back(o.sign);
  return labels;
}

Eigen::VectorXd state_scores(const LatentState &state,
                             const std::vector<std::pair<int, int>> &pairs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(pairs.size()));
  if (state.K() == 0) {
    out.setZero();
    return out;
  }
  const Eigen::MatrixXd zu = state.z * state.weights();
  for (std::size_t p = 0; p < pairs.size(); ++p)
    out[static_cast<Eigen::Index>(p)] =
        zu.row(pairs[p].first).dot(state.z.row(pairs[p].second));
  return out;
}

ScoreAccumulator::ScoreAccumulator(std::vector<std::pair<int, int>> pairs)
    : pairs_(std::move(pairs)),
      sum_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pairs_.size()))) {}

void ScoreAccumulator::add(const LatentState &state) {
  sum_ += state_scores(state, pairs_);
  ++count_;
}

Eigen::VectorXd ScoreAccumulator::mean() const {
  if (count_ == 0)
    throw UsageError("no posterior samples have been accumulated");
  return sum_ / static_cast<double>(count_);
}

void ExperimentConfig::validate() const {
  chain.validate();
  sgld.validate();
  if (eval_every < 1)
    throw ParameterError("eval_every must be at least 1");
}

std::map<std::string, double> phase_map(const PhaseTimes &t) {
  return {{"sample_Z", t.sample_z},
          {"sample_U", t.sample_u},
          {"sample_lambda", t.sample_lambda}};
}

EvalReport run_experiment(const LinkSplit &split, const HyperParams &hp,
                          const ExperimentConfig &cfg, RngStream &rng,
                          const SweepObserver &observer) {
  cfg.validate();
  const auto labels = labels_of(split.test);
  ScoreAccumulator acc(pairs_of(split.test));
  Chain chain(TrainingSet(split.n_entities, split.train), hp, cfg.weights,
              cfg.sgld, rng);

  EvalReport report;
  PhaseTimes times;
  double k_sum = 0.0;
  for (int it = 1; it <= cfg.chain.n_iters; ++it) {
    const SweepDiagnostics diag = chain.step();
    times += diag.times;
    report.k_trace.emplace_back(diag.iteration, diag.K);
    if (it > cfg.chain.burn_in && (it - cfg.chain.burn_in) % cfg.chain.thin == 0) {
      acc.add(chain.state());
      k_sum += diag.K;
    }
    if (it % cfg.eval_every == 0) {
      const Eigen::VectorXd s =
          acc.count() > 0 ? acc.mean() : state_scores(chain.state(), acc.pairs());
      report.auc_trace.emplace_back(diag.iteration, auc(s, labels));
    }
    if (observer)
      observer(chain, diag);
  }
  report.n_samples = acc.count();
  report.test_scores =
      acc.count() > 0 ? acc.mean() : state_scores(chain.state(), acc.pairs());
  report.auc = auc(report.test_scores, labels);
  report.roc = roc_curve(report.test_scores, labels);
  report.phase_times = phase_map(times);
  report.mean_k = acc.count() > 0 ? k_sum / static_cast<double>(acc.count())
                                  : static_cast<double>(chain.state().K());
  // Leave the caller's stream where the chain's stream ended.
  rng = RngStream::restore(chain.checkpoint().rng_state);
  return report;
}

std::pair<double, double> mean_sd(const std::vector<double> &values) {
  if (values.empty())
    return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1)
    return {mean, 0.0};
  double ss = 0.0;
  for (double v : values)
    ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

RunSummary run_repeated(const LinkSplit &split, const HyperParams &hp,
                        const ExperimentConfig &cfg, const RngStream &rng,
                        int runs) {
  if (runs < 1)
    throw ParameterError("runs must be at least 1");
  RunSummary summary;
  std::vector<double> aucs;
  for (int r = 0; r < runs; ++r) {
    RngStream stream = rng.split(static_cast<std::uint64_t>(r));
    summary.reports.push_back(run_experiment(split, hp, cfg, stream));
    aucs.push_back(summary.reports.back().auc);
  }
  std::tie(summary.mean_auc, summary.sd_auc) = mean_sd(aucs);
  return summary;
}

std::vector<CostRatioPoint>
sweep_cost_ratio(const LinkSplit &split, const HyperParams &hp_base,
                 const std::vector<double> &ratios,
                 const ExperimentConfig &cfg, const RngStream &rng, int runs) {
  std::vector<CostRatioPoint> curve;
  for (double ratio : ratios) {
    if (!(ratio >= 1.0))
      throw ParameterError("cost ratios must be at least 1");
    HyperParams hp = hp_base;
    hp.c_pos = ratio * hp.c_neg;
    const RunSummary s = run_repeated(split, hp, cfg, rng, runs);
    curve.push_back({ratio, s.mean_auc, s.sd_auc});
  }
  return curve;
}

RelationReport run_single_relation_mode(const Network &net, double train_frac,
                                        const HyperParams &hp,
                                        const ExperimentConfig &cfg,
                                        const RngStream &rng) {
  RelationReport out;
  std::vector<int> ids;
  for (const auto &l : net.links)
    ids.push_back(l.relation);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const auto views = per_relation_views(net);
  for (std::size_t r = 0; r < views.size(); ++r) {
    RngStream stream = rng.split(static_cast<std::uint64_t>(r));
    const LinkSplit split = split_dense(views[r], train_frac, stream);
    out.relation_ids.push_back(ids[r]);
    out.aucs.push_back(run_experiment(split, hp, cfg, stream).auc);
  }
  out.mean_auc = mean_sd(out.aucs).first;
  return out;
}

void write_report_csvs(const EvalReport &report,
                       const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_csv(dir / "k_trace.csv");
    out << "iteration,K\n";
    for (const auto &[it, k] : report.k_trace)
      out << it << ',' << k << '\n';
  }
  {
    auto out = open_csv(dir / "auc_trace.csv");
    out << "iteration,auc\n";
    for (const auto &[it, a] : report.auc_trace)
      out << it << ',' << a << '\n';
  }
  {
    auto out = open_csv(dir / "roc.csv");
    out << "fpr,tpr\n";
    for (const auto &p : report.roc)
      out << p.fpr << ',' << p.tpr << '\n';
  }
  {
    auto out = open_csv(dir / "phase_times.csv");
    double total = 0.0;
    for (const auto &[name, secs] : report.phase_times)
      total += secs;
    out << "phase,seconds,share\n";
    for (const auto &[name, secs] : report.phase_times)
      out << name << ',' << secs << ',' << (total > 0.0 ? secs / total : 0.0)
          << '\n';
  }
}

void print_summary(std::ostream &out, const EvalReport &report) {
  double total = 0.0;
  for (const auto &[name, secs] : report.phase_times)
    total += secs;
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  out << "AUC           " << report.auc << '\n';
  out << "samples       " << report.n_samples << '\n';
  out << "mean K        " << std::setprecision(2) << report.mean_k << '\n';
  out << "phase           seconds    share\n";
  for (const char *name : {"sample_Z", "sample_U", "sample_lambda"}) {
    const auto it = report.phase_times.find(name);
    const double secs = it == report.phase_times.end() ? 0.0 : it->second;
    out << std::left << std::setw(14) << name << std::right << std::setw(10)
        << std::setprecision(3) << secs << std::setw(8) << std::setprecision(2)
        << (total > 0.0 ? 100.0 * secs / total : 0.0) << "%\n";
  }
  out.flags(flags);
}

} // namespace dlfrm
