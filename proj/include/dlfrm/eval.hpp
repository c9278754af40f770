#pragma once

#include "dlfrm/chain.hpp"
#include "dlfrm/netdata.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dlfrm {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Mann-Whitney statistic P(s+ > s-) + P(s+ = s-) / 2. Labels are signs.
double auc(const Eigen::VectorXd &scores, const std::vector<int> &labels);

/// Step curve from (0,0) to (1,1) with one vertex per distinct score;
/// tied scores move diagonally, so its trapezoidal area equals auc().
std::vector<RocPoint> roc_curve(const Eigen::VectorXd &scores,
                                const std::vector<int> &labels);

double trapezoid_area(const std::vector<RocPoint> &roc);

std::vector<std::pair<int, int>> pairs_of(const std::vector<Observation> &obs);
std::vector<int> labels_of(const std::vector<Observation> &obs);

/// Running sum of omega over posterior samples for a fixed set of pairs.
class ScoreAccumulator {
public:
  explicit ScoreAccumulator(std::vector<std::pair<int, int>> pairs);

  void add(const LatentState &state);
  long count() const { return count_; }
  /// Mean score per pair; requires count() > 0.
  Eigen::VectorXd mean() const;
  const std::vector<std::pair<int, int>> &pairs() const { return pairs_; }

private:
  std::vector<std::pair<int, int>> pairs_;
  Eigen::VectorXd sum_;
  long count_ = 0;
};

/// omega for each pair under a single state.
Eigen::VectorXd state_scores(const LatentState &state,
                             const std::vector<std::pair<int, int>> &pairs);

struct ExperimentConfig {
  ChainConfig chain;
  WeightSampler weights = WeightSampler::exact;
  SgldSchedule sgld;
  int eval_every = 10;

  void validate() const;
};

struct EvalReport {
  double auc = 0.0;
  std::vector<RocPoint> roc;
  std::vector<std::pair<long, int>> k_trace;
  std::map<std::string, double> phase_times; // sample_Z, sample_U, sample_lambda
  std::vector<std::pair<long, double>> auc_trace;
  Eigen::VectorXd test_scores;
  long n_samples = 0;
  double mean_k = 0.0; // over kept samples
};

std::map<std::string, double> phase_map(const PhaseTimes &t);

/// Called after every sweep with the chain and its diagnostics.
using SweepObserver =
    std::function<void(const Chain &, const SweepDiagnostics &)>;

/// Trains one chain on split.train and scores split.test. Sweeps after
/// burn_in (every thin-th) are kept; every eval_every sweeps the test AUC of
/// the kept samples' mean omega is traced (the current sample's omega before
/// any is kept).
EvalReport run_experiment(const LinkSplit &split, const HyperParams &hp,
                          const ExperimentConfig &cfg, RngStream &rng,
                          const SweepObserver &observer = {});

struct RunSummary {
  std::vector<EvalReport> reports;
  double mean_auc = 0.0;
  double sd_auc = 0.0; // sample standard deviation, 0 for a single run
};

std::pair<double, double> mean_sd(const std::vector<double> &values);

/// `runs` independent chains, run r driven by rng.split(r).
RunSummary run_repeated(const LinkSplit &split, const HyperParams &hp,
                        const ExperimentConfig &cfg, const RngStream &rng,
                        int runs);

struct CostRatioPoint {
  double ratio = 1.0;
  double auc = 0.0; // mean over runs
  double sd = 0.0;
};

/// One experiment set per ratio with c_pos = ratio * c_neg. Run r of every
/// ratio uses the same stream rng.split(r), so ratios are paired.
std::vector<CostRatioPoint>
sweep_cost_ratio(const LinkSplit &split, const HyperParams &hp_base,
                 const std::vector<double> &ratios,
                 const ExperimentConfig &cfg, const RngStream &rng,
                 int runs = 1);

struct RelationReport {
  std::vector<int> relation_ids;
  std::vector<double> aucs;
  double mean_auc = 0.0;
};

/// "single" setting: each relation is split densely and trained on its
/// own; the reported AUC is the unweighted mean across relations.
RelationReport run_single_relation_mode(const Network &net, double train_frac,
                                        const HyperParams &hp,
                                        const ExperimentConfig &cfg,
                                        const RngStream &rng);

/// CSV files k_trace.csv, auc_trace.csv, roc.csv, phase_times.csv in dir.
void write_report_csvs(const EvalReport &report,
                       const std::filesystem::path &dir);

/// Phase table with seconds and shares of the total, plus AUC and mean K.
void print_summary(std::ostream &out, const EvalReport &report);

} // namespace dlfrm
