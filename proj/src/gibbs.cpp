#include "dlfrm/gibbs.hpp"

#include "dlfrm/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace dlfrm {

void ChainConfig::validate() const {
  if (n_iters < 1)
    throw ParameterError("n_iters must be positive");
  if (burn_in < 0 || burn_in >= n_iters)
    throw ParameterError("burn_in must lie in [0, n_iters)");
  if (thin < 1)
    throw ParameterError("thin must be positive");
}

TrainingSet::TrainingSet(int n_entities, std::vector<Observation> links)
    : n_entities_(n_entities), links_(std::move(links)),
      out_(static_cast<std::size_t>(n_entities)),
      in_(static_cast<std::size_t>(n_entities)) {
  for (std::size_t l = 0; l < links_.size(); ++l) {
    const auto &o = links_[l];
    if (o.src < 0 || o.dst < 0 || o.src >= n_entities || o.dst >= n_entities)
      throw RangeError("training link references an unknown entity");
    if (o.src == o.dst)
      throw UsageError("self-loops are not modelled");
    out_[static_cast<std::size_t>(o.src)].push_back(static_cast<int>(l));
    in_[static_cast<std::size_t>(o.dst)].push_back(static_cast<int>(l));
  }
}

void refresh_omega(const LatentState &state, SuffStats &stats,
                   const TrainingSet &train) {
  const Eigen::MatrixXd zu = state.z * state.weights();
  stats.omega.resize(static_cast<Eigen::Index>(train.size()));
  for (std::size_t l = 0; l < train.size(); ++l) {
    const auto &o = train[l];
    stats.omega[static_cast<Eigen::Index>(l)] =
        zu.row(o.src).dot(state.z.row(o.dst));
  }
}

void SuffStats::rebuild(const LatentState &state, const TrainingSet &train) {
  feature_counts = state.z.colwise().sum().transpose();
  refresh_omega(state, *this, train);
}

SuffStats make_stats(const LatentState &state, const TrainingSet &train) {
  SuffStats stats;
  stats.rebuild(state, train);
  return stats;
}

double cache_error(const LatentState &state, const SuffStats &stats,
                   const TrainingSet &train) {
  SuffStats fresh = make_stats(state, train);
  double err = 0.0;
  if (fresh.feature_counts.size() != stats.feature_counts.size() ||
      fresh.omega.size() != stats.omega.size())
    return std::numeric_limits<double>::infinity();
  if (fresh.feature_counts.size() > 0)
    err = (fresh.feature_counts - stats.feature_counts).cwiseAbs().maxCoeff();
  if (fresh.omega.size() > 0)
    err = std::max(err, (fresh.omega - stats.omega).cwiseAbs().maxCoeff());
  return err;
}

LatentState init_chain(const TrainingSet &train, const HyperParams &hp,
                       RngStream &rng) {
  hp.validate();
  LatentState s;
  s.structure = hp.structure;
  s.z = sample_ibp(train.n_entities(), hp.alpha, rng);
  s.eta.resize(s.weight_dim());
  const double sd = 1.0 / std::sqrt(hp.nu_sq);
  for (Eigen::Index d = 0; d < s.eta.size(); ++d)
    s.eta[d] = sd * rng.normal();
  s.lambda = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train.size()));
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Training links incident to one entity, with the per-feature change of
// omega caused by switching z_nk on: omega(z_nk) = base + z_nk * delta(k).
struct EntityView {
  std::vector<int> links;
  Eigen::MatrixXd delta; // links x K
  Eigen::VectorXd kappa;
  Eigen::VectorXd rho;
};

EntityView entity_view(const LatentState &state, int n,
                       const TrainingSet &train, const HyperParams &hp) {
  EntityView v;
  const auto out = train.outgoing(n);
  const auto in = train.incoming(n);
  v.links.assign(out.begin(), out.end());
  v.links.insert(v.links.end(), in.begin(), in.end());
  const auto deg = static_cast<Eigen::Index>(v.links.size());
  const int k = state.K();
  v.delta.resize(deg, k);
  v.kappa.resize(deg);
  v.rho.resize(deg);

  Eigen::MatrixXd partners(deg, k);
  for (Eigen::Index r = 0; r < deg; ++r) {
    const auto &o = train[static_cast<std::size_t>(v.links[static_cast<std::size_t>(r)])];
    partners.row(r) = state.z.row(r < static_cast<Eigen::Index>(out.size()) ? o.dst : o.src);
    const auto c = augmented_coeffs(
        o.sign, state.lambda[v.links[static_cast<std::size_t>(r)]], hp);
    v.kappa[r] = c.kappa;
    v.rho[r] = c.rho;
  }
  const auto n_out = static_cast<Eigen::Index>(out.size());
  if (state.structure == Structure::diagonal) {
    v.delta = partners * state.eta.asDiagonal();
  } else {
    Eigen::Map<const WeightMatrix> u(state.eta.data(), k, k);
    // out link (n, j): delta_k = (U z_j)_k; in link (i, n): (z_i U)_k.
    v.delta.topRows(n_out) = partners.topRows(n_out) * u.transpose();
    v.delta.bottomRows(deg - n_out) = partners.bottomRows(deg - n_out) * u;
  }
  return v;
}

// Augmented log-likelihood change when z_nk goes from 0 to 1.
double likelihood_log_ratio(const EntityView &v, const SuffStats &stats,
                            double current, int k) {
  double sum = 0.0;
  for (std::size_t r = 0; r < v.links.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const double d = v.delta(row, k);
    if (d == 0.0)
      continue;
    const double w0 = stats.omega[v.links[r]] - current * d;
    const double w1 = w0 + d;
    sum += v.kappa[row] * d - 0.5 * v.rho[row] * (w1 * w1 - w0 * w0);
  }
  return sum;
}

double feature_log_odds(const LatentState &state, int n, int k,
                        const EntityView &v, const SuffStats &stats) {
  const double current = state.z(n, k);
  const double others = stats.feature_counts[k] - current;
  if (others <= 0.0)
    return -std::numeric_limits<double>::infinity();
  const double prior = std::log(others) - std::log(state.n_entities() - others);
  return prior + likelihood_log_ratio(v, stats, current, k);
}

double log_poisson(int k, double rate) {
  return k * std::log(rate) - rate - std::lgamma(k + 1.0);
}

// Gaussian pieces of the new-weight conditional for links leaving (out) or
// entering (in) entity n: precision A = sum rho z z^T, shift b = sum
// (kappa - rho omega) z, z the partner's features.
struct BirthBlock {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

BirthBlock birth_block(const LatentState &state, std::span<const int> links,
                       bool outgoing, const SuffStats &stats,
                       const TrainingSet &train, const HyperParams &hp) {
  const int k = state.K();
  BirthBlock blk{Eigen::MatrixXd::Zero(k, k), Eigen::VectorXd::Zero(k)};
  for (int l : links) {
    const auto &o = train[static_cast<std::size_t>(l)];
    const auto zp = state.z.row(outgoing ? o.dst : o.src).transpose();
    const auto c = augmented_coeffs(o.sign, state.lambda[l], hp);
    blk.a.noalias() += c.rho * zp * zp.transpose();
    blk.b += (c.kappa - c.rho * stats.omega[l]) * zp;
  }
  return blk;
}

// log |Sigma|^{1/2} nu^D exp(mu^T Sigma^{-1} mu / 2) restricted to the
// block's coordinates for `count` new features. The count identical
// feature rows couple only through their mean, so the count*K system
// reduces to the K x K matrix nu^2 I + count A.
double birth_block_log_factor(const BirthBlock &blk, int count,
                              const HyperParams &hp) {
  const auto k = blk.a.rows();
  if (k == 0 || count == 0)
    return 0.0;
  Eigen::MatrixXd m = count * blk.a;
  m.diagonal().array() += hp.nu_sq;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("new-feature precision is not positive definite");
  const double log_det_m =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double log_det_ratio = log_det_m - static_cast<double>(k) * std::log(hp.nu_sq);
  const double quad = count * blk.b.dot(llt.solve(blk.b));
  return -0.5 * log_det_ratio + 0.5 * quad;
}

// count x K block of new weights sharing precision nu^2 I + J (x) A and
// shift 1 (x) b; returned as a count x K matrix.
Eigen::MatrixXd draw_birth_block(const BirthBlock &blk, int count,
                                 const HyperParams &hp, RngStream &rng) {
  const auto k = blk.a.rows();
  const auto dim = count * k;
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(dim, dim) * hp.nu_sq;
  Eigen::VectorXd shift(dim);
  for (int r = 0; r < count; ++r) {
    shift.segment(r * k, k) = blk.b;
    for (int c = 0; c < count; ++c)
      precision.block(r * k, c * k, k, k) += blk.a;
  }
  const Eigen::VectorXd draw = sample_mvn_canonical(shift, precision, rng);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(draw.data(), count, k);
}

std::vector<std::vector<int>> active_lists(const FeatureMatrix &z) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index k = 0; k < z.cols(); ++k)
      if (z(i, k) != 0.0)
        out[static_cast<std::size_t>(i)].push_back(static_cast<int>(k));
  return out;
}

} // namespace

double active_feature_log_odds(const LatentState &state, int n, int k,
                               const SuffStats &stats,
                               const TrainingSet &train,
                               const HyperParams &hp) {
  return feature_log_odds(state, n, k, entity_view(state, n, train, hp), stats);
}

void resample_active_features(LatentState &state, int n, SuffStats &stats,
                              const TrainingSet &train, const HyperParams &hp,
                              RngStream &rng) {
  if (state.K() == 0)
    return;
  const EntityView v = entity_view(state, n, train, hp);
  for (int k = 0; k < state.K(); ++k) {
    const double log_odds = feature_log_odds(state, n, k, v, stats);
    const double p_on = log_odds == -std::numeric_limits<double>::infinity()
                            ? 0.0
                            : sigmoid(log_odds);
    const double next = rng.uniform() < p_on ? 1.0 : 0.0;
    const double change = next - state.z(n, k);
    if (change == 0.0)
      continue;
    state.z(n, k) = next;
    stats.feature_counts[k] += change;
    for (std::size_t r = 0; r < v.links.size(); ++r)
      stats.omega[v.links[r]] += change * v.delta(static_cast<Eigen::Index>(r), k);
  }
}

Eigen::VectorXd new_feature_log_masses(const LatentState &state, int n,
                                       const SuffStats &stats,
                                       const TrainingSet &train,
                                       const HyperParams &hp) {
  const double rate = hp.alpha / state.n_entities();
  Eigen::VectorXd log_mass(hp.k_max + 1);
  if (state.structure == Structure::diagonal) {
    // New diagonal weights never touch a link: the prior is the conditional.
    for (int c = 0; c <= hp.k_max; ++c)
      log_mass[c] = log_poisson(c, rate);
    return log_mass;
  }
  const BirthBlock out = birth_block(state, train.outgoing(n), true, stats, train, hp);
  const BirthBlock in = birth_block(state, train.incoming(n), false, stats, train, hp);
  for (int c = 0; c <= hp.k_max; ++c)
    log_mass[c] = log_poisson(c, rate) + birth_block_log_factor(out, c, hp) +
                  birth_block_log_factor(in, c, hp);
  return log_mass;
}

int sample_new_features(LatentState &state, int n, SuffStats &stats,
                        const TrainingSet &train, const HyperParams &hp,
                        RngStream &rng) {
  const Eigen::VectorXd log_mass =
      new_feature_log_masses(state, n, stats, train, hp);
  const Eigen::VectorXd mass = (log_mass.array() - log_mass.maxCoeff()).exp();
  double u = rng.uniform() * mass.sum();
  int count = 0;
  for (; count < hp.k_max; ++count) {
    u -= mass[count];
    if (u < 0.0)
      break;
  }
  if (count == 0)
    return 0;

  const int k_old = state.K();
  const int k_new = k_old + count;
  const double sd = 1.0 / std::sqrt(hp.nu_sq);

  if (state.structure == Structure::diagonal) {
    state.eta.conservativeResize(k_new);
    for (int c = k_old; c < k_new; ++c)
      state.eta[c] = sd * rng.normal();
  } else {
    const BirthBlock out = birth_block(state, train.outgoing(n), true, stats, train, hp);
    const BirthBlock in = birth_block(state, train.incoming(n), false, stats, train, hp);
    const Eigen::MatrixXd rows = draw_birth_block(out, count, hp, rng); // U[new, old]
    const Eigen::MatrixXd cols = draw_birth_block(in, count, hp, rng);  // U[old, new]^T

    WeightMatrix u = WeightMatrix::Zero(k_new, k_new);
    u.topLeftCorner(k_old, k_old) = state.weights();
    u.bottomLeftCorner(count, k_old) = rows;
    u.topRightCorner(k_old, count) = cols.transpose();
    for (int r = k_old; r < k_new; ++r)
      for (int c = k_old; c < k_new; ++c)
        u(r, c) = sd * rng.normal();

    for (int l : train.outgoing(n))
      stats.omega[l] += rows.colwise().sum().dot(
          state.z.row(train[static_cast<std::size_t>(l)].dst));
    for (int l : train.incoming(n))
      stats.omega[l] += cols.colwise().sum().dot(
          state.z.row(train[static_cast<std::size_t>(l)].src));
    state.eta = Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
  }

  state.z.conservativeResize(Eigen::NoChange, k_new);
  state.z.rightCols(count).setZero();
  state.z.row(n).tail(count).setOnes();
  stats.feature_counts.conservativeResize(k_new);
  stats.feature_counts.tail(count).setOnes();
  return count;
}

WeightPosterior weight_posterior(const LatentState &state,
                                 const TrainingSet &train,
                                 const HyperParams &hp) {
  const int k = state.K();
  const Eigen::Index dim = state.weight_dim();
  WeightPosterior post{Eigen::MatrixXd::Identity(dim, dim) * hp.nu_sq,
                       Eigen::VectorXd::Zero(dim)};
  const auto active = active_lists(state.z);

  if (state.structure == Structure::diagonal) {
    std::vector<int> both;
    for (std::size_t l = 0; l < train.size(); ++l) {
      const auto &o = train[l];
      const auto c = augmented_coeffs(o.sign, state.lambda[static_cast<Eigen::Index>(l)], hp);
      both.clear();
      for (int a : active[static_cast<std::size_t>(o.src)])
        if (state.z(o.dst, a) != 0.0)
          both.push_back(a);
      for (int a : both) {
        post.shift[a] += c.kappa;
        for (int b : both)
          post.precision(a, b) += c.rho;
      }
    }
    return post;
  }

  // Group links by source: sum_j rho (z_i z_i^T) (x) (z_j z_j^T)
  // = (z_i z_i^T) (x) B_i with B_i = sum_j rho z_j z_j^T.
  Eigen::MatrixXd b_src(k, k);
  for (int i = 0; i < train.n_entities(); ++i) {
    const auto &act_i = active[static_cast<std::size_t>(i)];
    const auto out = train.outgoing(i);
    if (act_i.empty() || out.empty())
      continue;
    b_src.setZero();
    for (int l : out) {
      const auto &o = train[static_cast<std::size_t>(l)];
      const auto c = augmented_coeffs(o.sign, state.lambda[l], hp);
      const auto &act_j = active[static_cast<std::size_t>(o.dst)];
      for (int a : act_j) {
        for (int b : act_j)
          b_src(a, b) += c.rho;
        for (int r : act_i)
          post.shift[Eigen::Index{r} * k + a] += c.kappa;
      }
    }
    for (int r : act_i)
      for (int s : act_i)
        post.precision.block(Eigen::Index{r} * k, Eigen::Index{s} * k, k, k) += b_src;
  }
  return post;
}

void resample_weights(LatentState &state, SuffStats &stats,
                      const TrainingSet &train, const HyperParams &hp,
                      RngStream &rng) {
  const WeightPosterior post = weight_posterior(state, train, hp);
  state.eta = sample_mvn_canonical(post.shift, post.precision, rng);
  refresh_omega(state, stats, train);
}

void resample_lambda(LatentState &state, const SuffStats &stats,
                     const TrainingSet &train, const HyperParams &hp,
                     RngStream &rng) {
  state.lambda.resize(static_cast<Eigen::Index>(train.size()));
  for (std::size_t l = 0; l < train.size(); ++l) {
    const auto idx = static_cast<Eigen::Index>(l);
    const auto &o = train[l];
    const double c = hp.cost(o.sign);
    if (hp.loss == Loss::logistic) {
      state.lambda[idx] =
          sample_polya_gamma({c, stats.omega[idx]}, rng, hp.pg_terms);
    } else {
      const double gap = std::max(
          std::abs(hp.ell - o.sign * stats.omega[idx]), kHingeGapFloor);
      state.lambda[idx] = 1.0 / sample_inverse_gaussian(1.0 / (c * gap), 1.0, rng);
    }
  }
}

std::vector<int> compact(LatentState &state, SuffStats &stats) {
  std::vector<int> keep;
  for (int k = 0; k < state.K(); ++k)
    if (stats.feature_counts[k] > 0.0)
      keep.push_back(k);
  if (static_cast<int>(keep.size()) == state.K())
    return keep;
  const auto kk = static_cast<Eigen::Index>(keep.size());
  FeatureMatrix z(state.n_entities(), kk);
  Eigen::VectorXd counts(kk);
  Eigen::VectorXd eta(state.structure == Structure::full ? kk * kk : kk);
  const WeightMatrix u = state.weights();
  for (Eigen::Index a = 0; a < kk; ++a) {
    z.col(a) = state.z.col(keep[static_cast<std::size_t>(a)]);
    counts[a] = stats.feature_counts[keep[static_cast<std::size_t>(a)]];
    if (state.structure == Structure::diagonal) {
      eta[a] = state.eta[keep[static_cast<std::size_t>(a)]];
      continue;
    }
    for (Eigen::Index b = 0; b < kk; ++b)
      eta[a * kk + b] = u(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
  }
  state.z = std::move(z);
  state.eta = std::move(eta);
  stats.feature_counts = std::move(counts);
  return keep;
}

double train_log_pseudo_lik(const SuffStats &stats, const TrainingSet &train,
                            const HyperParams &hp) {
  double sum = 0.0;
  for (std::size_t l = 0; l < train.size(); ++l)
    sum += log_pseudo_lik(stats.omega[static_cast<Eigen::Index>(l)],
                          train[l].sign, hp);
  return sum;
}

std::vector<int> sweep_features(LatentState &state, SuffStats &stats,
                                const TrainingSet &train,
                                const HyperParams &hp, RngStream &rng,
                                bool compact_after) {
  std::vector<int> origin(static_cast<std::size_t>(state.K()));
  std::iota(origin.begin(), origin.end(), 0);
  for (int n = 0; n < state.n_entities(); ++n) {
    resample_active_features(state, n, stats, train, hp, rng);
    const int born = sample_new_features(state, n, stats, train, hp, rng);
    origin.insert(origin.end(), static_cast<std::size_t>(born), -1);
  }
  if (!compact_after)
    return origin;
  std::vector<int> kept;
  for (int k : compact(state, stats))
    kept.push_back(origin[static_cast<std::size_t>(k)]);
  return kept;
}

SweepDiagnostics gibbs_sweep(LatentState &state, SuffStats &stats,
                             const TrainingSet &train, const HyperParams &hp,
                             const ChainConfig &cfg, RngStream &rng) {
  SweepDiagnostics diag;
  auto t0 = Clock::now();
  sweep_features(state, stats, train, hp, rng, cfg.compact_every_sweep);
  diag.times.sample_z = seconds_since(t0);

  t0 = Clock::now();
  resample_weights(state, stats, train, hp, rng);
  diag.times.sample_u = seconds_since(t0);

  t0 = Clock::now();
  resample_lambda(state, stats, train, hp, rng);
  diag.times.sample_lambda = seconds_since(t0);

  diag.K = state.K();
  diag.log_pseudo_lik = train_log_pseudo_lik(stats, train, hp);
  return diag;
}

} // namespace dlfrm
