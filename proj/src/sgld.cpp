#include "dlfrm/sgld.hpp"

#include "dlfrm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dlfrm {

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::polynomial ? "polynomial" : "adagrad";
}

ScheduleKind parse_schedule_kind(const std::string &text) {
  if (text == "polynomial" || text == "poly")
    return ScheduleKind::polynomial;
  if (text == "adagrad")
    return ScheduleKind::adagrad;
  throw UsageError("unknown stepsize schedule `" + text + "`");
}

double SgldSchedule::polynomial_stepsize(long t) const {
  return a * std::pow(b + static_cast<double>(t), -gamma);
}

void SgldSchedule::validate() const {
  if (!(a > 0.0) || !(b >= 0.0) || !(gamma >= 0.0))
    throw ParameterError("polynomial schedule needs a > 0, b >= 0, gamma >= 0");
  if (kind == ScheduleKind::polynomial && !(b > 0.0) && gamma > 0.0)
    throw ParameterError("polynomial schedule with b = 0 diverges at t = 0");
  if (!(adagrad_base > 0.0) || !(max_stepsize > 0.0))
    throw ParameterError("adagrad stepsizes must be positive");
  if (inner_iters < 0)
    throw ParameterError("inner SGLD iterations must be non-negative");
}

Minibatch draw_minibatch(std::size_t n_links, int m, RngStream &rng) {
  Minibatch batch;
  std::vector<int> all(n_links);
  std::iota(all.begin(), all.end(), 0);
  if (m <= 0 || static_cast<std::size_t>(m) >= n_links) {
    batch.links = std::move(all);
  } else {
    batch.links.reserve(static_cast<std::size_t>(m));
    std::sample(all.begin(), all.end(), std::back_inserter(batch.links),
                m, rng.engine());
  }
  batch.scale = batch.links.empty()
                    ? 1.0
                    : static_cast<double>(n_links) /
                          static_cast<double>(batch.links.size());
  return batch;
}

WeightGradient::WeightGradient(const LatentState &state,
                               const TrainingSet &train, const HyperParams &hp)
    : train_(&train), structure_(state.structure), k_(state.K()),
      dim_(state.weight_dim()), nu_sq_(hp.nu_sq),
      active_(static_cast<std::size_t>(state.n_entities())),
      kappa_(static_cast<Eigen::Index>(train.size())),
      rho_(static_cast<Eigen::Index>(train.size())) {
  for (int i = 0; i < state.n_entities(); ++i)
    for (int k = 0; k < k_; ++k)
      if (state.z(i, k) != 0.0)
        active_[static_cast<std::size_t>(i)].push_back(k);
  for (std::size_t l = 0; l < train.size(); ++l) {
    const auto idx = static_cast<Eigen::Index>(l);
    const auto c = augmented_coeffs(train[l].sign, state.lambda[idx], hp);
    kappa_[idx] = c.kappa;
    rho_[idx] = c.rho;
  }
  Eigen::VectorXd row = Eigen::VectorXd::Constant(dim_, nu_sq_);
  for (std::size_t l = 0; l < train.size(); ++l) {
    const auto &o = train[l];
    const double r = rho_[static_cast<Eigen::Index>(l)];
    const auto &ai = active_[static_cast<std::size_t>(o.src)];
    const auto &aj = active_[static_cast<std::size_t>(o.dst)];
    if (structure_ == Structure::diagonal) {
      std::vector<int> shared;
      std::set_intersection(ai.begin(), ai.end(), aj.begin(), aj.end(),
                            std::back_inserter(shared));
      for (int a : shared)
        row[a] += r * static_cast<double>(shared.size());
      continue;
    }
    const double width = r * static_cast<double>(ai.size() * aj.size());
    for (int a : ai)
      for (int b : aj)
        row[Eigen::Index{a} * k_ + b] += width;
  }
  stable_ = row.cwiseInverse();
}

double WeightGradient::omega(const Eigen::VectorXd &eta, int link) const {
  const auto &o = (*train_)[static_cast<std::size_t>(link)];
  const auto &ai = active_[static_cast<std::size_t>(o.src)];
  const auto &aj = active_[static_cast<std::size_t>(o.dst)];
  double w = 0.0;
  if (structure_ == Structure::diagonal) {
    for (int a : ai)
      if (std::binary_search(aj.begin(), aj.end(), a))
        w += eta[a];
    return w;
  }
  for (int a : ai)
    for (int b : aj)
      w += eta[Eigen::Index{a} * k_ + b];
  return w;
}

Eigen::VectorXd WeightGradient::gradient(const Eigen::VectorXd &eta,
                                         const Minibatch &batch) const {
  if (eta.size() != dim_)
    throw UsageError("weight vector does not match the feature dimension");
  Eigen::VectorXd data = Eigen::VectorXd::Zero(dim_);
  for (int l : batch.links) {
    const auto &o = (*train_)[static_cast<std::size_t>(l)];
    const double r = kappa_[l] - rho_[l] * omega(eta, l);
    const auto &ai = active_[static_cast<std::size_t>(o.src)];
    const auto &aj = active_[static_cast<std::size_t>(o.dst)];
    if (structure_ == Structure::diagonal) {
      for (int a : ai)
        if (std::binary_search(aj.begin(), aj.end(), a))
          data[a] += r;
      continue;
    }
    for (int a : ai)
      for (int b : aj)
        data[Eigen::Index{a} * k_ + b] += r;
  }
  return -nu_sq_ * eta + batch.scale * data;
}

Eigen::VectorXd sgld_step(const Eigen::VectorXd &eta, const Minibatch &batch,
                          const WeightGradient &grad, SgldSchedule &sched,
                          RngStream &rng) {
  if (batch.links.empty())
    throw UsageError("SGLD step needs a non-empty minibatch");
  const Eigen::VectorXd g = grad.gradient(eta, batch);
  Eigen::VectorXd eps(g.size());
  if (sched.kind == ScheduleKind::polynomial) {
    eps.setConstant(sched.polynomial_stepsize(sched.step));
  } else {
    if (sched.accumulator.size() != g.size())
      sched.accumulator = Eigen::VectorXd::Zero(g.size());
    sched.accumulator.array() += g.array().square();
    eps = (sched.adagrad_base /
           (1e-8 + sched.accumulator.array().sqrt()))
              .min(sched.max_stepsize)
              .matrix();
  }
  if (sched.curvature_cap)
    eps = eps.cwiseMin(grad.stable_stepsize());
  ++sched.step;
  Eigen::VectorXd next = eta + 0.5 * eps.cwiseProduct(g);
  if (sched.inject_noise)
    for (Eigen::Index d = 0; d < next.size(); ++d)
      next[d] += std::sqrt(eps[d]) * rng.normal();
  return next;
}

Eigen::VectorXd sgld_step(const Eigen::VectorXd &eta, const Minibatch &batch,
                          const LatentState &state, const TrainingSet &train,
                          const HyperParams &hp, SgldSchedule &sched,
                          RngStream &rng) {
  return sgld_step(eta, batch, WeightGradient(state, train, hp), sched, rng);
}

void sgld_weights(LatentState &state, SuffStats &stats,
                  const TrainingSet &train, const HyperParams &hp,
                  SgldSchedule &sched, RngStream &rng) {
  if (sched.inner_iters == 0)
    return;
  const WeightGradient grad(state, train, hp);
  for (int it = 0; it < sched.inner_iters; ++it) {
    const Minibatch batch = draw_minibatch(train.size(), sched.batch_size, rng);
    state.eta = sgld_step(state.eta, batch, grad, sched, rng);
  }
  refresh_omega(state, stats, train);
}

void remap_accumulator(SgldSchedule &sched, Structure structure,
                       const std::vector<int> &origin, int k_before) {
  if (sched.accumulator.size() == 0)
    return;
  const auto k = static_cast<Eigen::Index>(origin.size());
  const Eigen::VectorXd old = sched.accumulator;
  if (structure == Structure::diagonal) {
    sched.accumulator = Eigen::VectorXd::Zero(k);
    for (Eigen::Index a = 0; a < k; ++a)
      if (origin[static_cast<std::size_t>(a)] >= 0)
        sched.accumulator[a] = old[origin[static_cast<std::size_t>(a)]];
    return;
  }
  sched.accumulator = Eigen::VectorXd::Zero(k * k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const int oa = origin[static_cast<std::size_t>(a)];
    if (oa < 0)
      continue;
    for (Eigen::Index b = 0; b < k; ++b) {
      const int ob = origin[static_cast<std::size_t>(b)];
      if (ob >= 0)
        sched.accumulator[a * k + b] = old[Eigen::Index{oa} * k_before + ob];
    }
  }
}

} // namespace dlfrm
