#include "dlfrm/synthetic.hpp"

#include "dlfrm/errors.hpp"
#include "dlfrm/eval.hpp"

namespace dlfrm {
namespace {

double mean_link_prob(const Eigen::MatrixXd &rest, double bias) {
  const Eigen::Index n = rest.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j)
        total += sigmoid(rest(i, j) + bias);
  return total / static_cast<double>(n * (n - 1));
}

} // namespace

void SyntheticSpec::validate() const {
  if (n_entities < 2)
    throw ParameterError("synthetic network needs at least 2 entities");
  if (communities < 0)
    throw ParameterError("community count must be non-negative");
  if (!(membership >= 0.0 && membership <= 1.0))
    throw ParameterError("membership must lie in [0, 1]");
  if (!(spread >= 0.0))
    throw ParameterError("spread must be non-negative");
  if (!(density > 0.0 && density < 1.0))
    throw ParameterError("density must lie in (0, 1)");
}

SyntheticNetwork generate_synthetic(const SyntheticSpec &spec, RngStream &rng) {
  spec.validate();
  const int n = spec.n_entities;
  const int k = spec.communities + 1;

  SyntheticNetwork syn;
  LatentState &t = syn.truth;
  t.structure = Structure::full;
  t.z = FeatureMatrix::Zero(n, k);
  t.z.col(0).setOnes();
  for (int i = 0; i < n; ++i)
    for (int c = 1; c < k; ++c)
      t.z(i, c) = rng.uniform() < spec.membership ? 1.0 : 0.0;

  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(k, k);
  for (int a = 1; a < k; ++a)
    for (int b = 1; b < k; ++b)
      u(a, b) = a == b ? spec.strength : spec.spread * rng.normal();
  for (int c = 1; c < k; ++c) {
    u(0, c) = spec.spread * rng.normal();
    u(c, 0) = spec.spread * rng.normal();
  }

  const Eigen::MatrixXd rest = t.z * u * t.z.transpose();
  double lo = -60.0;
  double hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_link_prob(rest, mid) < spec.density ? lo : hi) = mid;
  }
  u(0, 0) = 0.5 * (lo + hi);

  t.eta.resize(Eigen::Index{k} * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      t.eta[Eigen::Index{a} * k + b] = u(a, b);
  t.lambda = Eigen::VectorXd();

  syn.omega = t.z * u * t.z.transpose();
  syn.omega.diagonal().setZero();
  syn.net.n_entities = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.uniform() < sigmoid(syn.omega(i, j)))
        syn.net.links.push_back({i, j, 1, -1});
  return syn;
}

double oracle_auc(const SyntheticNetwork &syn,
                  const std::vector<Observation> &obs) {
  Eigen::VectorXd scores(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t p = 0; p < obs.size(); ++p)
    scores[static_cast<Eigen::Index>(p)] = syn.omega(obs[p].src, obs[p].dst);
  return auc(scores, labels_of(obs));
}

} // namespace dlfrm
