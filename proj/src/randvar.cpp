#include "dlfrm/randvar.hpp"

#include "dlfrm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

namespace dlfrm {

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RngStream RngStream::split(std::uint64_t index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_),
                    static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  RngStream out(seed_);
  out.engine_.seed(seq);
  return out;
}

double RngStream::uniform() {
  return std::generate_canonical<double, 53>(engine_);
}

double RngStream::normal() {
  std::normal_distribution<double> dist;
  return dist(engine_);
}

double RngStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::string RngStream::serialize() const {
  std::ostringstream os;
  os << seed_ << ' ' << engine_;
  return os.str();
}

RngStream RngStream::restore(const std::string &text) {
  std::istringstream is(text);
  std::uint64_t seed = 0;
  is >> seed;
  RngStream out(seed);
  is >> out.engine_;
  if (!is)
    throw CheckpointError("malformed rng state");
  return out;
}

double polya_gamma_mean(double b, double z) {
  const double az = std::abs(z);
  if (az < 1e-6)
    return b * (0.25 - az * az / 48.0);
  return b / (2.0 * az) * std::tanh(az / 2.0);
}

double sample_polya_gamma(const PolyaGammaParams &params, RngStream &rng,
                          int terms) {
  if (!(params.b > 0.0))
    throw ParameterError("PG shape b must be positive");
  if (terms < 1)
    throw ParameterError("PG series needs at least one term");
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double tilt = params.z * params.z / (4.0 * pi2);

  std::gamma_distribution<double> gamma(params.b, 1.0);
  double sum = 0.0;
  double head_mean = 0.0;
  for (int d = 1; d <= terms; ++d) {
    const double h = d - 0.5;
    const double denom = h * h + tilt;
    sum += gamma(rng.engine()) / denom;
    head_mean += params.b / denom;
  }
  const double scale = 1.0 / (2.0 * pi2);
  const double tail = std::max(
      0.0, polya_gamma_mean(params.b, params.z) - scale * head_mean);
  return scale * sum + tail;
}

double sample_inverse_gaussian(double mu, double shape, RngStream &rng) {
  if (!(mu > 0.0) || !(shape > 0.0))
    throw ParameterError("inverse Gaussian needs mu > 0 and shape > 0");
  const double v = rng.normal();
  const double y = v * v;
  const double my = mu * y;
  // Smaller root of the chi-square transform, in cancellation-free form.
  double x = mu * 2.0 * shape /
             (2.0 * shape + my + std::sqrt(my * (my + 4.0 * shape)));
  if (!(x > 0.0))
    x = std::numeric_limits<double>::min();
  if (rng.uniform() <= mu / (mu + x))
    return x;
  return mu * mu / x;
}

double sample_gig_half(double a, double b, RngStream &rng) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ParameterError("GIG(1/2, a, b) needs a > 0 and b > 0");
  return 1.0 / sample_inverse_gaussian(std::sqrt(a / b), a, rng);
}

Eigen::VectorXd sample_mvn_canonical(const Eigen::VectorXd &shift,
                                     const Eigen::MatrixXd &precision,
                                     RngStream &rng,
                                     Eigen::VectorXd *mean_out) {
  const Eigen::Index d = precision.rows();
  if (precision.cols() != d || shift.size() != d)
    throw ParameterError("MVN dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw NumericalError("precision matrix is not positive definite (dim " +
                         std::to_string(d) + ")");
  Eigen::VectorXd mean = llt.solve(shift);
  Eigen::VectorXd eps(d);
  for (Eigen::Index i = 0; i < d; ++i)
    eps[i] = rng.normal();
  // x = L^{-T} eps has covariance (L L^T)^{-1}.
  Eigen::VectorXd x = llt.matrixU().solve(eps);
  if (mean_out)
    *mean_out = mean;
  return mean + x;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd &mean,
                           const Eigen::MatrixXd &precision, RngStream &rng) {
  if (mean.size() != precision.rows())
    throw ParameterError("MVN dimension mismatch");
  return sample_mvn_canonical(precision * mean, precision, rng);
}

long sample_poisson(double rate, RngStream &rng) {
  if (!(rate >= 0.0))
    throw ParameterError("Poisson rate must be non-negative");
  if (rate == 0.0)
    return 0;
  std::poisson_distribution<long> dist(rate);
  return dist(rng.engine());
}

Eigen::MatrixXd left_ordered(const Eigen::MatrixXd &z) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(z.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     for (Eigen::Index r = 0; r < z.rows(); ++r) {
                       if (z(r, a) != z(r, b))
                         return z(r, a) > z(r, b);
                     }
                     return false;
                   });
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (std::size_t c = 0; c < order.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = z.col(order[c]);
  return out;
}

Eigen::MatrixXd sample_ibp(int n_entities, double alpha, RngStream &rng) {
  if (n_entities < 1)
    throw ParameterError("IBP needs at least one entity");
  if (!(alpha > 0.0))
    throw ParameterError("IBP concentration must be positive");
  std::vector<std::vector<int>> dishes; // per dish: customers who took it
  for (int i = 0; i < n_entities; ++i) {
    const double customers = i + 1.0;
    for (auto &takers : dishes) {
      if (rng.uniform() < static_cast<double>(takers.size()) / customers)
        takers.push_back(i);
    }
    const long fresh = sample_poisson(alpha / customers, rng);
    for (long k = 0; k < fresh; ++k)
      dishes.push_back({i});
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n_entities,
                                            static_cast<Eigen::Index>(dishes.size()));
  for (std::size_t k = 0; k < dishes.size(); ++k)
    for (int i : dishes[k])
      z(i, static_cast<Eigen::Index>(k)) = 1.0;
  return left_ordered(z);
}

} // namespace dlfrm
