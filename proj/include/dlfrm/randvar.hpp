#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

namespace dlfrm {

/// Seeded pseudo-random stream. Identical seed and call sequence yield an
/// identical draw sequence. Single owner; use split() for parallel workers.
class RngStream {
public:
  using engine_type = std::mt19937_64;

  explicit RngStream(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  /// Independent stream derived from (seed, index).
  RngStream split(std::uint64_t index) const;

  double uniform();       // [0, 1)
  double normal();        // N(0, 1)
  double gamma(double shape);

  engine_type &engine() noexcept { return engine_; }

  /// Textual engine state, restorable bit-exactly with restore().
  std::string serialize() const;
  static RngStream restore(const std::string &text);

  friend bool operator==(const RngStream &a, const RngStream &b) {
    return a.seed_ == b.seed_ && a.engine_ == b.engine_;
  }

private:
  std::uint64_t seed_;
  engine_type engine_;
};

struct PolyaGammaParams {
  double b = 1.0; // shape
  double z = 0.0; // tilt
};

struct GigParams {
  double p = 0.5;
  double a = 1.0;
  double b = 1.0;
};

/// Number of gamma terms kept in the series representation of PG draws.
inline constexpr int kPolyaGammaTerms = 200;

/// Analytic mean of PG(b, z): b/(2z) tanh(z/2), b/4 at z = 0.
double polya_gamma_mean(double b, double z);

/// PG(b, z) by truncated sum of gammas with the truncated tail replaced by
/// its analytic mean.
double sample_polya_gamma(const PolyaGammaParams &params, RngStream &rng,
                          int terms = kPolyaGammaTerms);

/// Inverse Gaussian IG(mu, shape) (Michael, Schucany and Haas).
double sample_inverse_gaussian(double mu, double shape, RngStream &rng);

/// GIG(1/2, a, b) via its reciprocal, which is IG(sqrt(a/b), a).
double sample_gig_half(double a, double b, RngStream &rng);

/// Draw from N(mean, precision^{-1}).
Eigen::VectorXd sample_mvn(const Eigen::VectorXd &mean,
                           const Eigen::MatrixXd &precision, RngStream &rng);

/// Draw from N(precision^{-1} shift, precision^{-1}); returns the mean in
/// `mean_out` when non-null. One Cholesky factorization.
Eigen::VectorXd sample_mvn_canonical(const Eigen::VectorXd &shift,
                                     const Eigen::MatrixXd &precision,
                                     RngStream &rng,
                                     Eigen::VectorXd *mean_out = nullptr);

long sample_poisson(double rate, RngStream &rng);

/// Left-ordered binary matrix drawn from the Indian buffet process.
Eigen::MatrixXd sample_ibp(int n_entities, double alpha, RngStream &rng);

/// Reorder columns of a binary matrix into left-ordered form.
Eigen::MatrixXd left_ordered(const Eigen::MatrixXd &z);

} // namespace dlfrm
