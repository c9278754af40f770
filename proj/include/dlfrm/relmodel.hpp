#pragma once

#include "dlfrm/randvar.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dlfrm {

enum class Loss { logistic, hinge };
enum class Structure { full, diagonal };

std::string to_string(Loss loss);
std::string to_string(Structure structure);
Loss parse_loss(const std::string &text);
Structure parse_structure(const std::string &text);

struct HyperParams {
  double alpha = 1.0;  // IBP concentration
  double nu_sq = 1.0;  // prior precision of each weight
  double c_pos = 10.0; // cost on positive links
  double c_neg = 1.0;  // cost on negative links
  double ell = 1.0;    // hinge margin
  Loss loss = Loss::logistic;
  Structure structure = Structure::full;
  int k_max = 5;       // most features one entity may add per update
  int pg_terms = kPolyaGammaTerms;

  /// Cost selected by the observed sign.
  double cost(int sign) const { return sign > 0 ? c_pos : c_neg; }
  void validate() const;

  friend bool operator==(const HyperParams &, const HyperParams &) = default;
};

/// Binary entity-by-feature matrix, stored as 0/1 doubles, row-major so an
/// entity's features are contiguous.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMatrix = FeatureMatrix;

/// Chain state: features Z, weights eta = vec(U) (row-major, K*K entries)
/// or diag(U) (K entries), and one augmentation variable per training link.
struct LatentState {
  FeatureMatrix z;
  Eigen::VectorXd eta;
  Eigen::VectorXd lambda;
  Structure structure = Structure::full;

  int n_entities() const { return static_cast<int>(z.rows()); }
  int K() const { return static_cast<int>(z.cols()); }
  Eigen::Index weight_dim() const {
    return structure == Structure::full ? Eigen::Index{K()} * K() : K();
  }
  /// U as a K x K matrix (diagonal structure expands to diag(eta)).
  WeightMatrix weights() const;
  /// Throws if dimensions, binarity or lambda positivity are violated.
  void validate() const;
};

/// omega_ij = Z_i U Z_j^T.
double omega(const LatentState &state, int i, int j);

/// Z_ij: the vector with omega_ij = eta . Z_ij (z_i (x) z_j, or the
/// elementwise product for the diagonal structure).
Eigen::VectorXd interaction_vector(const LatentState &state, int i, int j);

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

/// log(1 + e^x) without overflow.
double log1p_exp(double x);

double log_pseudo_lik_logistic(double omega, int y, double c);
double log_pseudo_lik_hinge(double omega, int y, double c, double ell);

/// (e^w)^{c ytilde} / (1 + e^w)^c with ytilde = (y + 1) / 2.
inline double pseudo_lik_logistic(double omega, int y, double c) {
  return std::exp(log_pseudo_lik_logistic(omega, y, c));
}
/// exp(-2c (ell - y w)_+).
inline double pseudo_lik_hinge(double omega, int y, double c, double ell) {
  return std::exp(log_pseudo_lik_hinge(omega, y, c, ell));
}

double log_pseudo_lik(double omega, int y, const HyperParams &hp);

struct AugmentedCoeffs {
  double kappa = 0.0;
  double rho = 0.0;
};

/// Gaussian-form coefficients of the augmented link term
/// exp(kappa w - rho w^2 / 2) for the link's sign and lambda.
AugmentedCoeffs augmented_coeffs(int sign, double lambda,
                                 const HyperParams &hp);

/// Mean of omega over posterior samples, one score per pair.
Eigen::VectorXd predict_scores(const std::vector<LatentState> &samples,
                               const std::vector<std::pair<int, int>> &pairs);

/// Sign rule on a score; a zero score predicts -1.
inline int predicted_sign(double score) { return score > 0.0 ? 1 : -1; }

/// Everything needed to resume a chain bit-exactly.
struct Checkpoint {
  static constexpr int kVersion = 1;

  LatentState state;
  HyperParams hp;
  std::string rng_state;
  long iteration = 0;
  long sgld_step = 0;
  Eigen::VectorXd sgld_accumulator;
};

void write_checkpoint(std::ostream &out, const Checkpoint &cp);
Checkpoint read_checkpoint(std::istream &in);
void save_checkpoint(const std::filesystem::path &path, const Checkpoint &cp);
Checkpoint load_checkpoint(const std::filesystem::path &path);

/// Posterior sample records (Z and eta only), appended one per kept sweep.
void write_sample(std::ostream &out, long iteration, const LatentState &state);
std::vector<std::pair<long, LatentState>> read_samples(std::istream &in);

} // namespace dlfrm
