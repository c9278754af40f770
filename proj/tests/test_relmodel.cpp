#include "dlfrm/errors.hpp"
#include "dlfrm/relmodel.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace dlfrm {
namespace {

LatentState two_feature_state() {
  LatentState s;
  s.z = FeatureMatrix::Zero(3, 2);
  s.z(0, 0) = 1;
  s.z(1, 1) = 1;
  s.z(2, 0) = 1;
  s.z(2, 1) = 1;
  s.eta.resize(4);
  s.eta << 0.5, -1.25, 2.0, 3.0; // U = [[0.5, -1.25], [2, 3]]
  s.lambda = Eigen::VectorXd::Ones(2);
  return s;
}

TEST(Omega, EmptyFeaturesGiveZero) {
  LatentState s;
  s.z = FeatureMatrix::Zero(2, 3);
  s.eta = Eigen::VectorXd::Ones(9);
  EXPECT_EQ(omega(s, 0, 1), 0.0);
  EXPECT_EQ(sigmoid(omega(s, 0, 1)), 0.5);
}

TEST(Omega, SingleSharedFeature) {
  LatentState s;
  s.z = FeatureMatrix::Ones(2, 1);
  s.eta = Eigen::VectorXd::Constant(1, 2.0);
  EXPECT_EQ(omega(s, 0, 1), 2.0);
  EXPECT_NEAR(sigmoid(omega(s, 0, 1)), 0.880797077977882444, 1e-15);
}

TEST(Omega, BasisVectorsSelectAsymmetricEntries) {
  const LatentState s = two_feature_state();
  EXPECT_EQ(omega(s, 0, 1), -1.25); // U_12
  EXPECT_EQ(omega(s, 1, 0), 2.0);   // U_21
  EXPECT_EQ(omega(s, 2, 2), 0.5 - 1.25 + 2.0 + 3.0);
}

TEST(Omega, MatchesInteractionVectorAndWeights) {
  const LatentState s = two_feature_state();
  const WeightMatrix u = s.weights();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double w = s.z.row(i) * u * s.z.row(j).transpose();
      EXPECT_DOUBLE_EQ(omega(s, i, j), w);
      EXPECT_DOUBLE_EQ(interaction_vector(s, i, j).dot(s.eta), w);
    }
}

TEST(Omega, DiagonalStructureSumsSharedFeatures) {
  LatentState s = two_feature_state();
  s.structure = Structure::diagonal;
  s.eta = Eigen::Vector2d(0.5, 3.0);
  EXPECT_EQ(omega(s, 0, 1), 0.0);
  EXPECT_EQ(omega(s, 0, 2), 0.5);
  EXPECT_EQ(omega(s, 2, 2), 3.5);
  EXPECT_EQ(interaction_vector(s, 2, 1), Eigen::Vector2d(0.0, 1.0));
}

TEST(PseudoLikLogistic, UnitCostEqualsLinkLikelihood) {
  for (double w = -8.0; w <= 8.0; w += 0.25) {
    EXPECT_NEAR(pseudo_lik_logistic(w, 1, 1.0), sigmoid(w), 1e-14);
    EXPECT_NEAR(pseudo_lik_logistic(w, -1, 1.0), 1.0 - sigmoid(w), 1e-14);
  }
}

TEST(PseudoLikLogistic, SymmetryPoint) {
  for (double c : {0.5, 1.0, 3.0, 10.0}) {
    EXPECT_NEAR(pseudo_lik_logistic(0.0, 1, c), std::pow(2.0, -c), 1e-15);
    EXPECT_NEAR(pseudo_lik_logistic(0.0, -1, c), std::pow(2.0, -c), 1e-15);
  }
}

TEST(PseudoLikLogistic, PoweredSigmoid) {
  EXPECT_NEAR(pseudo_lik_logistic(3.0, 1, 10.0), 0.6151596104026821760, 1e-9);
}

TEST(PseudoLikLogistic, StableAtExtremeScores) {
  EXPECT_NEAR(log_pseudo_lik_logistic(700.0, 1, 16.0), 0.0, 1e-12);
  EXPECT_NEAR(log_pseudo_lik_logistic(700.0, -1, 16.0), -16.0 * 700.0, 1e-9);
  EXPECT_TRUE(std::isfinite(log_pseudo_lik_logistic(-1e5, 1, 16.0)));
}

TEST(PseudoLikHinge, Examples) {
  EXPECT_EQ(pseudo_lik_hinge(5.0, 1, 1.0, 1.0), 1.0);
  EXPECT_NEAR(pseudo_lik_hinge(0.0, 1, 1.0, 1.0), 0.1353352832366126919, 1e-15);
  EXPECT_NEAR(pseudo_lik_hinge(0.5, -1, 2.0, 1.0), 0.0024787521766663584, 1e-17);
  EXPECT_EQ(pseudo_lik_hinge(1.0, 1, 3.0, 1.0), 1.0);
  EXPECT_LT(pseudo_lik_hinge(0.999, 1, 3.0, 1.0), 1.0);
}

TEST(PseudoLik, NondecreasingInMargin) {
  for (int y : {1, -1})
    for (double c : {0.5, 2.0}) {
      double prev_l = -INFINITY;
      double prev_h = -INFINITY;
      for (double yw = -6.0; yw <= 6.0; yw += 0.1) {
        const double w = y * yw;
        const double l = log_pseudo_lik_logistic(w, y, c);
        const double h = log_pseudo_lik_hinge(w, y, c, 1.0);
        EXPECT_GE(l, prev_l);
        EXPECT_GE(h, prev_h);
        prev_l = l;
        prev_h = h;
      }
    }
}

TEST(PseudoLik, DispatchUsesSignedCost) {
  HyperParams hp;
  hp.c_pos = 4.0;
  hp.c_neg = 0.5;
  EXPECT_DOUBLE_EQ(log_pseudo_lik(0.3, 1, hp), log_pseudo_lik_logistic(0.3, 1, 4.0));
  EXPECT_DOUBLE_EQ(log_pseudo_lik(0.3, -1, hp), log_pseudo_lik_logistic(0.3, -1, 0.5));
  hp.loss = Loss::hinge;
  hp.ell = 2.0;
  EXPECT_DOUBLE_EQ(log_pseudo_lik(0.3, -1, hp), log_pseudo_lik_hinge(0.3, -1, 0.5, 2.0));
}

TEST(AugmentedCoeffs, GaussianFormCoefficients) {
  HyperParams hp;
  hp.c_pos = 2.0;
  hp.c_neg = 2.0;
  auto a = augmented_coeffs(1, 0.7, hp);
  EXPECT_DOUBLE_EQ(a.kappa, 1.0);
  EXPECT_DOUBLE_EQ(a.rho, 0.7);
  a = augmented_coeffs(-1, 0.7, hp);
  EXPECT_DOUBLE_EQ(a.kappa, -1.0);

  hp.loss = Loss::hinge;
  hp.c_neg = 1.0;
  hp.ell = 1.0;
  a = augmented_coeffs(-1, 0.5, hp); // gamma = 2
  EXPECT_DOUBLE_EQ(a.kappa, -3.0);
  EXPECT_DOUBLE_EQ(a.rho, 2.0);
  EXPECT_GT(augmented_coeffs(1, 1e-3, hp).rho, 0.0);
}

TEST(MixtureIdentity, HingeMixtureIntegratesToPseudoLikelihood) {
  for (double c : {0.5, 1.0, 2.0})
    for (double zeta : {-1.0, 0.0, 0.5, 2.0}) {
      // lambda = e^t turns the half-line into a smooth integrand on R.
      auto f = [&](double t) {
        const double lam = std::exp(t);
        const double r = lam + c * zeta;
        return lam * std::exp(-r * r / (2.0 * lam)) / std::sqrt(2.0 * M_PI * lam);
      };
      const double integral = testing::simpson(f, -60.0, 12.0, 200000);
      const double expected = std::exp(-2.0 * c * std::max(zeta, 0.0));
      EXPECT_LT(std::abs(integral / expected - 1.0), 1e-6) << "c=" << c << " zeta=" << zeta;
    }
}

TEST(MixtureIdentity, LogisticMixtureMatchesInExpectation) {
  RngStream rng(5);
  for (double c : {1.0, 2.0})
    for (double w : {-2.0, 0.0, 1.0})
      for (int y : {1, -1}) {
        const double kappa = c * ((y > 0 ? 1.0 : 0.0) - 0.5);
        std::vector<double> v;
        for (int i = 0; i < 50000; ++i) {
          const double lam = sample_polya_gamma({c, 0.0}, rng);
          v.push_back(std::pow(2.0, -c) * std::exp(kappa * w - lam * w * w / 2.0));
        }
        const auto m = testing::moments(v);
        EXPECT_NEAR(m.mean, pseudo_lik_logistic(w, y, c), 4.0 * m.se_mean() + 1e-15)
            << "c=" << c << " w=" << w << " y=" << y;
      }
}

TEST(PredictScores, AveragesOmegaAndHandlesTies) {
  LatentState a;
  a.z = FeatureMatrix::Ones(2, 1);
  a.eta = Eigen::VectorXd::Constant(1, 1.0);
  LatentState b = a;
  b.eta[0] = -1.0;
  const std::vector<std::pair<int, int>> pairs{{0, 1}};
  EXPECT_EQ(predict_scores({a}, pairs)[0], 1.0);
  const double s = predict_scores({a, b}, pairs)[0];
  EXPECT_EQ(s, 0.0);
  EXPECT_EQ(predicted_sign(s), -1);
  EXPECT_EQ(predicted_sign(1e-12), 1);
  EXPECT_THROW(predict_scores({}, pairs), UsageError);
}

TEST(PredictScores, PermutationInvariant) {
  RngStream rng(3);
  std::vector<LatentState> samples;
  for (int t = 0; t < 5; ++t) {
    LatentState s;
    s.z = FeatureMatrix::Zero(4, 2 + t % 2);
    for (Eigen::Index i = 0; i < s.z.size(); ++i)
      s.z.data()[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    s.eta = Eigen::VectorXd::NullaryExpr(s.weight_dim(), [&] { return rng.normal(); });
    samples.push_back(s);
  }
  const std::vector<std::pair<int, int>> pairs{{0, 1}, {1, 0}, {2, 3}, {3, 1}};
  const Eigen::VectorXd fwd = predict_scores(samples, pairs);
  std::reverse(samples.begin(), samples.end());
  EXPECT_TRUE(fwd.isApprox(predict_scores(samples, pairs), 1e-14));
}

TEST(HyperParams, ValidationAndParsing) {
  HyperParams hp;
  EXPECT_NO_THROW(hp.validate());
  EXPECT_EQ(hp.cost(1), 10.0);
  EXPECT_EQ(hp.cost(-1), 1.0);
  hp.alpha = 0.0;
  EXPECT_THROW(hp.validate(), ParameterError);
  hp = HyperParams{};
  hp.c_neg = -1.0;
  EXPECT_THROW(hp.validate(), ParameterError);
  EXPECT_EQ(parse_loss("hinge"), Loss::hinge);
  EXPECT_EQ(parse_loss("l"), Loss::logistic);
  EXPECT_EQ(parse_structure("diag"), Structure::diagonal);
  EXPECT_THROW(parse_loss("squared"), UsageError);
}

TEST(LatentState, ValidateCatchesInconsistency) {
  LatentState s = two_feature_state();
  EXPECT_NO_THROW(s.validate());
  s.eta.resize(3);
  EXPECT_THROW(s.validate(), UsageError);
  s = two_feature_state();
  s.z(0, 1) = 0.5;
  EXPECT_THROW(s.validate(), UsageError);
  s = two_feature_state();
  s.lambda[0] = 0.0;
  EXPECT_THROW(s.validate(), UsageError);
}

Checkpoint sample_checkpoint() {
  Checkpoint cp;
  RngStream rng(17);
  cp.state = two_feature_state();
  cp.state.lambda = Eigen::Vector3d(0.1, 1.0 / 3.0, 7.25e-300);
  cp.state.eta[1] = std::nextafter(1.0, 2.0);
  cp.hp.alpha = 0.3;
  cp.hp.c_pos = 1.0 / 7.0;
  cp.hp.loss = Loss::hinge;
  cp.rng_state = rng.serialize();
  cp.iteration = 123;
  cp.sgld_step = 45;
  cp.sgld_accumulator = Eigen::Vector4d(1.0, 0.1, 1e-20, 3.0);
  return cp;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint cp = sample_checkpoint();
  std::stringstream ss;
  write_checkpoint(ss, cp);
  const Checkpoint back = read_checkpoint(ss);
  EXPECT_EQ(back.state.z, cp.state.z);
  EXPECT_EQ(back.state.eta, cp.state.eta);
  EXPECT_EQ(back.state.lambda, cp.state.lambda);
  EXPECT_EQ(back.state.structure, cp.state.structure);
  EXPECT_EQ(back.hp, cp.hp);
  EXPECT_EQ(back.rng_state, cp.rng_state);
  EXPECT_EQ(back.iteration, cp.iteration);
  EXPECT_EQ(back.sgld_step, cp.sgld_step);
  EXPECT_EQ(back.sgld_accumulator, cp.sgld_accumulator);
}

TEST(Checkpoint, EmptyFeatureSetRoundTrips) {
  Checkpoint cp = sample_checkpoint();
  cp.state.z = FeatureMatrix::Zero(3, 0);
  cp.state.eta = Eigen::VectorXd();
  cp.sgld_accumulator = Eigen::VectorXd();
  std::stringstream ss;
  write_checkpoint(ss, cp);
  const Checkpoint back = read_checkpoint(ss);
  EXPECT_EQ(back.state.K(), 0);
  EXPECT_EQ(back.state.n_entities(), 3);
}

TEST(Checkpoint, WideFeatureRowsRoundTrip) {
  Checkpoint cp = sample_checkpoint();
  RngStream rng(2);
  cp.state.z = FeatureMatrix::Zero(3, 67);
  for (Eigen::Index i = 0; i < cp.state.z.size(); ++i)
    cp.state.z.data()[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
  cp.state.eta = Eigen::VectorXd::Zero(67 * 67);
  std::stringstream ss;
  write_checkpoint(ss, cp);
  EXPECT_EQ(read_checkpoint(ss).state.z, cp.state.z);
}

TEST(Checkpoint, VersionMismatchIsExplicit) {
  std::stringstream ss;
  write_checkpoint(ss, sample_checkpoint());
  std::string text = ss.str();
  text.replace(text.find("dlfrm-checkpoint 1"), 18, "dlfrm-checkpoint 9");
  std::stringstream bad(text);
  try {
    read_checkpoint(bad);
    FAIL() << "expected a checkpoint error";
  } catch (const CheckpointError &e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
  std::stringstream junk("hello world");
  EXPECT_THROW(read_checkpoint(junk), CheckpointError);
}

TEST(Samples, AppendAndReadBack) {
  std::stringstream ss;
  LatentState a = two_feature_state();
  LatentState b = a;
  b.z = FeatureMatrix::Zero(3, 0);
  b.eta = Eigen::VectorXd();
  write_sample(ss, 10, a);
  write_sample(ss, 11, b);
  const auto back = read_samples(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].first, 10);
  EXPECT_EQ(back[0].second.z, a.z);
  EXPECT_EQ(back[0].second.eta, a.eta);
  EXPECT_EQ(back[1].second.K(), 0);
}

} // namespace
} // namespace dlfrm
