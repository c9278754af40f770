#include "dlfrm/relmodel.hpp"

#include "dlfrm/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dlfrm {

std::string to_string(Loss loss) {
  return loss == Loss::logistic ? "logistic" : "hinge";
}

std::string to_string(Structure structure) {
  return structure == Structure::full ? "full" : "diagonal";
}

Loss parse_loss(const std::string &text) {
  if (text == "logistic" || text == "log" || text == "l")
    return Loss::logistic;
  if (text == "hinge" || text == "h")
    return Loss::hinge;
  throw UsageError("unknown loss `" + text + "`");
}

Structure parse_structure(const std::string &text) {
  if (text == "full")
    return Structure::full;
  if (text == "diagonal" || text == "diag")
    return Structure::diagonal;
  throw UsageError("unknown weight structure `" + text + "`");
}

void HyperParams::validate() const {
  if (!(alpha > 0.0))
    throw ParameterError("alpha must be positive");
  if (!(nu_sq > 0.0))
    throw ParameterError("nu_sq must be positive");
  if (!(c_pos > 0.0) || !(c_neg > 0.0))
    throw ParameterError("costs c_pos and c_neg must be positive");
  if (!(ell > 0.0))
    throw ParameterError("hinge margin ell must be positive");
  if (k_max < 0)
    throw ParameterError("k_max must be non-negative");
  if (pg_terms < 1)
    throw ParameterError("pg_terms must be positive");
}

WeightMatrix LatentState::weights() const {
  const int k = K();
  if (structure == Structure::full)
    return Eigen::Map<const WeightMatrix>(eta.data(), k, k);
  WeightMatrix u = WeightMatrix::Zero(k, k);
  u.diagonal() = eta;
  return u;
}

void LatentState::validate() const {
  if (eta.size() != weight_dim())
    throw UsageError("eta has " + std::to_string(eta.size()) +
                     " entries, expected " + std::to_string(weight_dim()));
  if (!((z.array() == 0.0) || (z.array() == 1.0)).all())
    throw UsageError("feature matrix is not binary");
  if (lambda.size() > 0 && !(lambda.array() > 0.0).all())
    throw UsageError("augmentation variables must be positive");
}

double omega(const LatentState &state, int i, int j) {
  const auto zi = state.z.row(i);
  const auto zj = state.z.row(j);
  if (state.structure == Structure::diagonal)
    return (zi.array() * zj.array()).matrix().dot(state.eta);
  const int k = state.K();
  Eigen::Map<const WeightMatrix> u(state.eta.data(), k, k);
  return zi.dot(u * zj.transpose());
}

Eigen::VectorXd interaction_vector(const LatentState &state, int i, int j) {
  const int k = state.K();
  const auto zi = state.z.row(i);
  const auto zj = state.z.row(j);
  if (state.structure == Structure::diagonal)
    return (zi.array() * zj.array()).matrix().transpose();
  Eigen::VectorXd out(Eigen::Index{k} * k);
  for (int a = 0; a < k; ++a)
    out.segment(Eigen::Index{a} * k, k) = zi(a) * zj.transpose();
  return out;
}

double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double log_pseudo_lik_logistic(double omega, int y, double c) {
  const double ytilde = y > 0 ? 1.0 : 0.0;
  return c * (ytilde * omega - log1p_exp(omega));
}

double log_pseudo_lik_hinge(double omega, int y, double c, double ell) {
  return -2.0 * c * std::max(0.0, ell - y * omega);
}

double log_pseudo_lik(double omega, int y, const HyperParams &hp) {
  const double c = hp.cost(y);
  return hp.loss == Loss::logistic ? log_pseudo_lik_logistic(omega, y, c)
                                   : log_pseudo_lik_hinge(omega, y, c, hp.ell);
}

AugmentedCoeffs augmented_coeffs(int sign, double lambda,
                                 const HyperParams &hp) {
  const double c = hp.cost(sign);
  if (hp.loss == Loss::logistic) {
    const double ytilde = sign > 0 ? 1.0 : 0.0;
    return {c * (ytilde - 0.5), lambda};
  }
  const double gamma = 1.0 / lambda;
  return {c * sign * (1.0 + c * hp.ell * gamma), c * c * gamma};
}

Eigen::VectorXd predict_scores(const std::vector<LatentState> &samples,
                               const std::vector<std::pair<int, int>> &pairs) {
  if (samples.empty())
    throw UsageError("scoring needs at least one posterior sample");
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(pairs.size()));
  for (const auto &s : samples) {
    const WeightMatrix u = s.weights();
    // Z U once per sample, then one dot product per pair.
    const Eigen::MatrixXd zu = s.z * u;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      scores[static_cast<Eigen::Index>(p)] +=
          zu.row(pairs[p].first).dot(s.z.row(pairs[p].second));
  }
  return scores / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------- file I/O

namespace {

constexpr const char *kCheckpointMagic = "dlfrm-checkpoint";

void write_real(std::ostream &out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  out << buf;
}

double read_real(std::istream &in) {
  std::string tok;
  if (!(in >> tok))
    throw CheckpointError("unexpected end of data");
  char *end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw CheckpointError("malformed real `" + tok + "`");
  return v;
}

void write_vector(std::ostream &out, const char *key, const Eigen::VectorXd &v) {
  out << key << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << ' ';
    write_real(out, v[i]);
  }
  out << '\n';
}

void expect_key(std::istream &in, const std::string &key) {
  std::string tok;
  if (!(in >> tok) || tok != key)
    throw CheckpointError("expected `" + key + "`, found `" + tok + "`");
}

Eigen::VectorXd read_vector(std::istream &in, const std::string &key) {
  expect_key(in, key);
  Eigen::Index n = 0;
  if (!(in >> n) || n < 0)
    throw CheckpointError("bad length for `" + key + "`");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = read_real(in);
  return v;
}

// Row as hex digits; feature 4d is the high bit of digit d. "-" when K = 0.
std::string encode_row(const FeatureMatrix &z, Eigen::Index row) {
  const Eigen::Index k = z.cols();
  if (k == 0)
    return "-";
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (Eigen::Index d = 0; d < (k + 3) / 4; ++d) {
    int nibble = 0;
    for (int b = 0; b < 4; ++b) {
      const Eigen::Index col = 4 * d + b;
      if (col < k && z(row, col) != 0.0)
        nibble |= 8 >> b;
    }
    out.push_back(digits[nibble]);
  }
  return out;
}

void decode_row(const std::string &hex, FeatureMatrix &z, Eigen::Index row) {
  const Eigen::Index k = z.cols();
  if (k == 0) {
    if (hex != "-")
      throw CheckpointError("feature row present for K = 0");
    return;
  }
  if (static_cast<Eigen::Index>(hex.size()) != (k + 3) / 4)
    throw CheckpointError("feature row has wrong width");
  for (Eigen::Index d = 0; d < (k + 3) / 4; ++d) {
    const char ch = hex[static_cast<std::size_t>(d)];
    int nibble = 0;
    if (ch >= '0' && ch <= '9')
      nibble = ch - '0';
    else if (ch >= 'a' && ch <= 'f')
      nibble = ch - 'a' + 10;
    else
      throw CheckpointError("bad hex digit in feature row");
    for (int b = 0; b < 4; ++b) {
      const Eigen::Index col = 4 * d + b;
      const bool bit = (nibble & (8 >> b)) != 0;
      if (col < k)
        z(row, col) = bit ? 1.0 : 0.0;
      else if (bit)
        throw CheckpointError("padding bit set in feature row");
    }
  }
}

void write_features(std::ostream &out, const LatentState &s) {
  out << "structure " << to_string(s.structure) << '\n';
  out << "z " << s.z.rows() << ' ' << s.z.cols() << '\n';
  for (Eigen::Index r = 0; r < s.z.rows(); ++r)
    out << encode_row(s.z, r) << '\n';
  write_vector(out, "eta", s.eta);
}

void read_features(std::istream &in, LatentState &s) {
  expect_key(in, "structure");
  std::string structure;
  in >> structure;
  s.structure = parse_structure(structure);
  expect_key(in, "z");
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw CheckpointError("bad feature matrix shape");
  s.z = FeatureMatrix::Zero(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    std::string hex;
    if (!(in >> hex))
      throw CheckpointError("truncated feature matrix");
    decode_row(hex, s.z, r);
  }
  s.eta = read_vector(in, "eta");
  if (s.eta.size() != s.weight_dim())
    throw CheckpointError("weight vector does not match K");
}

} // namespace

void write_checkpoint(std::ostream &out, const Checkpoint &cp) {
  out << kCheckpointMagic << ' ' << Checkpoint::kVersion << '\n';
  out << "iteration " << cp.iteration << '\n';
  const auto &hp = cp.hp;
  out << "hyper";
  for (double v : {hp.alpha, hp.nu_sq, hp.c_pos, hp.c_neg, hp.ell}) {
    out << ' ';
    write_real(out, v);
  }
  out << ' ' << to_string(hp.loss) << ' ' << to_string(hp.structure) << ' '
      << hp.k_max << ' ' << hp.pg_terms << '\n';
  out << "rng " << cp.rng_state << '\n';
  write_features(out, cp.state);
  write_vector(out, "lambda", cp.state.lambda);
  out << "sgld_step " << cp.sgld_step << '\n';
  write_vector(out, "sgld_accumulator", cp.sgld_accumulator);
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream &in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic)
    throw CheckpointError("not a dlfrm checkpoint");
  if (version != Checkpoint::kVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(Checkpoint::kVersion) + ")");
  Checkpoint cp;
  expect_key(in, "iteration");
  in >> cp.iteration;
  expect_key(in, "hyper");
  auto &hp = cp.hp;
  hp.alpha = read_real(in);
  hp.nu_sq = read_real(in);
  hp.c_pos = read_real(in);
  hp.c_neg = read_real(in);
  hp.ell = read_real(in);
  std::string loss, structure;
  in >> loss >> structure >> hp.k_max >> hp.pg_terms;
  hp.loss = parse_loss(loss);
  hp.structure = parse_structure(structure);
  expect_key(in, "rng");
  std::getline(in >> std::ws, cp.rng_state);
  read_features(in, cp.state);
  cp.state.lambda = read_vector(in, "lambda");
  expect_key(in, "sgld_step");
  in >> cp.sgld_step;
  cp.sgld_accumulator = read_vector(in, "sgld_accumulator");
  expect_key(in, "end");
  if (!in)
    throw CheckpointError("truncated checkpoint");
  return cp;
}

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &cp) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out)
      throw IoError("cannot write checkpoint " + tmp.string());
    write_checkpoint(out, cp);
    if (!out)
      throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

void write_sample(std::ostream &out, long iteration, const LatentState &state) {
  out << "sample " << iteration << '\n';
  write_features(out, state);
}

std::vector<std::pair<long, LatentState>> read_samples(std::istream &in) {
  std::vector<std::pair<long, LatentState>> out;
  std::string tok;
  while (in >> tok) {
    if (tok != "sample")
      throw CheckpointError("expected `sample`, found `" + tok + "`");
    long iteration = 0;
    in >> iteration;
    LatentState s;
    read_features(in, s);
    out.emplace_back(iteration, std::move(s));
  }
  return out;
}

} // namespace dlfrm
