#include "fpdp/tardos.hpp"

#include "fpdp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fpdp {

namespace {

void check_params(Index n, double sec) {
  if (n < 2) throw std::invalid_argument("tardos: need at least 2 users");
  if (!(sec > 0.0 && sec < 1.0)) throw std::invalid_argument("tardos: sec must lie in (0,1)");
}

void check_dims(const TardosSecret& secret, const Codebook& c, Index word_len) {
  if (c.d() != secret.p.size() || c.n() != secret.params.n) {
    throw DimensionError("tardos: codebook does not match secret");
  }
  if (word_len != c.d()) throw DimensionError("tardos: word length mismatch");
}

}  // namespace

Index TardosParams::code_length(Index n, double sec) {
  check_params(n, sec);
  const double nn = static_cast<double>(n);
  return static_cast<Index>(std::ceil(100.0 * nn * nn * std::log(nn / sec)));
}

TardosParams TardosParams::make(Index n, double sec) {
  return with_length(n, sec, code_length(n, sec));
}

TardosParams TardosParams::with_length(Index n, double sec, Index d) {
  check_params(n, sec);
  if (d < 1) throw std::invalid_argument("tardos: code length must be positive");
  TardosParams p;
  p.n = n;
  p.sec = sec;
  p.d = d;
  const double nn = static_cast<double>(n);
  p.bias_floor = 1.0 / (300.0 * nn);
  p.angle_floor = std::asin(std::sqrt(p.bias_floor));
  p.threshold = 20.0 * nn * std::log(nn / sec);
  return p;
}

Eigen::VectorXd TardosSecret::weights() const {
  return ((1.0 - p.array()) / p.array()).sqrt().matrix();
}

TardosCode tardos_gen(const TardosParams& params, std::uint64_t seed) {
  check_params(params.n, params.sec);
  CounterRng rng(seed);
  const double lo = params.angle_floor;
  const double hi = std::numbers::pi / 2.0 - params.angle_floor;

  Eigen::VectorXd p(params.d);
  BitMatrix bits(params.n, params.d);
  for (Index j = 0; j < params.d; ++j) {
    const double r = rng.uniform(lo, hi);
    const double s = std::sin(r);
    // Clamp away the last-ulp drift of sin(asin(sqrt(t)))^2 at the interval ends.
    p(j) = std::clamp(s * s, params.bias_floor, 1.0 - params.bias_floor);
    for (Index i = 0; i < params.n; ++i) bits(i, j) = rng.bernoulli(p(j)) ? 1 : 0;
  }
  return {Codebook(std::move(bits)), TardosSecret{params, std::move(p)}};
}

TardosCode tardos_gen(Index n, double sec, std::uint64_t seed) {
  return tardos_gen(TardosParams::make(n, sec), seed);
}

Eigen::VectorXd tardos_weighted_scores(const TardosSecret& secret, const Codebook& c,
                                       const Eigen::VectorXd& weights) {
  check_dims(secret, c, weights.size());
  const Eigen::VectorXd q = secret.weights();
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(c.n());
  for (Index j = 0; j < c.d(); ++j) {
    const double w = weights(j);
    if (w == 0.0) continue;
    const double up = w * q(j);
    const double down = -w / q(j);
    for (Index i = 0; i < c.n(); ++i) scores(i) += c(i, j) ? up : down;
  }
  return scores;
}

Eigen::VectorXd tardos_scores(const TardosSecret& secret, const Codebook& c,
                              const CombinedWord& word) {
  return tardos_weighted_scores(secret, c, Eigen::VectorXd(word.cast<double>()));
}

double tardos_score(const TardosSecret& secret, const Codebook& c, const CombinedWord& word,
                    Index user) {
  check_dims(secret, c, word.size());
  if (user < 0 || user >= c.n()) throw DimensionError("tardos: user out of range");
  const Eigen::VectorXd q = secret.weights();
  double score = 0.0;
  for (Index j = 0; j < c.d(); ++j) {
    if (word(j)) score += c(user, j) ? q(j) : -1.0 / q(j);
  }
  return score;
}

TraceOutcome tardos_trace(const TardosSecret& secret, const Codebook& c,
                          const CombinedWord& word) {
  return tardos_accuse(secret, tardos_scores(secret, c, word));
}

TraceOutcome tardos_accuse(const TardosSecret& secret, const Eigen::VectorXd& scores) {
  const double cut = secret.params.threshold / 2.0;
  for (Index i = 0; i < scores.size(); ++i) {
    if (scores(i) >= cut) return i;
  }
  return std::nullopt;
}

double marked_column_bound(Index n, double sec) {
  check_params(n, sec);
  const double nn = static_cast<double>(n);
  return 5.0 * std::pow(nn, 1.5) * std::log(nn / sec);
}

}  // namespace fpdp
