#include "fpdp/experiments.hpp"
#include "fpdp/pirates.hpp"
#include "fpdp/tardos.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fpdp;

namespace {

TardosSecret half_secret(Index n, Index d, double threshold) {
  TardosSecret s{TardosParams::with_length(n, 0.05, d), Eigen::VectorXd::Constant(d, 0.5)};
  s.params.threshold = threshold;
  return s;
}

}  // namespace

TEST_CASE("parameters for n=10, sec=0.05") {
  const TardosParams p = TardosParams::make(10, 0.05);
  // Oracle: ceil(10000 ln 200) and 200 ln 200 at 50 digits.
  CHECK(p.d == 52984);
  CHECK(p.threshold == doctest::Approx(1059.663473309607).epsilon(1e-13));
  CHECK(p.bias_floor == doctest::Approx(1.0 / 3000.0));
  CHECK(std::pow(std::sin(p.angle_floor), 2) == doctest::Approx(p.bias_floor).epsilon(1e-12));
  CHECK(p.bias_floor > 0.0);
  CHECK(p.bias_floor < 0.5);
  CHECK(marked_column_bound(10, 0.05) == doctest::Approx(837.7375).epsilon(1e-6));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(TardosParams::make(1, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(TardosParams::make(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(TardosParams::make(10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(tardos_gen(1, 0.5, 1), std::invalid_argument);
}

TEST_CASE("biases stay within [t, 1-t]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TardosCode code = tardos_gen(10, 0.05, seed);
    const double t = code.secret.params.bias_floor;
    CHECK(code.secret.p.minCoeff() >= t);
    CHECK(code.secret.p.maxCoeff() <= 1.0 - t);
    CHECK(code.codebook.n() == 10);
    CHECK(code.codebook.d() == 52984);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  const TardosCode a = tardos_gen(4, 0.1, 99);
  const TardosCode b = tardos_gen(4, 0.1, 99);
  const TardosCode c = tardos_gen(4, 0.1, 100);
  CHECK(a.codebook == b.codebook);
  CHECK(a.secret.p == b.secret.p);
  CHECK_FALSE(a.codebook == c.codebook);
}

TEST_CASE("column means track the biases") {
  // 2000 users, 50 columns: each column mean within 5 standard errors of p_j.
  const TardosCode code = tardos_gen(TardosParams::with_length(2000, 0.05, 50), 17);
  const Eigen::VectorXd mean = code.codebook.bits().cast<double>().colwise().mean().transpose();
  for (Index j = 0; j < 50; ++j) {
    const double p = code.secret.p(j);
    CHECK(std::abs(mean(j) - p) <= 5.0 * std::sqrt(p * (1.0 - p) / 2000.0) + 1e-12);
  }
}

TEST_CASE("score examples") {
  const TardosCode code = tardos_gen(5, 0.1, 1);
  const Eigen::VectorXd zero = tardos_scores(code.secret, code.codebook, CombinedWord::Zero(code.codebook.d()));
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  const TardosSecret one = half_secret(2, 1, 100.0);
  BitMatrix bits(2, 1);
  bits << 1, 0;
  const Codebook c1(bits);
  CHECK(tardos_score(one, c1, CombinedWord::Ones(1), 0) == 1.0);
  CHECK(tardos_score(one, c1, CombinedWord::Ones(1), 1) == -1.0);

  const TardosSecret two = half_secret(2, 2, 100.0);
  BitMatrix b2(2, 2);
  b2 << 1, 0, 0, 1;
  CHECK(tardos_score(two, Codebook(b2), CombinedWord::Ones(2), 0) == 0.0);
}

TEST_CASE("score with explicit weights") {
  // p = 0.2 gives q = 2 and -1/q = -0.5.
  TardosSecret s{TardosParams::with_length(2, 0.05, 3), Eigen::VectorXd::Constant(3, 0.2)};
  BitMatrix bits(2, 3);
  bits << 1, 0, 1, 0, 0, 1;
  const Codebook c(bits);
  CombinedWord w(3);
  w << 1, 1, 0;
  CHECK(tardos_score(s, c, w, 0) == doctest::Approx(1.5));
  CHECK(tardos_score(s, c, w, 1) == doctest::Approx(-1.0));
  CHECK(s.weights()(0) == doctest::Approx(2.0));
}

TEST_CASE("score dimension checks") {
  const TardosCode code = tardos_gen(3, 0.2, 4);
  CHECK_THROWS_AS(tardos_scores(code.secret, code.codebook, CombinedWord::Zero(5)), DimensionError);
  CHECK_THROWS_AS(tardos_score(code.secret, code.codebook, CombinedWord::Zero(code.codebook.d()), 3),
                  DimensionError);
}

TEST_CASE("trace: empty word accuses nobody") {
  const TardosCode code = tardos_gen(10, 0.05, 2);
  CHECK_FALSE(tardos_trace(code.secret, code.codebook, CombinedWord::Zero(code.codebook.d())).has_value());
}

TEST_CASE("trace: ties accuse and the lowest index wins") {
  // q = 1 everywhere; Z/2 = 2.
  const TardosSecret s = half_secret(3, 4, 4.0);
  BitMatrix bits(3, 4);
  bits << 0, 0, 1, 1,
          1, 1, 0, 0,
          1, 1, 1, 1;
  const Codebook c(bits);
  CombinedWord w(4);
  w << 1, 1, 0, 0;
  // Scores: user 0 = -2, user 1 = 2, user 2 = 2.
  CHECK(tardos_trace(s, c, w) == TraceOutcome(1));
  w << 1, 0, 0, 0;
  CHECK_FALSE(tardos_trace(s, c, w).has_value());
}

TEST_CASE("trace is deterministic") {
  const TardosCode code = tardos_gen(10, 0.05, 8);
  const CombinedWord w = pirate_majority(code.codebook, Coalition::all(10));
  CHECK(tardos_trace(code.secret, code.codebook, w) == tardos_trace(code.secret, code.codebook, w));
}

TEST_CASE("score is linear in the word") {
  const TardosCode code = tardos_gen(6, 0.1, 21);
  CounterRng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    CombinedWord hat = CombinedWord::Zero(code.codebook.d());
    CombinedWord bar = CombinedWord::Zero(code.codebook.d());
    for (Index j = 0; j < code.codebook.d(); ++j) {
      const auto r = rng.below(3);
      if (r == 1) hat(j) = 1;
      if (r == 2) bar(j) = 1;
    }
    const Eigen::VectorXd whole = tardos_scores(code.secret, code.codebook, CombinedWord(hat + bar));
    const Eigen::VectorXd parts = tardos_scores(code.secret, code.codebook, hat) +
                                  tardos_scores(code.secret, code.codebook, bar);
    CHECK((whole - parts).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + whole.cwiseAbs().maxCoeff()));
    // Real weights: an error part may carry negative entries.
    const Eigen::VectorXd w1 = hat.cast<double>();
    const Eigen::VectorXd w2 = bar.cast<double>() - 0.5 * hat.cast<double>();
    const Eigen::VectorXd lin = tardos_weighted_scores(code.secret, code.codebook, Eigen::VectorXd(w1 + w2));
    const Eigen::VectorXd sum = tardos_weighted_scores(code.secret, code.codebook, w1) +
                                tardos_weighted_scores(code.secret, code.codebook, w2);
    CHECK((lin - sum).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + lin.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("completeness: majority of the full coalition is traced") {
  TracingConfig cfg;
  cfg.pirate = PirateKind::Majority;
  cfg.trials = 1000;
  cfg.seed = 20261016;
  const ExperimentReport r = run_tracing_experiment(cfg);
  MESSAGE("majority trace rate " << r.trace_some_user.value);
  CHECK(r.trace_some_user.value >= 0.99);
  CHECK(r.feasibility.value == 1.0);
}

TEST_CASE("soundness: a row-copy of the others never frames the excluded user") {
  TracingConfig cfg;
  cfg.pirate = PirateKind::RowCopy;
  cfg.coalition = CoalitionShape::AllButOne;
  cfg.trials = 1000;
  cfg.seed = 4242;
  const ExperimentReport r = run_tracing_experiment(cfg);
  CHECK(r.false_accuse.hits == 0);
}
