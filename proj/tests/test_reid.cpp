#include "fpdp/report.hpp"
#include "fpdp/reid.hpp"
#include "fpdp/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace fpdp;

TEST_CASE("rounding examples") {
  AnswerVector a(5);
  a << 0.7, 0.2, 0.5, 1.3, -0.4;
  CombinedWord expect(5);
  expect << 1, 0, 1, 1, 0;
  CHECK(round_answers(a) == expect);
  CHECK(round_answers(AnswerVector(0)).size() == 0);
}

TEST_CASE("all-half answers trace like the all-ones word") {
  const TardosCode code = tardos_gen(10, 0.05, 4);
  const Database db = as_database(code.codebook);
  const AnswerVector half = AnswerVector::Constant(db.d(), 0.5);
  CHECK(reid_adversary(code.secret, db, half) ==
        tardos_trace(code.secret, code.codebook, CombinedWord::Ones(db.d())));
}

TEST_CASE("exact marginals of a code are traced") {
  int traced = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TardosCode code = tardos_gen(10, 0.05, trial_seed(77, seed));
    const Database db = as_database(code.codebook);
    traced += reid_adversary(code.secret, db, answer_exact(db)).has_value();
  }
  CHECK(traced >= 190);
}

TEST_CASE("(1/3, beta)-accurate answers round into F_beta") {
  CounterRng rng(21);
  for (int rep = 0; rep < 2000; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.below(6));
    const Index d = 1 + static_cast<Index>(rng.below(60));
    const double p = rng.uniform(0.0, 0.3);
    BitMatrix bits(n, d);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < d; ++j) bits(i, j) = rng.bernoulli(rng.bernoulli(0.5) ? p : 1 - p);
    const Database db(bits);
    const double beta = rng.below(3) == 0 ? 0.0 : rng.uniform(0.0, 0.5);
    const AnswerVector truth = answer_exact(db);
    AnswerVector a = truth;
    // Push every answer as far as allowed, toward the wrong side.
    for (Index j = 0; j < d; ++j) {
      const double push = rng.bernoulli(0.7) ? 1.0 / 3.0 : rng.uniform(0.0, 1.0 / 3.0);
      a(j) += truth(j) >= 0.5 ? -push : push;
      while (std::abs(a(j) - truth(j)) > 1.0 / 3.0) a(j) = std::nextafter(a(j), truth(j));
    }
    // Up to floor(beta d) answers may be arbitrary.
    const Index bad = allowed_failures(beta, d);
    for (Index k = 0; k < bad; ++k) {
      a(static_cast<Index>(rng.below(static_cast<std::uint64_t>(d)))) = rng.uniform(-3.0, 3.0);
    }
    REQUIRE(is_accurate(a, truth, 1.0 / 3.0, beta));
    CHECK(feasible(as_codebook(db), Coalition::all(n), round_answers(a), beta));
  }
}

TEST_CASE("config parsing and validation") {
  const nlohmann::json j = {{"code", "robust"},
                            {"mechanism", {{"name", "gaussian"}, {"params", {{"eps", 0.5}, {"delta", 1e-5}, {"n", 1000}}}}},
                            {"n", 5},
                            {"sec", 0.1},
                            {"trials", 7},
                            {"seed", 99}};
  const ReidConfig c = reid_config_from_json(j, "cfg.json");
  CHECK(c.code == CodeKind::Robust);
  CHECK(c.n == 5);
  CHECK(c.trials == 7);
  CHECK(c.seed == 99);
  CHECK(c.calibration_n == Index{1000});
  CHECK(c.effective_beta() == doctest::Approx(1.0 / 75.0));
  const auto& g = std::get<GaussianMechanism>(c.mechanism);
  CHECK(g.eps == 0.5);
  CHECK(g.delta == 1e-5);
  const ReidConfig back = reid_config_from_json(to_json(c), "x");
  CHECK(back.calibration_n == c.calibration_n);
  CHECK(to_json(back) == to_json(c));

  CHECK_THROWS_AS(reid_config_from_json({{"code", "fancy"}}, "cfg.json"), FormatError);
  CHECK_THROWS_AS(reid_config_from_json({{"n", 1}}, "cfg.json"), FormatError);
  CHECK_THROWS_AS(reid_config_from_json({{"trials", 0}}, "cfg.json"), FormatError);
  CHECK_THROWS_AS(reid_config_from_json({{"mechanism", {{"name", "laplace"}, {"params", {{"eps", -1}}}}}}, "c"),
                  FormatError);
  try {
    reid_config_from_json({{"mechanism", {{"name", "nope"}}}}, "cfg.json");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("cfg.json") != std::string::npos);
    CHECK(std::string(e.what()).find("mechanism.name") != std::string::npos);
  }
}

TEST_CASE("exact mechanism: condition 1 holds") {
  ReidConfig c;
  c.trials = 200;
  c.seed = 2024;
  const ExperimentReport r = run_reid_experiment(c);
  CHECK(r.trials == 200);
  CHECK(r.records.size() == 200);
  CHECK(r.bot_and_accurate.value <= 0.05);
  CHECK(r.accuracy.value == 1.0);
  CHECK(r.regime == "exact");
  CHECK_FALSE(r.outside_guarantee);
  for (const TrialRecord& rec : r.records) {
    const Index removed = std::stol(rec.removed);
    CHECK(removed >= 1);
    CHECK(removed <= 10);
  }
}

TEST_CASE("exact mechanism: condition 2 holds") {
  ReidConfig c;
  c.trials = 500;
  c.seed = 31337;
  const ExperimentReport r = run_reid_experiment(c);
  MESSAGE("false accusation rate " << r.false_accuse.value);
  CHECK(r.false_accuse.value <= 0.01);
}

TEST_CASE("rates are proportions with Wilson intervals") {
  ReidConfig c;
  c.trials = 30;
  c.mechanism = LaplaceMechanism{1.0};
  const ExperimentReport r = run_reid_experiment(c);
  for (const Rate& rate : {r.trace_some_user, r.bot_and_accurate, r.false_accuse, r.accuracy}) {
    CHECK(rate.trials == 30);
    CHECK(rate.hits >= 0);
    CHECK(rate.hits <= 30);
    CHECK(rate.lo <= rate.value);
    CHECK(rate.value <= rate.hi);
    CHECK(rate.lo >= 0.0);
    CHECK(rate.hi <= 1.0);
  }
  // Laplace noise of scale d/n per query swamps the answers.
  CHECK(r.regime == "noisy-inaccurate");
  CHECK(r.accuracy.value == 0.0);
}

TEST_CASE("large calibration n is flagged as outside the guarantee") {
  ReidConfig c;
  c.trials = 20;
  c.mechanism = GaussianMechanism{1.0, 1e-6};
  c.calibration_n = 1000000;
  const ExperimentReport r = run_reid_experiment(c);
  CHECK(r.regime == "noisy-accurate");
  CHECK(r.outside_guarantee);
  CHECK(r.accuracy.value >= 0.9);
  CHECK(report_json(r)["outside_guarantee"] == true);
}

TEST_CASE("reports are reproducible and independent of the worker count") {
  ReidConfig c;
  c.trials = 12;
  c.seed = 5;
  c.mechanism = GaussianMechanism{1.0, 1e-6};
  c.calibration_n = 100000;
  const std::string one = report_csv(run_reid_experiment(c, 1));
  CHECK(report_csv(run_reid_experiment(c, 1)) == one);
  CHECK(report_csv(run_reid_experiment(c, 3)) == one);
  c.seed = 6;
  CHECK(report_csv(run_reid_experiment(c, 1)) != one);
}

TEST_CASE("robust code re-identification with exact answers") {
  ReidConfig c;
  c.code = CodeKind::Robust;
  c.trials = 20;
  c.seed = 8;
  const ExperimentReport r = run_reid_experiment(c);
  CHECK(r.trace_some_user.value >= 0.9);
  CHECK(r.false_accuse.hits == 0);
}
