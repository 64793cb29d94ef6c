#include "fpdp/experiments.hpp"
#include "fpdp/pirates.hpp"
#include "fpdp/robust.hpp"
#include "fpdp/rng.hpp"

#include <doctest.h>

using namespace fpdp;

namespace {

// Small code so structural checks stay cheap.
RobustCode small_code(std::uint64_t seed) {
  return robust_gen(TardosParams::with_length(6, 0.1, 200), seed);
}

}  // namespace

TEST_CASE("length for n=10, sec=0.05") {
  const RobustCode code = robust_gen(10, 0.05, 3);
  CHECK(code.codebook.d() == 264920);
  CHECK(code.codebook.n() == 10);
  CHECK(code.secret.length() == 264920);
  CHECK(code.secret.inner_length() == 52984);
}

TEST_CASE("exactly 2d fake zeros and 2d fake ones, all constant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RobustCode code = small_code(seed);
    const Index d = code.secret.inner_length();
    code.secret.validate();
    Index zeros = 0;
    Index ones = 0;
    for (const FakeColumn& f : code.secret.fake_columns()) {
      (f.bit ? ones : zeros) += 1;
      for (Index i = 0; i < code.codebook.n(); ++i) CHECK(code.codebook(i, f.pos) == f.bit);
    }
    CHECK(zeros == 2 * d);
    CHECK(ones == 2 * d);
    // Constant columns include every fake.
    Index constant = 0;
    for (Index j = 0; j < code.codebook.d(); ++j) {
      const auto s = code.codebook.bits().col(j).cast<int>().sum();
      constant += (s == 0 || s == code.codebook.n());
    }
    CHECK(constant >= 4 * d);
  }
}

TEST_CASE("strip inverts the padding bit-exactly") {
  const RobustCode code = small_code(7);
  const TardosCode inner = tardos_gen(code.secret.inner.params, substream(7, 1));
  CHECK(strip_codebook(code.secret, code.codebook) == inner.codebook);
  CHECK(inner.secret.p == code.secret.inner.p);
  for (Index i = 0; i < code.codebook.n(); ++i) {
    CHECK(strip_word(code.secret, code.codebook.row(i).transpose()) ==
          inner.codebook.row(i).transpose());
  }
}

TEST_CASE("secret validation rejects broken permutations") {
  RobustCode code = small_code(1);
  code.secret.perm[0] = code.secret.perm[1];
  CHECK_THROWS_AS(code.secret.validate(), DimensionError);
  code = small_code(1);
  code.secret.perm.pop_back();
  CHECK_THROWS_AS(code.secret.validate(), DimensionError);
}

TEST_CASE("trace length mismatch") {
  const RobustCode code = small_code(2);
  CHECK_THROWS_AS(robust_trace(code.secret, code.codebook, CombinedWord::Zero(200)), DimensionError);
}

TEST_CASE("row copy and all-ones examples") {
  const RobustCode code = robust_gen(10, 0.05, 11);
  const Codebook inner = strip_codebook(code.secret, code.codebook);
  for (Index i : {0, 4, 9}) {
    const CombinedWord row = code.codebook.row(i).transpose();
    CHECK(robust_trace(code.secret, code.codebook, row) ==
          tardos_trace(code.secret.inner, inner, inner.row(i).transpose()));
  }
  CHECK(robust_trace(code.secret, code.codebook, CombinedWord::Ones(code.secret.length())) ==
        tardos_trace(code.secret.inner, inner, CombinedWord::Ones(code.secret.inner_length())));
}

TEST_CASE("trace equals tardos trace of the stripped word") {
  CounterRng rng(19);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const RobustCode code = small_code(seed);
    const Codebook inner = strip_codebook(code.secret, code.codebook);
    for (int rep = 0; rep < 40; ++rep) {
      CombinedWord w(code.secret.length());
      const double p = rng.uniform();
      for (Index j = 0; j < w.size(); ++j) w(j) = rng.bernoulli(p);
      CHECK(robust_trace(code.secret, code.codebook, w) ==
            tardos_trace(code.secret.inner, inner, strip_word(code.secret, w)));
    }
  }
}

TEST_CASE("F_{beta/3} on the padded code gives WF_beta after stripping") {
  // beta = 1/25; floor(5d/75) flips among the coalition's marked columns.
  const Index trials = 200;
  const double beta = 1.0 / 25.0;
  Index failures = 0;
  for (Index t = 0; t < trials; ++t) {
    const std::uint64_t seed = trial_seed(555, static_cast<std::uint64_t>(t));
    const RobustCode code = robust_gen(10, 0.05, seed);
    const Coalition s = Coalition::all(10);
    CounterRng rng(substream(seed, 9));
    const CombinedWord clean = pirate_majority(code.codebook, s);
    const Index k = allowed_failures(beta / 3.0, code.secret.length());
    const CombinedWord w = inject_errors(clean, code.codebook, s, k, ErrorMode::MarkedFirst, rng);
    REQUIRE(feasible(code.codebook, s, w, beta / 3.0));
    const Codebook inner = strip_codebook(code.secret, code.codebook);
    failures += !weakly_feasible(inner, s, strip_word(code.secret, w), beta);
  }
  MESSAGE("WF failures " << failures << " / " << trials);
  CHECK(failures <= trials / 20);
}

TEST_CASE("robust to a 1/75 fraction of marked-first errors") {
  TracingConfig cfg;
  cfg.code = CodeKind::Robust;
  cfg.pirate = PirateKind::Majority;
  cfg.errors.per_length = 1.0 / 75.0;
  cfg.errors.mode = ErrorMode::MarkedFirst;
  cfg.budget_beta = 1.0 / 75.0;
  cfg.trials = 200;
  cfg.seed = 7575;
  const ExperimentReport r = run_tracing_experiment(cfg);
  MESSAGE("robust trace rate " << r.trace_some_user.value);
  CHECK(r.trace_some_user.value >= 0.95);
  CHECK(r.accuracy.value == 1.0);
}
