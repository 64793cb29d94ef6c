#include "fpdp/experiments.hpp"
#include "fpdp/pirates.hpp"
#include "fpdp/rng.hpp"
#include "fpdp/tardos.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fpdp;

namespace {

Codebook random_codebook(Index n, Index d, CounterRng& rng, double p = 0.5) {
  BitMatrix bits(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) bits(i, j) = rng.bernoulli(p);
  return Codebook(bits);
}

bool is_some_row(const Codebook& c, const Coalition& s, const CombinedWord& w) {
  for (Index i : s.members())
    if (c.row(i).transpose() == w) return true;
  return false;
}

}  // namespace

TEST_CASE("majority examples") {
  BitMatrix bits(3, 2);
  bits << 1, 0, 0, 1, 1, 1;
  const Codebook c(bits);
  CombinedWord expect(2);
  expect << 1, 1;
  CHECK(pirate_majority(c, Coalition::all(3)) == expect);
  CHECK(pirate_majority(c, Coalition({1}, 3)) == c.row(1).transpose());
  // Tie of one 1 and one 0 goes to 1.
  expect << 1, 1;
  CHECK(pirate_majority(c, Coalition({0, 1}, 3)) == expect);
}

TEST_CASE("single-user coalitions reproduce the row") {
  CounterRng rng(1);
  const Codebook c = random_codebook(4, 64, rng);
  const Coalition s({2}, 4);
  CHECK(pirate_row_copy(c, s, rng) == c.row(2).transpose());
  CHECK(pirate_interleave(c, s, rng) == c.row(2).transpose());
}

TEST_CASE("combinatorial pirates stay in F_0") {
  CounterRng rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.below(8));
    const Codebook c = random_codebook(n, 50, rng, rng.uniform(0.05, 0.95));
    std::vector<Index> members;
    for (Index i = 0; i < n; ++i)
      if (rng.bernoulli(0.5)) members.push_back(i);
    if (members.empty()) members.push_back(0);
    const Coalition s(members, n);
    CHECK(feasible(c, s, pirate_majority(c, s), 0.0));
    const CombinedWord copy = pirate_row_copy(c, s, rng);
    CHECK(feasible(c, s, copy, 0.0));
    CHECK(is_some_row(c, s, copy));
    CHECK(feasible(c, s, pirate_interleave(c, s, rng), 0.0));
  }
}

TEST_CASE("seeded determinism") {
  CounterRng g(3);
  const Codebook c = random_codebook(6, 80, g);
  const Coalition s = Coalition::all(6);
  CounterRng a(99), b(99);
  CHECK(pirate_row_copy(c, s, a) == pirate_row_copy(c, s, b));
  CHECK(pirate_interleave(c, s, a) == pirate_interleave(c, s, b));
  CHECK(pirate_gaussian_average(c, s, 6, 0.1, a) == pirate_gaussian_average(c, s, 6, 0.1, b));
}

TEST_CASE("interleave column means track the coalition means") {
  CounterRng rng(4);
  const Codebook c = random_codebook(5, 8, rng);
  const Coalition s({0, 2, 3}, 5);
  const int reps = 20000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(8);
  for (int r = 0; r < reps; ++r) sum += pirate_interleave(c, s, rng).cast<double>();
  for (Index j = 0; j < 8; ++j) {
    const double p = (c(0, j) + c(2, j) + c(3, j)) / 3.0;
    const double se = std::sqrt(p * (1 - p) / reps);
    CHECK(std::abs(sum(j) / reps - p) <= 5 * se + 1e-12);
  }
}

TEST_CASE("inject_errors flips exactly k") {
  CounterRng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const Codebook c = random_codebook(4, 60, rng, 0.3);
    const Coalition s({0, 1, 3}, 4);
    const CombinedWord w = pirate_majority(c, s);
    const Index m = marked_columns(c, s).size();
    CHECK(inject_errors(w, c, s, 0, ErrorMode::Uniform, rng) == w);
    CHECK(inject_errors(w, c, s, 0, ErrorMode::MarkedFirst, rng) == w);
    const Index k = static_cast<Index>(rng.below(61));
    CHECK(hamming(inject_errors(w, c, s, k, ErrorMode::Uniform, rng), w) == k);
    const Index km = static_cast<Index>(rng.below(static_cast<std::uint64_t>(m) + 1));
    const CombinedWord e = inject_errors(w, c, s, km, ErrorMode::MarkedFirst, rng);
    CHECK(hamming(e, w) == km);
    CHECK(feasibility_violations(c, s, e) == km);
    // Every marked column violated at k = |M|.
    const CombinedWord all = inject_errors(w, c, s, m, ErrorMode::MarkedFirst, rng);
    CHECK(weak_violations(marked_columns(c, s), all) == m);
    CHECK_THROWS_AS(inject_errors(w, c, s, m + 1, ErrorMode::MarkedFirst, rng), std::invalid_argument);
    CHECK_THROWS_AS(inject_errors(w, c, s, 61, ErrorMode::Uniform, rng), std::invalid_argument);
  }
}

TEST_CASE("gaussian attack with zero noise rounds the averages") {
  BitMatrix bits(4, 3);
  bits << 1, 1, 0,
          1, 0, 0,
          1, 1, 1,
          0, 0, 1;
  const Codebook c(bits);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  // Nominal n = 4 over the full coalition: means 0.75, 0.5, 0.5.
  CombinedWord expect(3);
  expect << 1, 1, 1;
  CHECK(pirate_gaussian_average(c, Coalition::all(4), 4, zero) == expect);
  // Drop user 3 but keep dividing by 4: 0.75, 0.5, 0.25.
  expect << 1, 1, 0;
  CHECK(pirate_gaussian_average(c, Coalition({0, 1, 2}, 4), 4, zero) == expect);
  CHECK_THROWS_AS(pirate_gaussian_average(c, Coalition::all(4), 4, Eigen::VectorXd::Zero(2)),
                  DimensionError);
}

TEST_CASE("gaussian attack parameters") {
  // Oracle: fixed point iterated from ceil(sqrt(1024)) = 32.
  CHECK(gaussian_attack_users(1024) == 1154);
  const Index n = 1154;
  CHECK(gaussian_attack_delta(n) == doctest::Approx(1.0 / (6.0 * std::numbers::e * 1154.0)));
  CHECK(gaussian_attack_variance(1024, n, gaussian_attack_delta(n)) ==
        doctest::Approx(0.015136823302096253).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_attack_variance(10, 5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_attack_variance(10, 5, 0.0), std::invalid_argument);
}

TEST_CASE("gaussian attack sees the coalition only through column sums") {
  CounterRng g(6);
  const Codebook c = random_codebook(8, 100, g);
  BitMatrix swapped = c.bits();
  swapped.row(1).swap(swapped.row(6));
  const Codebook c2(swapped);
  const Coalition s({1, 2, 4}, 8);
  const Coalition s2({2, 4, 6}, 8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng a(seed), b(seed);
    CHECK(pirate_gaussian_average(c, s, 8, 0.2, a) == pirate_gaussian_average(c2, s2, 8, 0.2, b));
  }
}

TEST_CASE("pirate names") {
  CHECK(parse_pirate("majority") == PirateKind::Majority);
  CHECK(parse_pirate("row_copy") == PirateKind::RowCopy);
  CHECK(parse_pirate("interleave") == PirateKind::Interleave);
  CHECK(parse_pirate("gaussian_average") == PirateKind::GaussianAverage);
  CHECK_FALSE(parse_pirate("nope").has_value());
  for (PirateKind k : {PirateKind::Majority, PirateKind::RowCopy, PirateKind::Interleave,
                       PirateKind::GaussianAverage})
    CHECK(parse_pirate(pirate_name(k)) == k);
}

TEST_CASE("averaging attack output is feasible with probability at least 2/3") {
  GaussianAttackConfig cfg;
  cfg.trials = 200;
  cfg.seed = 1024;
  const ExperimentReport r = run_gaussian_attack_experiment(cfg);
  MESSAGE("feasibility " << r.feasibility.value << " accuracy " << r.accuracy.value);
  CHECK(r.feasibility.value >= 2.0 / 3.0);
}
