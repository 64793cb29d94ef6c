#pragma once

#include "fpdp/pirates.hpp"
#include "fpdp/reid.hpp"
#include "fpdp/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fpdp {

enum class CoalitionShape { Full, AllButOne };

/// Error injection after the pirate. At most one of the two fractions is set;
/// k = floor(fraction * |M|) or floor(fraction * length).
struct ErrorPlan {
  std::optional<double> per_marked;
  std::optional<double> per_length;
  ErrorMode mode = ErrorMode::MarkedFirst;
  /// Robust code only: flip real marked columns before fake ones. Uses the
  /// secret, so it models an adversary stronger than the pirate model.
  bool real_first = false;
};

struct TracingConfig {
  CodeKind code = CodeKind::Plain;
  PirateKind pirate = PirateKind::Majority;
  CoalitionShape coalition = CoalitionShape::Full;
  Index n = 10;
  double sec = 0.05;
  ErrorPlan errors;
  /// Error budget the `accurate` column is judged against: WF_beta for
  /// per_marked plans, F_beta otherwise.
  double budget_beta = 0.0;
  Index trials = 100;
  std::uint64_t seed = 1;
};

/// Per trial: fresh code, pirate word from the coalition, optional errors,
/// trace. For AllButOne the excluded user is uniform and recorded as removed.
ExperimentReport run_tracing_experiment(const TracingConfig& config, int jobs = 1);

struct GaussianAttackConfig {
  Index d = 1024;
  /// Defaults to the fixed point of gaussian_attack_users(d).
  std::optional<Index> n;
  /// Defaults to 1/(6 e n).
  std::optional<double> delta;
  double sec = 0.05;
  Index trials = 200;
  std::uint64_t seed = 1;
};

/// Tardos biases at length d, coalition [n] minus a uniform user, averaging
/// attack. `feasible` is membership in F_0(C_S); `accurate` is every noisy
/// average within 1/3 of the coalition mean.
ExperimentReport run_gaussian_attack_experiment(const GaussianAttackConfig& config, int jobs = 1);

struct MarkedStatsRow {
  Index trial = 0;
  std::uint64_t seed = 0;
  Index zero_marked = 0;
  Index one_marked = 0;
  bool pass = false;
};

struct MarkedStats {
  Index n = 0;
  double sec = 0.0;
  double bound = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<MarkedStatsRow> rows;
  Index passes() const;
};

/// Marked columns of the full coalition over fresh generations, against
/// 5 n^{3/2} ln(n/sec).
MarkedStats run_marked_stats(Index n, double sec, Index trials, std::uint64_t seed, int jobs = 1);
std::string marked_stats_csv(const MarkedStats& stats);

}  // namespace fpdp
