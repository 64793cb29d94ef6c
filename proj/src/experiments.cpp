#include "fpdp/experiments.hpp"

#include "fpdp/io.hpp"
#include "fpdp/rng.hpp"
#include "fpdp/tardos.hpp"
#include "fpdp/trials.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fpdp {

namespace {

using nlohmann::json;

constexpr std::uint64_t kCodeStream = 1;
constexpr std::uint64_t kCoalitionStream = 2;
constexpr std::uint64_t kPirateStream = 3;
constexpr std::uint64_t kErrorStream = 4;

const char* shape_name(CoalitionShape s) { return s == CoalitionShape::Full ? "full" : "all_but_one"; }

// Marked columns of the padded code, real ones flipped first.
CombinedWord flip_real_first(const CombinedWord& word, const Codebook& c, const Coalition& s,
                             const RobustSecret& secret, Index k, CounterRng& rng) {
  std::vector<bool> fake(static_cast<std::size_t>(c.d()), false);
  for (const FakeColumn& f : secret.fake_columns()) fake[static_cast<std::size_t>(f.pos)] = true;
  const MarkedColumns marked = marked_columns(c, s);
  std::vector<Index> real_pool, fake_pool;
  for (const auto* set : {&marked.zero_marked, &marked.one_marked}) {
    for (Index j : *set) (fake[static_cast<std::size_t>(j)] ? fake_pool : real_pool).push_back(j);
  }
  if (k > static_cast<Index>(real_pool.size() + fake_pool.size())) {
    throw std::invalid_argument("flip_real_first: more flips than marked columns");
  }
  CombinedWord out = word;
  auto take = [&](std::vector<Index>& pool, Index count) {
    for (Index a = 0; a < count; ++a) {
      const auto b = static_cast<std::size_t>(a) +
                     static_cast<std::size_t>(rng.below(pool.size() - static_cast<std::size_t>(a)));
      std::swap(pool[static_cast<std::size_t>(a)], pool[b]);
      out(pool[static_cast<std::size_t>(a)]) ^= 1;
    }
  };
  const Index from_real = std::min<Index>(k, static_cast<Index>(real_pool.size()));
  take(real_pool, from_real);
  take(fake_pool, k - from_real);
  return out;
}

}  // namespace

ExperimentReport run_tracing_experiment(const TracingConfig& config, int jobs) {
  if (config.trials < 1) throw std::invalid_argument("tracing: trials must be at least 1");
  if (config.errors.per_marked && config.errors.per_length) {
    throw std::invalid_argument("tracing: choose one error fraction");
  }
  if (config.errors.real_first && config.code != CodeKind::Robust) {
    throw std::invalid_argument("tracing: real-first flips need the robust code");
  }
  const TardosParams params = TardosParams::make(config.n, config.sec);
  const double delta = gaussian_attack_delta(config.n);

  ExperimentReport report;
  report.experiment = "tracing";
  report.master_seed = config.seed;
  report.config = json{{"code", config.code == CodeKind::Robust ? "robust" : "plain"},
                       {"pirate", std::string(pirate_name(config.pirate))},
                       {"coalition", shape_name(config.coalition)},
                       {"n", config.n},
                       {"sec", config.sec},
                       {"per_marked", config.errors.per_marked ? json(*config.errors.per_marked) : json()},
                       {"per_length", config.errors.per_length ? json(*config.errors.per_length) : json()},
                       {"mode", config.errors.mode == ErrorMode::MarkedFirst ? "marked_first" : "uniform"},
                       {"real_first", config.errors.real_first},
                       {"budget_beta", config.budget_beta},
                       {"trials", config.trials},
                       {"seed", config.seed}};

  report.records = run_trials(config.trials, jobs, [&](Index t) {
    const std::uint64_t seed = trial_seed(config.seed, static_cast<std::uint64_t>(t));
    const GeneratedCode code = generate_code(config.code, params, substream(seed, kCodeStream));
    const Codebook& c = code.codebook;

    std::optional<Index> excluded;
    Coalition s = Coalition::all(config.n);
    if (config.coalition == CoalitionShape::AllButOne) {
      CounterRng pick(substream(seed, kCoalitionStream));
      excluded = static_cast<Index>(pick.below(static_cast<std::uint64_t>(config.n)));
      s = Coalition::all_but(config.n, *excluded);
    }

    CounterRng pirate_rng(substream(seed, kPirateStream));
    CombinedWord word = run_pirate(config.pirate, c, s, pirate_rng, config.n, delta);

    Index k = 0;
    if (config.errors.per_marked) {
      k = allowed_failures(*config.errors.per_marked, marked_columns(c, s).size());
    } else if (config.errors.per_length) {
      k = allowed_failures(*config.errors.per_length, c.d());
    }
    if (k > 0) {
      CounterRng err(substream(seed, kErrorStream));
      word = config.errors.real_first
                 ? flip_real_first(word, c, s, std::get<RobustSecret>(code.secret), k, err)
                 : inject_errors(word, c, s, k, config.errors.mode, err);
    }

    const ReidDecision decision = trace_decide(code.secret, c, word);
    TrialRecord rec;
    rec.trial = t;
    rec.seed = seed;
    rec.accused_someone = decision.accused.has_value();
    if (decision.accused) rec.accused = std::to_string(*decision.accused + 1);
    rec.score_max = decision.score_max;
    rec.feasible = feasible(c, s, word, 0.0);
    rec.accurate = config.errors.per_marked ? weakly_feasible(c, s, word, config.budget_beta)
                                            : feasible(c, s, word, config.budget_beta);
    if (excluded) {
      rec.removed = std::to_string(*excluded + 1);
      rec.removed_accused = decision.accused == excluded;
    }
    return rec;
  });
  aggregate(report);
  report.regime = "pirate";
  return report;
}

ExperimentReport run_gaussian_attack_experiment(const GaussianAttackConfig& config, int jobs) {
  if (config.trials < 1) throw std::invalid_argument("gaussian attack: trials must be at least 1");
  const Index n = config.n.value_or(gaussian_attack_users(config.d));
  const double delta = config.delta.value_or(gaussian_attack_delta(n));
  const TardosParams params = TardosParams::with_length(n, config.sec, config.d);
  const double sigma = std::sqrt(gaussian_attack_variance(config.d, n, delta));

  ExperimentReport report;
  report.experiment = "gaussian_attack";
  report.master_seed = config.seed;
  report.config = json{{"d", config.d},   {"n", n},
                       {"delta", delta},  {"sigma", sigma},
                       {"sec", config.sec}, {"trials", config.trials},
                       {"seed", config.seed}};

  report.records = run_trials(config.trials, jobs, [&](Index t) {
    const std::uint64_t seed = trial_seed(config.seed, static_cast<std::uint64_t>(t));
    const TardosCode code = tardos_gen(params, substream(seed, kCodeStream));
    CounterRng pick(substream(seed, kCoalitionStream));
    const Index excluded = static_cast<Index>(pick.below(static_cast<std::uint64_t>(n)));
    const Coalition s = Coalition::all_but(n, excluded);

    CounterRng noise_rng(substream(seed, kPirateStream));
    Eigen::VectorXd noise(config.d);
    for (Index j = 0; j < config.d; ++j) noise(j) = sigma * noise_rng.normal();
    const CombinedWord word = pirate_gaussian_average(code.codebook, s, n, noise);

    const ReidDecision decision = trace_decide(code.secret, code.codebook, word);
    TrialRecord rec;
    rec.trial = t;
    rec.seed = seed;
    rec.accused_someone = decision.accused.has_value();
    if (decision.accused) rec.accused = std::to_string(*decision.accused + 1);
    rec.score_max = decision.score_max;
    rec.feasible = feasible(code.codebook, s, word, 0.0);
    rec.accurate = noise.cwiseAbs().maxCoeff() < 1.0 / 3.0;
    rec.removed = std::to_string(excluded + 1);
    rec.removed_accused = decision.accused == TraceOutcome(excluded);
    return rec;
  });
  aggregate(report);
  report.regime = "averaging";
  return report;
}

Index MarkedStats::passes() const {
  Index p = 0;
  for (const MarkedStatsRow& r : rows) p += r.pass;
  return p;
}

MarkedStats run_marked_stats(Index n, double sec, Index trials, std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("marked stats: trials must be at least 1");
  const TardosParams params = TardosParams::make(n, sec);
  MarkedStats stats;
  stats.n = n;
  stats.sec = sec;
  stats.bound = marked_column_bound(n, sec);
  stats.master_seed = seed;
  stats.rows = run_trials(trials, jobs, [&](Index t) {
    MarkedStatsRow row;
    row.trial = t;
    row.seed = trial_seed(seed, static_cast<std::uint64_t>(t));
    const TardosCode code = tardos_gen(params, substream(row.seed, kCodeStream));
    const MarkedColumns m = marked_columns(code.codebook, Coalition::all(n));
    row.zero_marked = static_cast<Index>(m.zero_marked.size());
    row.one_marked = static_cast<Index>(m.one_marked.size());
    row.pass = static_cast<double>(row.zero_marked) >= stats.bound &&
               static_cast<double>(row.one_marked) >= stats.bound;
    return row;
  });
  return stats;
}

std::string marked_stats_csv(const MarkedStats& stats) {
  std::ostringstream out;
  out << "trial,seed,zero_marked,one_marked,bound,pass\n";
  for (const MarkedStatsRow& r : stats.rows) {
    out << r.trial << ',' << r.seed << ',' << r.zero_marked << ',' << r.one_marked << ','
        << io::format_double(stats.bound) << ',' << int{r.pass} << '\n';
  }
  out << "aggregate," << stats.master_seed << ",,," << io::format_double(stats.bound) << ','
      << io::format_double(static_cast<double>(stats.passes()) /
                           static_cast<double>(std::max<std::size_t>(stats.rows.size(), 1)))
      << '\n';
  return out.str();
}

}  // namespace fpdp
