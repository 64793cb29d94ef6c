#include "fpdp/cli.hpp"

#include "fpdp/compose.hpp"
#include "fpdp/experiments.hpp"
#include "fpdp/io.hpp"
#include "fpdp/pirates.hpp"
#include "fpdp/reconstruct.hpp"
#include "fpdp/reid.hpp"
#include "fpdp/robust.hpp"
#include "fpdp/tardos.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <optional>
#include <ostream>
#include <random>

namespace fpdp {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given, std::ostream& err) {
  if (given) return *given;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "generated seed " << seed << "\n";
  return seed;
}

Index parse_user(std::string_view text, Index n) {
  Index v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 1 || v > n) {
    throw UsageError("coalition: '" + std::string(text) + "' is not a user in 1.." + std::to_string(n));
  }
  return v - 1;
}

// "all", "all-but:K" or a comma-separated list, 1-indexed.
Coalition parse_coalition(const std::string& text, Index n) {
  if (text == "all") return Coalition::all(n);
  if (text.rfind("all-but:", 0) == 0) return Coalition::all_but(n, parse_user(text.substr(8), n));
  std::vector<Index> members;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    members.push_back(parse_user(std::string_view(text).substr(start, end - start), n));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  try {
    return Coalition(std::move(members), n);
  } catch (const DimensionError& e) {
    throw UsageError(std::string("coalition: ") + e.what());
  }
}

json accused_json(const TraceOutcome& t) { return t ? json(*t + 1) : json(); }

void emit_report(const ExperimentReport& report, const std::string& json_path,
                 const std::string& csv_path, std::ostream& out) {
  if (!csv_path.empty()) io::write_text(csv_path, report_csv(report));
  if (!json_path.empty()) {
    io::write_json(json_path, report_json(report));
  } else {
    out << report_json(report).dump(2) << "\n";
  }
}

struct Loaded {
  Codebook codebook;
  CodeSecret secret;
};

Loaded load_code(const std::string& codebook_path, const std::string& secret_path) {
  Codebook c = io::codebook_from_json(io::read_json(codebook_path), codebook_path);
  const json sj = io::read_json(secret_path);
  if (io::is_robust_secret(sj)) {
    RobustSecret s = io::robust_secret_from_json(sj, secret_path);
    if (s.inner.params.n != c.n() || s.length() != c.d()) {
      throw FormatError(secret_path + ": field 'perm' does not match codebook dimensions");
    }
    return {std::move(c), std::move(s)};
  }
  TardosSecret s = io::secret_from_json(sj, secret_path);
  if (s.params.n != c.n() || s.params.d != c.d()) {
    throw FormatError(secret_path + ": field 'd' does not match codebook dimensions");
  }
  return {std::move(c), std::move(s)};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fingerprinting codes, tracing and privacy attacks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a codebook and its secret");
  Index gen_n = 0;
  double gen_sec = 0.05;
  bool gen_robust = false;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_codebook = "codebook.json", gen_secret = "secret.json";
  gen->add_option("-n,--users", gen_n, "Number of users")->required();
  gen->add_option("--sec", gen_sec, "Security parameter in (0,1)");
  gen->add_flag("--robust", gen_robust, "Pad and permute for error robustness");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--codebook", gen_codebook, "Codebook output path");
  gen->add_option("--secret", gen_secret, "Secret output path");

  // trace
  auto* trace = app.add_subcommand("trace", "Trace a word to a user");
  std::string tr_codebook, tr_secret, tr_word;
  trace->add_option("--codebook", tr_codebook)->required();
  trace->add_option("--secret", tr_secret)->required();
  trace->add_option("--word", tr_word)->required();

  // pirate
  auto* pirate = app.add_subcommand("pirate", "Combine coalition codewords into a word");
  std::string pi_codebook, pi_strategy = "majority", pi_coalition = "all", pi_out = "word.json";
  std::string pi_mode = "marked-first";
  std::optional<std::uint64_t> pi_seed;
  Index pi_flips = 0;
  std::optional<Index> pi_nominal;
  std::optional<double> pi_delta;
  pirate->add_option("--codebook", pi_codebook)->required();
  pirate->add_option("--strategy", pi_strategy, "majority, row_copy, interleave or gaussian_average");
  pirate->add_option("--coalition", pi_coalition, "all, all-but:K or a list such as 1,4,7");
  pirate->add_option("--seed", pi_seed);
  pirate->add_option("--flips", pi_flips, "Number of positions to flip afterwards");
  pirate->add_option("--error-mode", pi_mode, "marked-first or uniform");
  pirate->add_option("--nominal-n", pi_nominal, "User count the averaging attack divides by");
  pirate->add_option("--delta", pi_delta, "Averaging attack delta");
  pirate->add_option("--out", pi_out, "Word output path");

  // reid
  auto* reid = app.add_subcommand("reid", "Run the re-identification experiment");
  std::string re_config, re_json, re_csv;
  std::optional<std::uint64_t> re_seed;
  int re_jobs = 1;
  reid->add_option("--config", re_config)->required();
  reid->add_option("--seed", re_seed, "Overrides the config seed");
  reid->add_option("--jobs", re_jobs)->check(CLI::PositiveNumber);
  reid->add_option("--json", re_json, "Report path (default: stdout)");
  reid->add_option("--csv", re_csv, "Per-trial CSV path");

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Run a reconstruction attack on an instance");
  std::string rc_instance, rc_attack = "l1";
  std::optional<double> rc_alpha;
  std::optional<std::uint64_t> rc_seed;
  double rc_agreement = 2.0 / 3.0;
  recon->add_option("--instance", rc_instance)->required();
  recon->add_option("--attack", rc_attack, "vc, grid or l1");
  recon->add_option("--alpha", rc_alpha, "Overrides the instance alpha");
  recon->add_option("--agreement", rc_agreement, "Grid agreement fraction");
  recon->add_option("--seed", rc_seed, "Grid local-search seed");

  // compose
  auto* compose = app.add_subcommand("compose", "Run the composed re-identification experiment");
  std::string co_config, co_json, co_csv;
  std::optional<std::uint64_t> co_seed;
  int co_jobs = 1;
  compose->add_option("--config", co_config)->required();
  compose->add_option("--seed", co_seed, "Overrides the config seed");
  compose->add_option("--jobs", co_jobs)->check(CLI::PositiveNumber);
  compose->add_option("--json", co_json);
  compose->add_option("--csv", co_csv);

  // gaussian-attack
  auto* gauss = app.add_subcommand("gaussian-attack", "Feasibility of the averaging attack");
  Index ga_d = 1024;
  std::optional<Index> ga_n;
  std::optional<double> ga_delta;
  double ga_sec = 0.05;
  Index ga_trials = 200;
  std::optional<std::uint64_t> ga_seed;
  int ga_jobs = 1;
  std::string ga_json, ga_csv;
  gauss->add_option("-d,--length", ga_d);
  gauss->add_option("-n,--users", ga_n, "Defaults to the fixed point for d");
  gauss->add_option("--delta", ga_delta, "Defaults to 1/(6en)");
  gauss->add_option("--sec", ga_sec);
  gauss->add_option("--trials", ga_trials);
  gauss->add_option("--seed", ga_seed);
  gauss->add_option("--jobs", ga_jobs)->check(CLI::PositiveNumber);
  gauss->add_option("--json", ga_json);
  gauss->add_option("--csv", ga_csv);

  // marked-stats
  auto* marked = app.add_subcommand("marked-stats", "Marked-column counts against the bound");
  Index ms_n = 10;
  double ms_sec = 0.05;
  Index ms_trials = 100;
  std::optional<std::uint64_t> ms_seed;
  int ms_jobs = 1;
  std::string ms_csv;
  marked->add_option("-n,--users", ms_n);
  marked->add_option("--sec", ms_sec);
  marked->add_option("--trials", ms_trials);
  marked->add_option("--seed", ms_seed);
  marked->add_option("--jobs", ms_jobs)->check(CLI::PositiveNumber);
  marked->add_option("--csv", ms_csv);

  std::vector<const char*> argv{"fpdp"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const std::uint64_t seed = resolve_seed(gen_seed, err);
      json secret;
      Index d = 0;
      if (gen_robust) {
        const RobustCode rc = robust_gen(gen_n, gen_sec, seed);
        io::write_json(gen_codebook, io::to_json(rc.codebook));
        secret = io::to_json(rc.secret);
        d = rc.codebook.d();
      } else {
        const TardosCode tc = tardos_gen(gen_n, gen_sec, seed);
        io::write_json(gen_codebook, io::to_json(tc.codebook));
        secret = io::to_json(tc.secret);
        d = tc.codebook.d();
      }
      io::write_json(gen_secret, secret);
      out << json{{"n", gen_n}, {"d", d}, {"sec", gen_sec}, {"robust", gen_robust}, {"seed", seed},
                  {"codebook", gen_codebook}, {"secret", gen_secret}}
                 .dump()
          << "\n";
    } else if (*trace) {
      const Loaded code = load_code(tr_codebook, tr_secret);
      const CombinedWord word = io::word_from_json(io::read_json(tr_word), tr_word);
      if (word.size() != code.codebook.d()) {
        throw FormatError(tr_word + ": field 'd' does not match the codebook length");
      }
      const ReidDecision d = trace_decide(code.secret, code.codebook, word);
      out << json{{"accused", accused_json(d.accused)}, {"score_max", d.score_max}}.dump() << "\n";
    } else if (*pirate) {
      const auto kind = parse_pirate(pi_strategy);
      if (!kind) throw UsageError("unknown strategy '" + pi_strategy + "'");
      if (pi_mode != "marked-first" && pi_mode != "uniform") {
        throw UsageError("--error-mode must be marked-first or uniform");
      }
      const Codebook c = io::codebook_from_json(io::read_json(pi_codebook), pi_codebook);
      const Coalition s = parse_coalition(pi_coalition, c.n());
      const std::uint64_t seed = resolve_seed(pi_seed, err);
      const Index nominal = pi_nominal.value_or(c.n());
      const double delta = pi_delta.value_or(gaussian_attack_delta(nominal));
      CounterRng rng(substream(seed, 1));
      CombinedWord word = run_pirate(*kind, c, s, rng, nominal, delta);
      if (pi_flips > 0) {
        CounterRng flip_rng(substream(seed, 2));
        word = inject_errors(word, c, s, pi_flips,
                             pi_mode == "uniform" ? ErrorMode::Uniform : ErrorMode::MarkedFirst, flip_rng);
      }
      io::write_json(pi_out, io::to_json(word));
      out << json{{"strategy", std::string(pirate_name(*kind))},
                  {"coalition_size", s.size()},
                  {"marked", marked_columns(c, s).size()},
                  {"violations", feasibility_violations(c, s, word)},
                  {"flips", pi_flips},
                  {"seed", seed},
                  {"out", pi_out}}
                 .dump()
          << "\n";
    } else if (*reid) {
      json cj = io::read_json(re_config);
      if (re_seed || !cj.contains("seed")) cj["seed"] = resolve_seed(re_seed, err);
      const ReidConfig config = reid_config_from_json(cj, re_config);
      emit_report(run_reid_experiment(config, re_jobs), re_json, re_csv, out);
    } else if (*recon) {
      const ReconInstance inst = recon_instance_from_json(io::read_json(rc_instance), rc_instance);
      const Eigen::MatrixXd M = query_matrix(inst.queries, inst.db);
      const double alpha = rc_alpha.value_or(inst.alpha);
      json result{{"attack", rc_attack}, {"alpha", alpha}};
      Eigen::VectorXd t;
      if (rc_attack == "vc") {
        const VcResult r = vc_reconstruct(M, inst.answers, alpha);
        result["status"] = r.feasible ? "feasible" : "infeasible";
        result["max_residual"] = r.max_residual;
        if (r.feasible) t = r.t;
      } else if (rc_attack == "grid") {
        GridParams p = GridParams::make(alpha, inst.alpha_prime);
        p.agreement = rc_agreement;
        p.seed = resolve_seed(rc_seed, err);
        const L1Result warm = l1_reconstruct(M, inst.answers);
        const GridResult r = grid_reconstruct(
            M, inst.answers, p, warm.t.size() ? std::optional(warm.t) : std::nullopt);
        result["status"] = r.status == GridStatus::Found ? "found" : "no_witness";
        result["search"] = r.exhaustive ? "exhaustive" : "heuristic";
        result["agreement"] = r.agreement;
        result["required"] = r.required;
        result["seed"] = p.seed;
        t = r.t;
      } else if (rc_attack == "l1") {
        const L1Result r = l1_reconstruct(M, inst.answers);
        result["status"] = lp_status_name(r.status);
        result["objective"] = r.direct_objective;
        t = r.t;
      } else {
        throw UsageError("--attack must be vc, grid or l1");
      }
      if (t.size()) {
        result["t"] = std::vector<double>(t.data(), t.data() + t.size());
        if (inst.truth) result["avg_error"] = average_error(t, *inst.truth);
      }
      out << result.dump(2) << "\n";
    } else if (*compose) {
      json cj = io::read_json(co_config);
      if (co_seed || !cj.contains("seed")) cj["seed"] = resolve_seed(co_seed, err);
      const ComposeConfig config = compose_config_from_json(cj, co_config);
      emit_report(run_composed_experiment(config, co_jobs), co_json, co_csv, out);
    } else if (*gauss) {
      GaussianAttackConfig config;
      config.d = ga_d;
      config.n = ga_n;
      config.delta = ga_delta;
      config.sec = ga_sec;
      config.trials = ga_trials;
      config.seed = resolve_seed(ga_seed, err);
      emit_report(run_gaussian_attack_experiment(config, ga_jobs), ga_json, ga_csv, out);
    } else if (*marked) {
      const MarkedStats stats = run_marked_stats(ms_n, ms_sec, ms_trials, resolve_seed(ms_seed, err), ms_jobs);
      if (!ms_csv.empty()) io::write_text(ms_csv, marked_stats_csv(stats));
      out << json{{"n", stats.n},
                  {"sec", stats.sec},
                  {"bound", stats.bound},
                  {"trials", static_cast<Index>(stats.rows.size())},
                  {"passes", stats.passes()},
                  {"pass_rate", static_cast<double>(stats.passes()) / static_cast<double>(stats.rows.size())},
                  {"seed", stats.master_seed}}
                 .dump()
          << "\n";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace fpdp
