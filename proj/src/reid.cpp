#include "fpdp/reid.hpp"

#include "fpdp/rng.hpp"
#include "fpdp/trials.hpp"

#include <cmath>
#include <stdexcept>

namespace fpdp {

namespace {

using nlohmann::json;

constexpr std::uint64_t kCodeStream = 1;
constexpr std::uint64_t kAnswerStream = 2;
constexpr std::uint64_t kRemovalStream = 3;
constexpr std::uint64_t kRemovedAnswerStream = 4;

[[noreturn]] void bad(std::string_view where, std::string_view field, std::string_view what) {
  throw FormatError(std::string(where) + ": field '" + std::string(field) + "' " +
                    std::string(what));
}

}  // namespace

CombinedWord round_answers(const AnswerVector& a) {
  return (a.array() >= 0.5).cast<std::uint8_t>().matrix();
}

ReidDecision trace_decide(const CodeSecret& secret, const Codebook& c, const CombinedWord& word) {
  return std::visit(
      [&](const auto& s) -> ReidDecision {
        using S = std::decay_t<decltype(s)>;
        Eigen::VectorXd scores;
        const TardosSecret* inner = nullptr;
        if constexpr (std::is_same_v<S, RobustSecret>) {
          scores = tardos_scores(s.inner, strip_codebook(s, c), strip_word(s, word));
          inner = &s.inner;
        } else {
          scores = tardos_scores(s, c, word);
          inner = &s;
        }
        return ReidDecision{tardos_accuse(*inner, scores), scores.maxCoeff()};
      },
      secret);
}

ReidDecision reid_decide(const CodeSecret& secret, const Database& db, const AnswerVector& a) {
  if (a.size() != db.d()) throw DimensionError("reid: one answer per attribute required");
  return trace_decide(secret, as_codebook(db), round_answers(a));
}

TraceOutcome reid_adversary(const CodeSecret& secret, const Database& db, const AnswerVector& a) {
  return reid_decide(secret, db, a).accused;
}

GeneratedCode generate_code(CodeKind kind, const TardosParams& params, std::uint64_t seed) {
  if (kind == CodeKind::Robust) {
    RobustCode rc = robust_gen(params, seed);
    return GeneratedCode{std::move(rc.codebook), std::move(rc.secret)};
  }
  TardosCode tc = tardos_gen(params, seed);
  return GeneratedCode{std::move(tc.codebook), std::move(tc.secret)};
}

double ReidConfig::effective_beta() const {
  if (beta) return *beta;
  return code == CodeKind::Robust ? 1.0 / 75.0 : 0.0;
}

void ReidConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("reid: trials must be at least 1");
  if (calibration_n && *calibration_n < 1) {
    throw std::invalid_argument("reid: calibration n must be positive");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("reid: alpha must be non-negative");
  const double b = effective_beta();
  if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("reid: beta must lie in [0,1)");
  TardosParams::make(n, sec);
  fpdp::validate(mechanism);
}

Mechanism mechanism_from_json(const json& j, std::string_view where,
                              std::optional<Index>* calibration_n) {
  if (j.is_string()) return mechanism_from_json(json{{"name", j}}, where, calibration_n);
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    bad(where, "mechanism.name", "must be a string");
  }
  const std::string name = j["name"].get<std::string>();
  const json params = j.value("params", json::object());
  if (!params.is_object()) bad(where, "mechanism.params", "must be an object");
  auto num = [&](const char* key, double fallback) {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_number()) bad(where, std::string("mechanism.params.") + key, "must be a number");
    return params[key].get<double>();
  };
  if (calibration_n && params.contains("n")) {
    if (!params["n"].is_number_integer()) bad(where, "mechanism.params.n", "must be an integer");
    *calibration_n = params["n"].get<Index>();
  }
  Mechanism m;
  if (name == "exact") {
    m = ExactMechanism{};
  } else if (name == "laplace") {
    m = LaplaceMechanism{num("eps", 1.0)};
  } else if (name == "gaussian") {
    m = GaussianMechanism{num("eps", 1.0), num("delta", 1e-6)};
  } else {
    bad(where, "mechanism.name", "must be exact, laplace or gaussian");
  }
  try {
    fpdp::validate(m);
  } catch (const std::invalid_argument& e) {
    bad(where, "mechanism.params", e.what());
  }
  return m;
}

json mechanism_to_json(const Mechanism& mech, std::optional<Index> calibration_n) {
  json params = json::object();
  if (const auto* l = std::get_if<LaplaceMechanism>(&mech)) params["eps"] = l->eps;
  if (const auto* g = std::get_if<GaussianMechanism>(&mech)) {
    params["eps"] = g->eps;
    params["delta"] = g->delta;
  }
  if (calibration_n) params["n"] = *calibration_n;
  return json{{"name", mechanism_name(mech)}, {"params", params}};
}

ReidConfig reid_config_from_json(const json& j, std::string_view where) {
  if (!j.is_object()) throw FormatError(std::string(where) + ": config must be a JSON object");
  ReidConfig c;
  const std::string code = j.value("code", std::string("plain"));
  if (code == "plain") {
    c.code = CodeKind::Plain;
  } else if (code == "robust") {
    c.code = CodeKind::Robust;
  } else {
    bad(where, "code", "must be plain or robust");
  }
  if (j.contains("mechanism")) c.mechanism = mechanism_from_json(j["mechanism"], where, &c.calibration_n);
  auto integer = [&](const char* key, Index& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) bad(where, key, "must be an integer");
    out = j[key].get<Index>();
  };
  integer("n", c.n);
  integer("trials", c.trials);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) bad(where, "seed", "must be an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("sec")) {
    if (!j["sec"].is_number()) bad(where, "sec", "must be a number");
    c.sec = j["sec"].get<double>();
  }
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) c.beta = j["beta"].get<double>();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(where) + ": " + e.what());
  }
  return c;
}

json to_json(const ReidConfig& c) {
  return json{{"code", c.code == CodeKind::Robust ? "robust" : "plain"},
              {"mechanism", mechanism_to_json(c.mechanism, c.calibration_n)},
              {"n", c.n},
              {"sec", c.sec},
              {"trials", c.trials},
              {"seed", c.seed},
              {"alpha", c.alpha},
              {"beta", c.effective_beta()}};
}

bool predicted_accurate(const Mechanism& mech, Index d, Index calibration_n) {
  const double dd = static_cast<double>(d);
  if (const auto* l = std::get_if<LaplaceMechanism>(&mech)) {
    return laplace_scale(d, calibration_n, l->eps) * std::log(3.0 * dd) <= 1.0 / 3.0;
  }
  if (const auto* g = std::get_if<GaussianMechanism>(&mech)) {
    const double sigma = std::sqrt(gaussian_mechanism_variance(d, calibration_n, g->eps, g->delta));
    return sigma * std::sqrt(2.0 * std::log(6.0 * dd)) <= 1.0 / 3.0;
  }
  return true;
}

ExperimentReport run_reid_experiment(const ReidConfig& config, int jobs) {
  config.validate();
  const TardosParams params = TardosParams::make(config.n, config.sec);
  const Index cal_n = config.calibration_n.value_or(config.n);
  const double beta = config.effective_beta();

  ExperimentReport report;
  report.experiment = "reid";
  report.config = to_json(config);
  report.master_seed = config.seed;

  report.records = run_trials(config.trials, jobs, [&](Index t) {
    const std::uint64_t seed = trial_seed(config.seed, static_cast<std::uint64_t>(t));
    const GeneratedCode code = generate_code(config.code, params, substream(seed, kCodeStream));
    const Database db = as_database(code.codebook);

    TrialRecord rec;
    rec.trial = t;
    rec.seed = seed;

    CounterRng answer_rng(substream(seed, kAnswerStream));
    const AnswerVector truth = answer_exact(db);
    const AnswerVector a = perturb(config.mechanism, truth, cal_n, answer_rng);
    const ReidDecision decision = reid_decide(code.secret, db, a);
    rec.accused_someone = decision.accused.has_value();
    if (decision.accused) rec.accused = std::to_string(*decision.accused + 1);
    rec.score_max = decision.score_max;
    rec.accurate = is_accurate(a, truth, config.alpha, beta);
    rec.feasible = feasible(code.codebook, Coalition::all(config.n), round_answers(a), beta);

    CounterRng removal_rng(substream(seed, kRemovalStream));
    const Index removed = static_cast<Index>(removal_rng.below(static_cast<std::uint64_t>(config.n)));
    const Database without = replace_with_junk(db, removed);
    CounterRng removed_rng(substream(seed, kRemovedAnswerStream));
    const AnswerVector a_removed = perturb(config.mechanism, answer_exact(without), cal_n, removed_rng);
    rec.removed = std::to_string(removed + 1);
    rec.removed_accused = reid_adversary(code.secret, db, a_removed) == TraceOutcome(removed);
    return rec;
  });
  aggregate(report);

  const Index d = config.code == CodeKind::Robust ? 5 * params.d : params.d;
  if (std::holds_alternative<ExactMechanism>(config.mechanism)) {
    report.regime = "exact";
  } else if (predicted_accurate(config.mechanism, d, cal_n)) {
    report.regime = "noisy-accurate";
    report.outside_guarantee = true;
  } else {
    report.regime = "noisy-inaccurate";
  }
  return report;
}

}  // namespace fpdp
