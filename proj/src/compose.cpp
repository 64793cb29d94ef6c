#include "fpdp/compose.hpp"

#include "fpdp/rng.hpp"
#include "fpdp/trials.hpp"

#include <map>
#include <stdexcept>

namespace fpdp {

namespace {

using nlohmann::json;

constexpr std::uint64_t kAnswerStream = 2;
constexpr std::uint64_t kChoiceStream = 3;
constexpr std::uint64_t kRemovalStream = 4;
constexpr std::uint64_t kRemovedAnswerStream = 5;
constexpr std::uint64_t kRemovedChoiceStream = 6;
constexpr std::uint64_t kInnerCodeStream = 100;

void check_value_query(const CountingQuery& q) {
  if (std::holds_alternative<IndexedSubset>(q)) {
    throw DimensionError("product queries must depend on row values, not row indices");
  }
}

[[noreturn]] void bad(std::string_view where, std::string_view field, std::string_view what) {
  throw FormatError(std::string(where) + ": field '" + std::string(field) + "' " +
                    std::string(what));
}

}  // namespace

ProductDatabase::ProductDatabase(Database outer, std::vector<Database> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (outer_.n() < 1) throw DimensionError("product: outer database is empty");
  if (static_cast<Index>(inner_.size()) != outer_.n()) {
    throw DimensionError("product: one inner database per outer row required");
  }
  for (const Database& d : inner_) {
    if (d.n() != inner_.front().n() || d.d() != inner_.front().d() || d.n() < 1) {
      throw DimensionError("product: inner databases must share a non-zero size and width");
    }
  }
}

Index ProductDatabase::flatten(Index i, Index j) const {
  if (i < 0 || i >= outer_n() || j < 0 || j >= inner_n()) {
    throw DimensionError("product: row index out of range");
  }
  return i * inner_n() + j;
}

std::pair<Index, Index> ProductDatabase::unflatten(Index row) const {
  if (row < 0 || row >= rows()) throw DimensionError("product: row index out of range");
  return {row / inner_n(), row % inner_n()};
}

ProductDatabase ProductDatabase::with_junk(Index i, Index j) const {
  flatten(i, j);
  ProductDatabase out = *this;
  out.junk_ = std::pair{i, j};
  return out;
}

Database ProductDatabase::outer_rows() const {
  BitMatrix bits(rows(), outer_.d());
  for (Index r = 0; r < rows(); ++r) bits.row(r) = outer_.row(r / inner_n());
  if (junk_) bits.row(flatten(junk_->first, junk_->second)).setZero();
  return Database(std::move(bits));
}

Database ProductDatabase::inner_rows() const {
  BitMatrix bits(rows(), inner_.front().d());
  for (Index r = 0; r < rows(); ++r) bits.row(r) = inner(r / inner_n()).row(r % inner_n());
  if (junk_) bits.row(flatten(junk_->first, junk_->second)).setZero();
  return Database(std::move(bits));
}

double eval_conjunction(const CountingQuery& q, const CountingQuery& qp, const ProductDatabase& db) {
  check_value_query(q);
  check_value_query(qp);
  const Database outer = db.outer_rows();
  const Database inner = db.inner_rows();
  check_query(q, outer);
  check_query(qp, inner);
  Index hits = 0;
  for (Index r = 0; r < db.rows(); ++r) hits += eval_row(q, outer, r) && eval_row(qp, inner, r);
  return static_cast<double>(hits) / static_cast<double>(db.rows());
}

double subset_sum_rhs(const CountingQuery& q, const CountingQuery& qp, const ProductDatabase& db) {
  check_value_query(q);
  double sum = 0.0;
  for (Index i = 0; i < db.outer_n(); ++i) {
    if (eval_row(q, db.outer(), i)) sum += eval_query(qp, db.inner(i));
  }
  return sum / static_cast<double>(db.outer_n());
}

Eigen::MatrixXd conjunction_answers(const QueryFamily& outer_q, const QueryFamily& inner_q,
                                    const ProductDatabase& db) {
  for (const auto& q : outer_q) check_value_query(q);
  for (const auto& q : inner_q) check_value_query(q);
  const Eigen::MatrixXd W = query_matrix(outer_q, db.outer_rows());
  const Eigen::MatrixXd V = query_matrix(inner_q, db.inner_rows());
  return W * V.transpose() / static_cast<double>(db.rows());
}

SliceAttack vc_attack(Eigen::MatrixXd M, double alpha) {
  return [M = std::move(M), alpha](const AnswerVector& a) -> std::optional<Eigen::VectorXd> {
    VcResult r = vc_reconstruct(M, a, alpha);
    if (!r.feasible) return std::nullopt;
    return std::move(r.t);
  };
}

SliceAttack l1_attack(Eigen::MatrixXd M) {
  return [M = std::move(M)](const AnswerVector& a) -> std::optional<Eigen::VectorXd> {
    L1Result r = l1_reconstruct(M, a);
    if (r.status != LpStatus::Optimal) return std::nullopt;
    return std::move(r.t);
  };
}

Subanswers reconstruct_subanswers(const Eigen::MatrixXd& A, const SliceAttack& attack) {
  Subanswers out;
  out.valid.assign(static_cast<std::size_t>(A.cols()), false);
  std::map<std::vector<double>, std::optional<Eigen::VectorXd>> memo;
  Index n = -1;
  std::vector<std::optional<Eigen::VectorXd>> results(static_cast<std::size_t>(A.cols()));
  for (Index k = 0; k < A.cols(); ++k) {
    std::vector<double> key(A.col(k).data(), A.col(k).data() + A.rows());
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(std::move(key), attack(A.col(k))).first;
    results[static_cast<std::size_t>(k)] = it->second;
    if (it->second) n = it->second->size();
  }
  if (n < 0) n = 1;
  out.t = Eigen::MatrixXd::Constant(A.cols(), n, 0.5);
  for (Index k = 0; k < A.cols(); ++k) {
    const auto& r = results[static_cast<std::size_t>(k)];
    if (r && r->size() == n) {
      out.t.row(k) = r->transpose();
      out.valid[static_cast<std::size_t>(k)] = true;
    }
  }
  return out;
}

AnswerVector subanswer_column(const Subanswers& sub, Index i) {
  if (i < 0 || i >= sub.t.cols()) throw DimensionError("subanswer column out of range");
  return sub.t.col(i);
}

ComposedOutcome composed_adversary(const ProductDatabase& db, const std::vector<CodeSecret>& secrets,
                                   const Subanswers& sub, CounterRng& rng) {
  if (static_cast<Index>(secrets.size()) != db.outer_n()) {
    throw DimensionError("composed adversary: one secret per subdatabase required");
  }
  if (sub.t.cols() != db.outer_n()) throw DimensionError("composed adversary: subanswer width mismatch");
  ComposedOutcome out;
  out.chosen = static_cast<Index>(rng.below(static_cast<std::uint64_t>(db.outer_n())));
  const ReidDecision d = reid_decide(secrets[static_cast<std::size_t>(out.chosen)],
                                     db.inner(out.chosen), subanswer_column(sub, out.chosen));
  out.score_max = d.score_max;
  if (d.accused) out.accused = std::pair{out.chosen, *d.accused};
  return out;
}

std::string product_label(Index i, Index j) {
  return std::to_string(i + 1) + ":" + std::to_string(j + 1);
}

void ComposeConfig::validate() const {
  if (outer_n < 1 || outer_n > kMaxShatterUsers) {
    throw std::invalid_argument("compose: outer n must lie in [1, " +
                                std::to_string(kMaxShatterUsers) + "]");
  }
  TardosParams::make(inner_n, sec);
  if (attack != "vc" && attack != "l1") throw std::invalid_argument("compose: attack must be vc or l1");
  if (!(alpha >= 0.0)) throw std::invalid_argument("compose: alpha must be non-negative");
  if (!(c > 0.0)) throw std::invalid_argument("compose: c must be positive");
  if (trials < 1) throw std::invalid_argument("compose: trials must be at least 1");
  fpdp::validate(mechanism);
}

ComposeConfig compose_config_from_json(const json& j, std::string_view where) {
  if (!j.is_object()) throw FormatError(std::string(where) + ": config must be a JSON object");
  ComposeConfig c;
  auto integer = [&](const json& obj, const char* key, const char* name, Index& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number_integer()) bad(where, name, "must be an integer");
    out = obj[key].get<Index>();
  };
  auto real = [&](const json& obj, const char* key, const char* name, double& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number()) bad(where, name, "must be a number");
    out = obj[key].get<double>();
  };
  if (j.contains("outer")) {
    if (!j["outer"].is_object()) bad(where, "outer", "must be an object");
    integer(j["outer"], "n", "outer.n", c.outer_n);
  }
  if (j.contains("inner")) {
    const json& in = j["inner"];
    if (!in.is_object()) bad(where, "inner", "must be an object");
    integer(in, "n", "inner.n", c.inner_n);
    real(in, "sec", "inner.sec", c.sec);
    const std::string code = in.value("code", std::string("plain"));
    if (code == "plain") {
      c.inner_code = CodeKind::Plain;
    } else if (code == "robust") {
      c.inner_code = CodeKind::Robust;
    } else {
      bad(where, "inner.code", "must be plain or robust");
    }
  }
  if (j.contains("mechanism")) c.mechanism = mechanism_from_json(j["mechanism"], where);
  if (j.contains("attack")) {
    if (!j["attack"].is_string()) bad(where, "attack", "must be a string");
    c.attack = j["attack"].get<std::string>();
  }
  real(j, "alpha", "alpha", c.alpha);
  real(j, "c", "c", c.c);
  integer(j, "trials", "trials", c.trials);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) bad(where, "seed", "must be an integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(where) + ": " + e.what());
  }
  return c;
}

json to_json(const ComposeConfig& c) {
  return json{{"outer", {{"n", c.outer_n}, {"form", "marginals"}}},
              {"inner",
               {{"n", c.inner_n}, {"sec", c.sec},
                {"code", c.inner_code == CodeKind::Robust ? "robust" : "plain"}}},
              {"mechanism", mechanism_to_json(c.mechanism, std::nullopt)},
              {"attack", c.attack},
              {"alpha", c.alpha},
              {"c", c.c},
              {"trials", c.trials},
              {"seed", c.seed}};
}

ExperimentReport run_composed_experiment(const ComposeConfig& config, int jobs) {
  config.validate();
  const QueryInstance outer = build_shattered_instance(config.outer_n, ShatterForm::Marginals);
  const Eigen::MatrixXd M = query_matrix(outer.queries, outer.db);
  const SliceAttack attack = config.attack == "vc" ? vc_attack(M, config.alpha) : l1_attack(M);
  const TardosParams params = TardosParams::make(config.inner_n, config.sec);
  const Index inner_d = config.inner_code == CodeKind::Robust ? 5 * params.d : params.d;
  const QueryFamily inner_q = one_way_marginals(inner_d);
  const double beta = config.inner_code == CodeKind::Robust ? 1.0 / 75.0 : 0.0;
  // Average-error target of the outer attack: 4 alpha for vc.
  const double alpha_prime = 4.0 * config.alpha;

  ExperimentReport report;
  report.experiment = "compose";
  report.config = to_json(config);
  report.master_seed = config.seed;

  report.records = run_trials(config.trials, jobs, [&](Index t) {
    const std::uint64_t seed = trial_seed(config.seed, static_cast<std::uint64_t>(t));
    std::vector<Database> inner;
    std::vector<CodeSecret> secrets;
    for (Index i = 0; i < config.outer_n; ++i) {
      GeneratedCode code = generate_code(config.inner_code, params,
                                         substream(seed, kInnerCodeStream + static_cast<std::uint64_t>(i)));
      inner.push_back(as_database(code.codebook));
      secrets.push_back(std::move(code.secret));
    }
    const ProductDatabase db(outer.db, std::move(inner));

    auto answer = [&](const ProductDatabase& source, std::uint64_t stream) {
      const Eigen::MatrixXd exact = conjunction_answers(outer.queries, inner_q, source);
      CounterRng rng(substream(seed, stream));
      const AnswerVector flat = Eigen::Map<const Eigen::VectorXd>(exact.data(), exact.size());
      const AnswerVector noisy = perturb(config.mechanism, flat, source.rows(), rng);
      return std::pair{exact, Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(noisy.data(), exact.rows(), exact.cols()))};
    };

    TrialRecord rec;
    rec.trial = t;
    rec.seed = seed;

    const auto [exact, noisy] = answer(db, kAnswerStream);
    const Subanswers sub = reconstruct_subanswers(noisy, attack);
    CounterRng choice(substream(seed, kChoiceStream));
    const ComposedOutcome outcome = composed_adversary(db, secrets, sub, choice);
    rec.accused_someone = outcome.accused.has_value();
    if (outcome.accused) rec.accused = product_label(outcome.accused->first, outcome.accused->second);
    rec.score_max = outcome.score_max;
    rec.accurate = is_accurate(Eigen::Map<const Eigen::VectorXd>(noisy.data(), noisy.size()),
                               Eigen::Map<const Eigen::VectorXd>(exact.data(), exact.size()),
                               config.alpha + 1e-12, 0.0);
    const Database& chosen = db.inner(outcome.chosen);
    const AnswerVector column = subanswer_column(sub, outcome.chosen);
    rec.feasible = feasible(as_codebook(chosen), Coalition::all(chosen.n()), round_answers(column), beta);
    rec.slice_accurate = is_accurate(column, answer_exact(chosen), 6.0 * config.c * alpha_prime + 1e-12,
                                     2.0 / config.c);

    CounterRng removal(substream(seed, kRemovalStream));
    const Index ri = static_cast<Index>(removal.below(static_cast<std::uint64_t>(config.outer_n)));
    const Index rj = static_cast<Index>(removal.below(static_cast<std::uint64_t>(config.inner_n)));
    const auto [exact_r, noisy_r] = answer(db.with_junk(ri, rj), kRemovedAnswerStream);
    const Subanswers sub_r = reconstruct_subanswers(noisy_r, attack);
    CounterRng choice_r(substream(seed, kRemovedChoiceStream));
    const ComposedOutcome removed = composed_adversary(db, secrets, sub_r, choice_r);
    rec.removed = product_label(ri, rj);
    rec.removed_accused = removed.accused == std::optional(std::pair{ri, rj});
    return rec;
  });
  aggregate(report);
  report.regime = std::holds_alternative<ExactMechanism>(config.mechanism) ? "exact" : "noisy";
  return report;
}

}  // namespace fpdp
