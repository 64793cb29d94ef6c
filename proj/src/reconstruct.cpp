#include "fpdp/reconstruct.hpp"

#include "fpdp/io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fpdp {

namespace {

using nlohmann::json;

void check_answers(const Eigen::MatrixXd& M, const AnswerVector& a) {
  if (a.size() != M.rows()) throw DimensionError("one answer per query required");
  if (M.cols() < 1) throw DimensionError("reconstruction needs at least one row");
}

[[noreturn]] void bad(std::string_view where, std::string_view field, std::string_view what) {
  throw FormatError(std::string(where) + ": field '" + std::string(field) + "' " +
                    std::string(what));
}

// Integer view of the grid search: t = k / m, S = Mi k, <q,t> = S_q / (n m).
class GridScorer {
 public:
  GridScorer(const Eigen::MatrixXd& M, const AnswerVector& a, const GridParams& p)
      : Mi_(M.cast<long long>()), a_(a), p_(p),
        scale_(static_cast<double>(M.cols()) * static_cast<double>(p.m)) {}

  Index agreement(const Eigen::Matrix<long long, Eigen::Dynamic, 1>& S) const {
    Index hits = 0;
    for (Index q = 0; q < S.size(); ++q) {
      hits += std::abs(static_cast<double>(S(q)) / scale_ - a_(q)) < 2.0 * p_.alpha;
    }
    return hits;
  }

  const Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>& matrix() const { return Mi_; }

 private:
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> Mi_;
  const AnswerVector& a_;
  const GridParams& p_;
  double scale_;
};

using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

Eigen::VectorXd to_grid(const IntVector& k, Index m) {
  return k.cast<double>() / static_cast<double>(m);
}

}  // namespace

Eigen::VectorXd correlations(const Eigen::MatrixXd& M, const Eigen::VectorXd& s) {
  if (s.size() != M.cols()) throw DimensionError("hidden vector length mismatch");
  return M * s / static_cast<double>(M.cols());
}

double correlation(const CountingQuery& q, const Database& db, const Eigen::VectorXd& s) {
  if (s.size() != db.n()) throw DimensionError("hidden vector length mismatch");
  check_query(q, db);
  double sum = 0.0;
  for (Index i = 0; i < db.n(); ++i) {
    if (eval_row(q, db, i)) sum += s(i);
  }
  return sum / static_cast<double>(db.n());
}

double average_error(const Eigen::VectorXd& t, const Eigen::VectorXd& s) {
  if (t.size() != s.size() || t.size() == 0) throw DimensionError("vector length mismatch");
  return (t - s).cwiseAbs().mean();
}

Database index_database(Index n) {
  if (n < 1) throw DimensionError("index database needs n >= 1");
  Index width = 1;
  while ((Index{1} << width) < n) ++width;
  BitMatrix bits(n, width);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < width; ++j) bits(i, j) = static_cast<std::uint8_t>((i >> j) & 1);
  }
  return Database(std::move(bits));
}

QueryInstance build_shattered_instance(Index n, ShatterForm form) {
  if (n < 1) throw DimensionError("shattered instance needs n >= 1");
  if (n > kMaxShatterUsers) {
    throw DimensionError("shattered instance: n = " + std::to_string(n) + " exceeds " +
                         std::to_string(kMaxShatterUsers));
  }
  QueryInstance out;
  const Index patterns = Index{1} << n;
  out.queries.reserve(static_cast<std::size_t>(patterns));
  if (form == ShatterForm::Marginals) {
    BitMatrix bits = BitMatrix::Ones(n, n);
    bits.diagonal().setZero();
    out.db = Database(std::move(bits));
    for (Index v = 0; v < patterns; ++v) {
      MonotoneMarginal q;
      for (Index j = 0; j < n; ++j) {
        if (((v >> j) & 1) == 0) q.attributes.push_back(j);
      }
      out.queries.emplace_back(std::move(q));
    }
  } else {
    out.db = index_database(n);
    for (Index v = 0; v < patterns; ++v) {
      IndexedSubset q;
      for (Index i = 0; i < n; ++i) {
        if ((v >> i) & 1) q.rows.push_back(i);
      }
      out.queries.emplace_back(std::move(q));
    }
  }
  return out;
}

QueryFamily random_subset_family(Index n, Index count, CounterRng& rng) {
  QueryFamily family;
  family.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    IndexedSubset q;
    for (Index i = 0; i < n; ++i) {
      if (rng.bernoulli(0.5)) q.rows.push_back(i);
    }
    family.emplace_back(std::move(q));
  }
  return family;
}

// ---------------------------------------------------------------------------

namespace {

// Constraint generation with LP bound `lp_alpha`; feasibility is judged
// against `alpha` after snapping.
VcResult vc_solve(const Eigen::MatrixXd& M, const AnswerVector& a, double lp_alpha, double alpha,
                  const VcOptions& opt) {
  const Index n = M.cols();
  const Index Q = M.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<Index> working;
  std::vector<bool> in_set(static_cast<std::size_t>(Q), false);
  for (Index q = 0; q < std::min<Index>(Q, 2 * n); ++q) {
    working.push_back(q);
    in_set[static_cast<std::size_t>(q)] = true;
  }

  VcResult out;
  while (out.rounds < opt.max_rounds) {
    ++out.rounds;
    const Index w = static_cast<Index>(working.size());
    LinearProgram<double> lp;
    lp.A = Eigen::MatrixXd::Zero(2 * w + n, n);
    lp.b.resize(2 * w + n);
    lp.rel.resize(static_cast<std::size_t>(2 * w + n));
    lp.c = Eigen::VectorXd::Zero(n);
    for (Index k = 0; k < w; ++k) {
      const Index q = working[static_cast<std::size_t>(k)];
      lp.A.row(2 * k) = M.row(q) * inv_n;
      lp.b(2 * k) = a(q) + lp_alpha;
      lp.rel[static_cast<std::size_t>(2 * k)] = Relation::LessEq;
      lp.A.row(2 * k + 1) = M.row(q) * inv_n;
      lp.b(2 * k + 1) = a(q) - lp_alpha;
      lp.rel[static_cast<std::size_t>(2 * k + 1)] = Relation::GreaterEq;
    }
    for (Index i = 0; i < n; ++i) {
      lp.A(2 * w + i, i) = 1.0;
      lp.b(2 * w + i) = 1.0;
      lp.rel[static_cast<std::size_t>(2 * w + i)] = Relation::LessEq;
    }
    const LpResult<double> res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) {
      out.feasible = false;
      return out;
    }

    const Eigen::VectorXd raw = res.x.cwiseMax(0.0).cwiseMin(1.0);
    Eigen::VectorXd t = (raw * 4294967296.0).array().round().matrix() / 4294967296.0;
    Eigen::VectorXd resid = (M * t * inv_n - a).cwiseAbs();
    if (resid.maxCoeff() > alpha) {
      // Thin feasible sets: snapping can step outside, the raw point may not.
      const Eigen::VectorXd raw_resid = (M * raw * inv_n - a).cwiseAbs();
      if (raw_resid.maxCoeff() < resid.maxCoeff()) {
        t = raw;
        resid = raw_resid;
      }
    }

    std::vector<Index> violated;
    for (Index q = 0; q < Q; ++q) {
      if (resid(q) > alpha + opt.tolerance && !in_set[static_cast<std::size_t>(q)]) {
        violated.push_back(q);
      }
    }
    if (violated.empty()) {
      out.t = std::move(t);
      out.max_residual = resid.maxCoeff();
      out.feasible = out.max_residual <= alpha + opt.tolerance;
      return out;
    }
    std::sort(violated.begin(), violated.end(), [&](Index x, Index y) {
      return resid(x) > resid(y) || (resid(x) == resid(y) && x < y);
    });
    violated.resize(std::min<std::size_t>(violated.size(), static_cast<std::size_t>(n)));
    for (Index q : violated) {
      working.push_back(q);
      in_set[static_cast<std::size_t>(q)] = true;
    }
  }
  out.feasible = false;
  return out;
}

}  // namespace

VcResult vc_reconstruct(const Eigen::MatrixXd& M, const AnswerVector& a, double alpha,
                        const VcOptions& opt) {
  check_answers(M, a);
  if (!(alpha >= 0.0)) throw std::invalid_argument("vc_reconstruct: alpha must be non-negative");
  // Snapping moves each answer by up to 2^-33; a tightened LP absorbs that.
  constexpr double kSnapMargin = 1e-9;
  if (alpha > kSnapMargin) {
    VcResult tight = vc_solve(M, a, alpha - kSnapMargin, alpha, opt);
    if (tight.feasible) return tight;
  }
  return vc_solve(M, a, alpha, alpha, opt);
}

VcResult vc_reconstruct(const Database& db, const QueryFamily& queries, const AnswerVector& a,
                        double alpha, const VcOptions& opt) {
  return vc_reconstruct(query_matrix(queries, db), a, alpha, opt);
}

// ---------------------------------------------------------------------------

GridParams GridParams::make(double alpha, double alpha_prime) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("grid: alpha must lie in (0,1)");
  if (!(alpha_prime > 0.0)) throw std::invalid_argument("grid: alpha' must be positive");
  GridParams p;
  p.alpha = alpha;
  p.alpha_prime = alpha_prime;
  p.m = static_cast<Index>(std::ceil(1.0 / alpha - 1e-12));
  return p;
}

double GridParams::recommended_users() const {
  return 1.0 / (144.0 * alpha_prime * alpha_prime * alpha * alpha);
}

double GridParams::kappa() const { return alpha_prime / 2.0; }

Index GridParams::default_query_count(Index n, Index m) {
  return static_cast<Index>(std::ceil(8.0 * static_cast<double>(n) *
                                      std::log(static_cast<double>(m) + 1.0)));
}

Index grid_agreement(const Eigen::MatrixXd& M, const AnswerVector& a, const Eigen::VectorXd& t,
                     double alpha) {
  check_answers(M, a);
  const Eigen::VectorXd r = correlations(M, t) - a;
  return (r.array().abs() < 2.0 * alpha).count();
}

Index grid_required(Index queries, double fraction) {
  return static_cast<Index>(std::ceil(fraction * static_cast<double>(queries) - 1e-9));
}

GridResult grid_reconstruct(const Eigen::MatrixXd& M, const AnswerVector& a,
                            const GridParams& params, const std::optional<Eigen::VectorXd>& warm) {
  check_answers(M, a);
  if (params.m < 1) throw std::invalid_argument("grid: m must be at least 1");
  const Index n = M.cols();
  const Index m = params.m;
  const GridScorer scorer(M, a, params);
  const auto& Mi = scorer.matrix();

  GridResult out;
  out.required = grid_required(M.rows(), params.agreement);
  IntVector best_k = IntVector::Zero(n);
  Index best = -1;

  const double states = std::pow(static_cast<double>(m + 1), static_cast<double>(n));
  out.exhaustive = states <= params.exhaustive_limit;
  if (out.exhaustive) {
    IntVector k = IntVector::Zero(n);
    IntVector S = IntVector::Zero(M.rows());
    while (true) {
      const Index score = scorer.agreement(S);
      ++out.evaluated;
      if (score > best) {
        best = score;
        best_k = k;
      }
      Index i = 0;
      while (i < n && k(i) == m) {
        S -= m * Mi.col(i);
        k(i) = 0;
        ++i;
      }
      if (i == n) break;
      ++k(i);
      S += Mi.col(i);
    }
  } else {
    CounterRng rng(params.seed);
    for (Index r = 0; r < std::max<Index>(params.restarts, 1); ++r) {
      IntVector k(n);
      if (r == 0 && warm) {
        if (warm->size() != n) throw DimensionError("grid: warm start length mismatch");
        for (Index i = 0; i < n; ++i) {
          k(i) = std::llround(std::clamp((*warm)(i), 0.0, 1.0) * static_cast<double>(m));
        }
      } else {
        for (Index i = 0; i < n; ++i) k(i) = static_cast<long long>(rng.below(static_cast<std::uint64_t>(m + 1)));
      }
      IntVector S = Mi * k;
      Index score = scorer.agreement(S);
      ++out.evaluated;
      bool improved = true;
      while (improved) {
        improved = false;
        for (Index i = 0; i < n; ++i) {
          long long pick = k(i);
          for (long long v = 0; v <= m; ++v) {
            if (v == k(i)) continue;
            const Index s = scorer.agreement(S + (v - k(i)) * Mi.col(i));
            ++out.evaluated;
            if (s > score) {
              score = s;
              pick = v;
            }
          }
          if (pick != k(i)) {
            S += (pick - k(i)) * Mi.col(i);
            k(i) = pick;
            improved = true;
          }
        }
      }
      if (score > best) {
        best = score;
        best_k = k;
      }
      if (best == M.rows()) break;
    }
  }

  out.t = to_grid(best_k, m);
  out.agreement = grid_agreement(M, a, out.t, params.alpha);
  out.status = out.agreement >= out.required ? GridStatus::Found : GridStatus::NoWitness;
  return out;
}

// ---------------------------------------------------------------------------

double l1_objective(const Eigen::MatrixXd& M, const AnswerVector& a, const Eigen::VectorXd& t) {
  check_answers(M, a);
  return (a - correlations(M, t)).cwiseAbs().sum();
}

L1Result l1_reconstruct(const Eigen::MatrixXd& M, const AnswerVector& a, const LpOptions& opt) {
  check_answers(M, a);
  const Index n = M.cols();
  const Index Q = M.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Variables [t (n), e (Q)]: e_q >= |<q,t> - a_q|, t <= 1.
  LinearProgram<double> lp;
  lp.A = Eigen::MatrixXd::Zero(2 * Q + n, n + Q);
  lp.b.resize(2 * Q + n);
  lp.rel.resize(static_cast<std::size_t>(2 * Q + n));
  lp.c = Eigen::VectorXd::Zero(n + Q);
  lp.c.tail(Q).setOnes();
  for (Index q = 0; q < Q; ++q) {
    lp.A.block(2 * q, 0, 1, n) = M.row(q) * inv_n;
    lp.A(2 * q, n + q) = -1.0;
    lp.b(2 * q) = a(q);
    lp.rel[static_cast<std::size_t>(2 * q)] = Relation::LessEq;
    lp.A.block(2 * q + 1, 0, 1, n) = M.row(q) * inv_n;
    lp.A(2 * q + 1, n + q) = 1.0;
    lp.b(2 * q + 1) = a(q);
    lp.rel[static_cast<std::size_t>(2 * q + 1)] = Relation::GreaterEq;
  }
  for (Index i = 0; i < n; ++i) {
    lp.A(2 * Q + i, i) = 1.0;
    lp.b(2 * Q + i) = 1.0;
    lp.rel[static_cast<std::size_t>(2 * Q + i)] = Relation::LessEq;
  }

  const LpResult<double> res = solve_lp(lp, opt);
  L1Result out;
  out.status = res.status;
  out.iterations = res.iterations;
  if (res.x.size() == 0) return out;
  out.t = res.x.head(n).cwiseMin(1.0);
  out.objective = res.objective;
  out.direct_objective = l1_objective(M, a, out.t);
  return out;
}

// ---------------------------------------------------------------------------

json query_to_json(const CountingQuery& q) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, OneWayMarginal>) {
          return {{"kind", "one_way"}, {"attribute", v.attribute}};
        } else if constexpr (std::is_same_v<T, MonotoneMarginal>) {
          return {{"kind", "marginal"}, {"attributes", v.attributes}};
        } else {
          return {{"kind", "subset"}, {"rows", v.rows}};
        }
      },
      q);
}

CountingQuery query_from_json(const json& j, std::string_view where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    bad(where, "queries[].kind", "must be a string");
  }
  const std::string kind = j["kind"].get<std::string>();
  auto indices = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array()) bad(where, std::string("queries[].") + key, "must be an array");
    std::vector<Index> out;
    for (const json& v : j[key]) {
      if (!v.is_number_integer()) bad(where, std::string("queries[].") + key, "entries must be integers");
      out.push_back(v.get<Index>());
    }
    return out;
  };
  if (kind == "one_way") {
    if (!j.contains("attribute") || !j["attribute"].is_number_integer()) {
      bad(where, "queries[].attribute", "must be an integer");
    }
    return OneWayMarginal{j["attribute"].get<Index>()};
  }
  if (kind == "marginal") return MonotoneMarginal{indices("attributes")};
  if (kind == "subset") return IndexedSubset{indices("rows")};
  bad(where, "queries[].kind", "must be one_way, marginal or subset");
}

json to_json(const ReconInstance& inst) {
  json queries = json::array();
  for (const CountingQuery& q : inst.queries) queries.push_back(query_to_json(q));
  json out{{"version", 1},
           {"D", io::to_json(inst.db)},
           {"queries", std::move(queries)},
           {"answers", std::vector<double>(inst.answers.data(), inst.answers.data() + inst.answers.size())},
           {"alpha", inst.alpha},
           {"alpha_prime", inst.alpha_prime}};
  if (inst.truth) {
    out["truth"] = std::vector<double>(inst.truth->data(), inst.truth->data() + inst.truth->size());
  }
  return out;
}

ReconInstance recon_instance_from_json(const json& j, std::string_view where) {
  if (!j.is_object()) throw FormatError(std::string(where) + ": instance must be a JSON object");
  ReconInstance inst;
  if (!j.contains("D")) bad(where, "D", "is missing");
  inst.db = io::database_from_json(j["D"], std::string(where) + " (D)");
  if (!j.contains("queries") || !j["queries"].is_array()) bad(where, "queries", "must be an array");
  for (const json& q : j["queries"]) {
    inst.queries.push_back(query_from_json(q, where));
    try {
      check_query(inst.queries.back(), inst.db);
    } catch (const DimensionError& e) {
      bad(where, "queries", e.what());
    }
  }
  auto vec = [&](const char* key) {
    if (!j[key].is_array()) bad(where, key, "must be an array of numbers");
    Eigen::VectorXd v(static_cast<Index>(j[key].size()));
    for (std::size_t k = 0; k < j[key].size(); ++k) {
      if (!j[key][k].is_number()) bad(where, key, "must be an array of numbers");
      v(static_cast<Index>(k)) = j[key][k].get<double>();
    }
    return v;
  };
  if (!j.contains("answers")) bad(where, "answers", "is missing");
  inst.answers = vec("answers");
  if (inst.answers.size() != static_cast<Index>(inst.queries.size())) {
    bad(where, "answers", "must have one entry per query");
  }
  if (j.contains("truth")) {
    inst.truth = vec("truth");
    if (inst.truth->size() != inst.db.n()) bad(where, "truth", "must have one entry per row");
  }
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) bad(where, "alpha", "must be a number");
    inst.alpha = j["alpha"].get<double>();
  }
  if (j.contains("alpha_prime")) {
    if (!j["alpha_prime"].is_number()) bad(where, "alpha_prime", "must be a number");
    inst.alpha_prime = j["alpha_prime"].get<double>();
  }
  return inst;
}

}  // namespace fpdp
