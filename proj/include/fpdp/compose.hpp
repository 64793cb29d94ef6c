#pragma once

#include "fpdp/core.hpp"
#include "fpdp/mechanisms.hpp"
#include "fpdp/reconstruct.hpp"
#include "fpdp/reid.hpp"
#include "fpdp/report.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace fpdp {

/// Row (i, j) = (x_i, x'_ij) for an outer database D of n rows and inner
/// databases D'_1..D'_n of n' rows each. At most one row may be replaced by
/// the junk pair (all-zeros, all-zeros).
class ProductDatabase {
 public:
  ProductDatabase(Database outer, std::vector<Database> inner);

  Index outer_n() const noexcept { return outer_.n(); }
  Index inner_n() const noexcept { return inner_.front().n(); }
  Index rows() const noexcept { return outer_n() * inner_n(); }
  const Database& outer() const noexcept { return outer_; }
  const Database& inner(Index i) const { return inner_.at(static_cast<std::size_t>(i)); }
  std::optional<std::pair<Index, Index>> junk() const noexcept { return junk_; }

  Index flatten(Index i, Index j) const;
  std::pair<Index, Index> unflatten(Index row) const;

  ProductDatabase with_junk(Index i, Index j) const;

  /// Outer and inner parts of every row, in flattened order.
  Database outer_rows() const;
  Database inner_rows() const;

 private:
  Database outer_;
  std::vector<Database> inner_;
  std::optional<std::pair<Index, Index>> junk_;
};

/// (q ^ q')(D*) computed row by row. Queries must be value-based (no
/// indexed subsets), since the junk row has no index of its own.
double eval_conjunction(const CountingQuery& q, const CountingQuery& qp, const ProductDatabase& db);

/// (1/n) sum_i q(x_i) q'(D'_i).
double subset_sum_rhs(const CountingQuery& q, const CountingQuery& qp, const ProductDatabase& db);

/// A(q, q') = (q ^ q')(D*) for the whole product family, |Q| x |Q'|.
Eigen::MatrixXd conjunction_answers(const QueryFamily& outer_q, const QueryFamily& inner_q,
                                    const ProductDatabase& db);

/// Reconstruction from one answer slice (indexed by the outer family); nullopt
/// on failure.
using SliceAttack = std::function<std::optional<Eigen::VectorXd>(const AnswerVector&)>;

SliceAttack vc_attack(Eigen::MatrixXd M, double alpha);
SliceAttack l1_attack(Eigen::MatrixXd M);

struct Subanswers {
  Eigen::MatrixXd t;        ///< |Q'| x n, t(q', i)
  std::vector<bool> valid;  ///< per q'; invalid slices hold 1/2
};

/// Runs the attack once per column of A. Identical slices are solved once.
Subanswers reconstruct_subanswers(const Eigen::MatrixXd& A, const SliceAttack& attack);

/// Row i of t as an answer vector for Q'.
AnswerVector subanswer_column(const Subanswers& sub, Index i);

/// Picks a uniform i, runs the inner adversary on D'_i with answers t(., i)
/// and lifts an accusation j to (i, j).
struct ComposedOutcome {
  std::optional<std::pair<Index, Index>> accused;
  Index chosen = 0;
  double score_max = 0.0;
};
ComposedOutcome composed_adversary(const ProductDatabase& db, const std::vector<CodeSecret>& secrets,
                                   const Subanswers& sub, CounterRng& rng);

struct ComposeConfig {
  Index outer_n = 3;
  Index inner_n = 10;
  double sec = 0.05;
  CodeKind inner_code = CodeKind::Plain;
  Mechanism mechanism = ExactMechanism{};
  std::string attack = "vc";  ///< "vc" or "l1"
  /// Accuracy the outer reconstruction assumes of each slice.
  double alpha = 0.0;
  double c = 150.0;
  Index trials = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

ComposeConfig compose_config_from_json(const nlohmann::json& j, std::string_view where = "<config>");
nlohmann::json to_json(const ComposeConfig& config);

/// Outer shattered database (marginal form) over the outer rows, inner codes
/// as subdatabases, Q' the one-way marginals of the inner code.
ExperimentReport run_composed_experiment(const ComposeConfig& config, int jobs = 1);

/// Flattened row label "i:j", 1-indexed.
std::string product_label(Index i, Index j);

}  // namespace fpdp
