#pragma once

#include "fpdp/core.hpp"
#include "fpdp/lp.hpp"
#include "fpdp/rng.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string_view>

namespace fpdp {

// Reconstruction attacks recover a hidden s in [0,1]^n from answers
// a_q ~ <q,s> = (1/n) sum_i q(x_i) s_i. All attacks work on the query matrix
// M(q, i) = q(x_i) of a family over a public database.

/// <q,s> for every query: M s / n.
Eigen::VectorXd correlations(const Eigen::MatrixXd& M, const Eigen::VectorXd& s);
double correlation(const CountingQuery& q, const Database& db, const Eigen::VectorXd& s);

/// (1/n) sum_i |t_i - s_i|.
double average_error(const Eigen::VectorXd& t, const Eigen::VectorXd& s);

enum class ShatterForm {
  Marginals,  ///< x_i = ones with a zero at i; q_v = marginal over {j : v_j = 0}
  Subsets,    ///< indexed-subset query for every T in 2^[n]
};

struct QueryInstance {
  Database db;
  QueryFamily queries;
};

/// Family of all 2^n patterns; query v selects rows {i : bit i of v is 1}.
QueryInstance build_shattered_instance(Index n, ShatterForm form = ShatterForm::Marginals);
inline constexpr Index kMaxShatterUsers = 20;

/// n rows carrying their own index in binary; the public identifiers for
/// indexed-subset families.
Database index_database(Index n);

/// Each row joins each query independently with probability 1/2.
QueryFamily random_subset_family(Index n, Index count, CounterRng& rng);

// ---------------------------------------------------------------------------

struct VcResult {
  bool feasible = false;
  Eigen::VectorXd t;
  Index rounds = 0;
  /// Largest |<q,t> - a_q| over the whole family.
  double max_residual = 0.0;
};

struct VcOptions {
  double tolerance = 1e-9;
  Index max_rounds = 1000;
};

/// Any t in [0,1]^n with |a_q - <q,t>| <= alpha for all q, found by an LP
/// with lazily added constraints. t is snapped to multiples of 2^-32.
VcResult vc_reconstruct(const Eigen::MatrixXd& M, const AnswerVector& a, double alpha,
                        const VcOptions& opt = {});
VcResult vc_reconstruct(const Database& db, const QueryFamily& queries, const AnswerVector& a,
                        double alpha, const VcOptions& opt = {});

// ---------------------------------------------------------------------------

struct GridParams {
  double alpha = 0.05;
  double alpha_prime = 0.5;
  Index m = 20;  ///< grid {0, 1/m, ..., 1}
  /// A candidate needs |<q,t> - a_q| < 2 alpha on at least this fraction of Q.
  double agreement = 2.0 / 3.0;
  Index restarts = 16;
  std::uint64_t seed = 0;
  double exhaustive_limit = 16777216.0;  ///< 2^24 grid points

  static GridParams make(double alpha, double alpha_prime);
  /// 1 / (144 alpha'^2 alpha^2).
  double recommended_users() const;
  /// alpha' / 2.
  double kappa() const;
  /// ceil(8 n ln(m + 1)).
  static Index default_query_count(Index n, Index m);
};

enum class GridStatus { Found, NoWitness };

struct GridResult {
  GridStatus status = GridStatus::NoWitness;
  /// Best candidate seen, returned in either status.
  Eigen::VectorXd t;
  Index agreement = 0;
  Index required = 0;
  bool exhaustive = false;
  Index evaluated = 0;
};

/// Queries with |<q,t> - a_q| < 2 alpha.
Index grid_agreement(const Eigen::MatrixXd& M, const AnswerVector& a, const Eigen::VectorXd& t,
                     double alpha);
Index grid_required(Index queries, double fraction);

/// Maximum-agreement grid point: exhaustive when (m+1)^n is within the limit,
/// otherwise a seeded multi-restart coordinate search (a heuristic) started
/// from `warm` rounded to the grid and from random points.
GridResult grid_reconstruct(const Eigen::MatrixXd& M, const AnswerVector& a,
                            const GridParams& params,
                            const std::optional<Eigen::VectorXd>& warm = std::nullopt);

// ---------------------------------------------------------------------------

struct L1Result {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd t;
  double objective = 0.0;         ///< LP objective sum_q e_q
  double direct_objective = 0.0;  ///< sum_q |a_q - <q,t>|
  Index iterations = 0;
};

/// argmin over t in [0,1]^n of sum_q |a_q - <q,t>|.
L1Result l1_reconstruct(const Eigen::MatrixXd& M, const AnswerVector& a,
                        const LpOptions& opt = {});
double l1_objective(const Eigen::MatrixXd& M, const AnswerVector& a, const Eigen::VectorXd& t);

// ---------------------------------------------------------------------------

nlohmann::json query_to_json(const CountingQuery& q);
CountingQuery query_from_json(const nlohmann::json& j, std::string_view where);

struct ReconInstance {
  Database db;
  QueryFamily queries;
  AnswerVector answers;
  std::optional<Eigen::VectorXd> truth;
  double alpha = 0.0;
  double alpha_prime = 0.5;
};

/// {version:1, D, queries, answers, truth?, alpha, alpha_prime}
nlohmann::json to_json(const ReconInstance& inst);
ReconInstance recon_instance_from_json(const nlohmann::json& j, std::string_view where);

}  // namespace fpdp
