#pragma once

#include "fpdp/core.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <utility>

namespace fpdp {

/// Parameters of the Tardos code for n users and security sec.
///
/// All logarithms are natural. `d` defaults to ceil(100 n^2 ln(n/sec)) but may
/// be overridden, e.g. to build an n x d codebook of a prescribed length.
struct TardosParams {
  Index n = 0;
  double sec = 0.0;
  Index d = 0;
  double bias_floor = 0.0;  ///< t = 1/(300 n)
  double angle_floor = 0.0; ///< t' with sin^2 t' = t
  double threshold = 0.0;   ///< Z = 20 n ln(n/sec); accuse when score >= Z/2

  static TardosParams make(Index n, double sec);
  static TardosParams with_length(Index n, double sec, Index d);

  /// Code length ceil(100 n^2 ln(n/sec)).
  static Index code_length(Index n, double sec);
};

/// Column biases p_j, shared between generation and tracing.
struct TardosSecret {
  TardosParams params;
  Eigen::VectorXd p;

  /// q_j = sqrt((1 - p_j) / p_j).
  Eigen::VectorXd weights() const;
};

struct TardosCode {
  Codebook codebook;
  TardosSecret secret;
};

/// Draws biases and an n x d codebook; deterministic in `seed`.
TardosCode tardos_gen(const TardosParams& params, std::uint64_t seed);
TardosCode tardos_gen(Index n, double sec, std::uint64_t seed);

/// S_i(c') = sum_j c'_j U_ij, U_ij = q_j if C_ij = 1 else -1/q_j.
double tardos_score(const TardosSecret& secret, const Codebook& c, const CombinedWord& word,
                    Index user);

/// Scores of every user.
Eigen::VectorXd tardos_scores(const TardosSecret& secret, const Codebook& c,
                              const CombinedWord& word);

/// Scores for an arbitrary real weighting of the columns (the same linear
/// form as tardos_scores with c' replaced by w). Used to split a word into an
/// error-free part and an error part.
Eigen::VectorXd tardos_weighted_scores(const TardosSecret& secret, const Codebook& c,
                                       const Eigen::VectorXd& weights);

/// Lowest-index user whose score reaches Z/2, else no accusation.
TraceOutcome tardos_accuse(const TardosSecret& secret, const Eigen::VectorXd& scores);

/// Lowest-index user with S_i >= Z/2, else no accusation.
TraceOutcome tardos_trace(const TardosSecret& secret, const Codebook& c,
                          const CombinedWord& word);

/// 5 n^{3/2} ln(n/sec): the count each of the 0- and 1-marked column sets
/// should exceed with probability at least 1 - sec.
double marked_column_bound(Index n, double sec);

}  // namespace fpdp
