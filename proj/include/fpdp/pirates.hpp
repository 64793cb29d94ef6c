#pragma once

#include "fpdp/core.hpp"
#include "fpdp/rng.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>

namespace fpdp {

// Pirate strategies. Each sees only the coalition's rows of the codebook.
// Rounding ties (exactly 1/2) go to 1.

/// c'_j = 1 iff at least half of the coalition has a 1 in column j.
CombinedWord pirate_majority(const Codebook& c, const Coalition& s);

/// A uniformly chosen coalition member's codeword.
CombinedWord pirate_row_copy(const Codebook& c, const Coalition& s, CounterRng& rng);

/// Column-wise copy from an independently chosen member.
CombinedWord pirate_interleave(const Codebook& c, const Coalition& s, CounterRng& rng);

enum class ErrorMode { MarkedFirst, Uniform };

/// Flips exactly k positions of `word`. MarkedFirst picks k distinct columns
/// uniformly among the coalition's marked columns and throws if there are fewer
/// than k; Uniform picks any k distinct positions.
CombinedWord inject_errors(const CombinedWord& word, const Codebook& c, const Coalition& s,
                           Index k, ErrorMode mode, CounterRng& rng);

/// Noise variance 2 d ln(1/delta) / n^2 of the averaging attack.
double gaussian_attack_variance(Index d, Index nominal_n, double delta);

/// Averaging attack: c_bar = (1/n) sum_{i in S} c_i with n the code's nominal
/// user count (not |S|), plus N(0, sigma^2) noise per coordinate, rounded at
/// 1/2.
CombinedWord pirate_gaussian_average(const Codebook& c, const Coalition& s, Index nominal_n,
                                     double delta, CounterRng& rng);

/// Same attack with the noise vector supplied by the caller.
CombinedWord pirate_gaussian_average(const Codebook& c, const Coalition& s, Index nominal_n,
                                     const Eigen::VectorXd& noise);

/// Smallest fixed point of n = ceil(sqrt(18 d ln(6 e n) ln(3d/2))), iterated
/// from ceil(sqrt(d)). The attack then uses delta = 1/(6 e n).
Index gaussian_attack_users(Index d);

/// delta = 1/(6 e n).
double gaussian_attack_delta(Index n);

enum class PirateKind { Majority, RowCopy, Interleave, GaussianAverage };

std::optional<PirateKind> parse_pirate(std::string_view name);
std::string_view pirate_name(PirateKind kind);

/// Dispatch by kind. `nominal_n` and `delta` are used by GaussianAverage only.
CombinedWord run_pirate(PirateKind kind, const Codebook& c, const Coalition& s, CounterRng& rng,
                        Index nominal_n, double delta);

}  // namespace fpdp
