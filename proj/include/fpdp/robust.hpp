#pragma once

#include "fpdp/core.hpp"
#include "fpdp/tardos.hpp"

#include <cstdint>
#include <vector>

namespace fpdp {

/// A column of the padded codebook that carries no code information.
struct FakeColumn {
  Index pos;
  std::uint8_t bit;

  friend bool operator==(const FakeColumn&, const FakeColumn&) = default;
};

/// Secret of the padded code of length 5d.
///
/// The augmented codebook has the d real columns at indices [0, d), 2d
/// all-zero columns at [d, 3d) and 2d all-one columns at [3d, 5d). Output
/// position `pos` carries augmented column `perm[pos]`.
struct RobustSecret {
  TardosSecret inner;
  std::vector<Index> perm;

  Index inner_length() const noexcept { return inner.params.d; }
  Index length() const noexcept { return static_cast<Index>(perm.size()); }

  /// Fake positions in increasing order with their planted bits.
  std::vector<FakeColumn> fake_columns() const;

  /// Throws DimensionError unless perm is a bijection of [5d].
  void validate() const;
};

struct RobustCode {
  Codebook codebook;
  RobustSecret secret;
};

/// Inner Tardos code, 4d planted constant columns, then a seeded Fisher-Yates
/// shuffle of all 5d columns.
RobustCode robust_gen(const TardosParams& params, std::uint64_t seed);
RobustCode robust_gen(Index n, double sec, std::uint64_t seed);

/// Undo the permutation and drop fake positions.
CombinedWord strip_word(const RobustSecret& secret, const CombinedWord& word);
Codebook strip_codebook(const RobustSecret& secret, const Codebook& padded);

/// tardos_trace on the stripped codebook and word.
TraceOutcome robust_trace(const RobustSecret& secret, const Codebook& padded,
                          const CombinedWord& word);

}  // namespace fpdp
