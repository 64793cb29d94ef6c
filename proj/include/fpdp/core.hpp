#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fpdp {

using Index = Eigen::Index;

/// Bits are stored one per byte; row-major so a codeword is contiguous.
using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using BitVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

/// A word produced by a pirate (or by rounding answers).
using CombinedWord = BitVector;

/// One real answer per query, in family order. Values are not clamped.
using AnswerVector = Eigen::VectorXd;

/// Accused user (0-indexed), or nullopt for "no accusation".
using TraceOutcome = std::optional<Index>;

/// Sizes or indices that do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A malformed input file; the message names the file and field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An n x d table of bits. Codebooks and databases share the representation
/// but are distinct types.
template <class Tag>
class BitRows {
 public:
  BitRows() = default;

  explicit BitRows(BitMatrix bits) : bits_(std::move(bits)) {
    for (Index i = 0; i < bits_.size(); ++i) {
      if (bits_.data()[i] > 1) throw DimensionError("bit table entry outside {0,1}");
    }
  }

  BitRows(Index n, Index d) : bits_(BitMatrix::Zero(n, d)) {}

  Index n() const noexcept { return bits_.rows(); }
  Index d() const noexcept { return bits_.cols(); }

  std::uint8_t operator()(Index i, Index j) const { return bits_(i, j); }
  auto row(Index i) const { return bits_.row(i); }
  const BitMatrix& bits() const noexcept { return bits_; }

  friend bool operator==(const BitRows& a, const BitRows& b) {
    return a.n() == b.n() && a.d() == b.d() && a.bits_ == b.bits_;
  }

 private:
  BitMatrix bits_;
};

struct CodebookTag {};
struct DatabaseTag {};

/// Row i is the codeword of user i.
using Codebook = BitRows<CodebookTag>;
/// Row i is the i-th record, a point of {0,1}^d.
using Database = BitRows<DatabaseTag>;

inline Database as_database(const Codebook& c) { return Database(c.bits()); }
inline Codebook as_codebook(const Database& db) { return Codebook(db.bits()); }

/// D_{-i}: row i replaced by the all-zeros junk record. Size is unchanged.
Database replace_with_junk(const Database& db, Index i);

/// A non-empty, sorted, duplicate-free set of users.
class Coalition {
 public:
  Coalition(std::vector<Index> members, Index n);

  static Coalition all(Index n);
  static Coalition all_but(Index n, Index excluded);

  std::span<const Index> members() const noexcept { return members_; }
  Index size() const noexcept { return static_cast<Index>(members_.size()); }
  bool contains(Index i) const;

 private:
  std::vector<Index> members_;
};

/// Rows of `c` belonging to the coalition, in member order.
BitMatrix coalition_rows(const Codebook& c, const Coalition& s);

// ---------------------------------------------------------------------------
// Counting queries

struct OneWayMarginal {
  Index attribute;
};

/// q_S(x) = 1 iff x_j = 1 for all j in S. The empty conjunction is constant 1.
struct MonotoneMarginal {
  std::vector<Index> attributes;
};

/// q_T(x_i) = 1 iff the row index i is in T; used for shattering families
/// and random subset-sum queries.
struct IndexedSubset {
  std::vector<Index> rows;
};

using CountingQuery = std::variant<OneWayMarginal, MonotoneMarginal, IndexedSubset>;
using QueryFamily = std::vector<CountingQuery>;

/// q(x_i) for row i of db.
bool eval_row(const CountingQuery& q, const Database& db, Index i);

/// q(D) = (1/n) sum_i q(x_i).
double eval_query(const CountingQuery& q, const Database& db);

/// Throws DimensionError if q references an attribute or row outside db.
void check_query(const CountingQuery& q, const Database& db);

QueryFamily one_way_marginals(Index d);

/// Monotone marginals of every size from 0 to k over d attributes.
QueryFamily monotone_marginals(Index d, Index k);

/// Exact answers q(D) for every q in the family.
AnswerVector evaluate(const QueryFamily& family, const Database& db);

/// M(q, i) = q(x_i); the subset-sum correlation with s is M * s / n.
Eigen::MatrixXd query_matrix(const QueryFamily& family, const Database& db);

/// Number of failures tolerated among `count` items at fraction beta:
/// floor(beta * count).
Index allowed_failures(double beta, Index count);

/// |a_q - truth_q| <= alpha for all but floor(beta |Q|) queries.
bool is_accurate(const AnswerVector& answers, const AnswerVector& truth, double alpha,
                 double beta);

bool is_accurate(const AnswerVector& answers, const Database& db, const QueryFamily& family,
                 double alpha, double beta);

// ---------------------------------------------------------------------------
// Marking assumption

struct MarkedColumns {
  std::vector<Index> zero_marked;
  std::vector<Index> one_marked;

  Index size() const noexcept {
    return static_cast<Index>(zero_marked.size() + one_marked.size());
  }
};

/// Column j is b-marked iff every coalition row has b at j.
MarkedColumns marked_columns(const Codebook& c, const Coalition& s);

/// Positions j where the word agrees with no coalition member.
Index feasibility_violations(const Codebook& c, const Coalition& s, const CombinedWord& word);

/// Violated positions restricted to the given marked columns.
Index weak_violations(const MarkedColumns& marked, const CombinedWord& word);

/// word in F_beta(C_S): at most floor(beta d) violated positions.
bool feasible(const Codebook& c, const Coalition& s, const CombinedWord& word, double beta);

/// word in WF_beta(C_S): at most floor(beta |M|) violations among the marked
/// columns M. Vacuously true when M is empty.
bool weakly_feasible(const Codebook& c, const Coalition& s, const CombinedWord& word,
                     double beta);

/// Hamming distance; lengths must match.
Index hamming(const CombinedWord& a, const CombinedWord& b);

}  // namespace fpdp
