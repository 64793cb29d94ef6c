#include "fpdp/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fpdp {

namespace {

void check_word(const Codebook& c, const CombinedWord& word) {
  if (word.size() != c.d()) {
    throw DimensionError("word length " + std::to_string(word.size()) +
                         " does not match code length " + std::to_string(c.d()));
  }
}

template <class F>
void for_each_subset(Index d, Index k, std::vector<Index>& current, Index start, F&& f) {
  f(current);
  if (static_cast<Index>(current.size()) == k) return;
  for (Index j = start; j < d; ++j) {
    current.push_back(j);
    for_each_subset(d, k, current, j + 1, f);
    current.pop_back();
  }
}

}  // namespace

Database replace_with_junk(const Database& db, Index i) {
  if (i < 0 || i >= db.n()) throw DimensionError("junk row index out of range");
  BitMatrix bits = db.bits();
  bits.row(i).setZero();
  return Database(std::move(bits));
}

Coalition::Coalition(std::vector<Index> members, Index n) : members_(std::move(members)) {
  if (members_.empty()) throw DimensionError("coalition must be non-empty");
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw DimensionError("coalition has duplicate members");
  }
  if (members_.front() < 0 || members_.back() >= n) {
    throw DimensionError("coalition member out of range");
  }
}

Coalition Coalition::all(Index n) {
  std::vector<Index> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), Index{0});
  return Coalition(std::move(m), n);
}

Coalition Coalition::all_but(Index n, Index excluded) {
  if (excluded < 0 || excluded >= n) throw DimensionError("excluded user out of range");
  std::vector<Index> m;
  m.reserve(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    if (i != excluded) m.push_back(i);
  }
  return Coalition(std::move(m), n);
}

bool Coalition::contains(Index i) const {
  return std::binary_search(members_.begin(), members_.end(), i);
}

BitMatrix coalition_rows(const Codebook& c, const Coalition& s) {
  if (s.members().back() >= c.n()) throw DimensionError("coalition exceeds codebook");
  BitMatrix rows(s.size(), c.d());
  for (Index k = 0; k < s.size(); ++k) rows.row(k) = c.row(s.members()[k]);
  return rows;
}

// ---------------------------------------------------------------------------

void check_query(const CountingQuery& q, const Database& db) {
  std::visit(
      [&](const auto& query) {
        using T = std::decay_t<decltype(query)>;
        if constexpr (std::is_same_v<T, OneWayMarginal>) {
          if (query.attribute < 0 || query.attribute >= db.d()) {
            throw DimensionError("marginal attribute out of range");
          }
        } else if constexpr (std::is_same_v<T, MonotoneMarginal>) {
          for (Index j : query.attributes) {
            if (j < 0 || j >= db.d()) throw DimensionError("marginal attribute out of range");
          }
        } else {
          for (Index i : query.rows) {
            if (i < 0 || i >= db.n()) throw DimensionError("subset row out of range");
          }
        }
      },
      q);
}

bool eval_row(const CountingQuery& q, const Database& db, Index i) {
  return std::visit(
      [&](const auto& query) -> bool {
        using T = std::decay_t<decltype(query)>;
        if constexpr (std::is_same_v<T, OneWayMarginal>) {
          return db(i, query.attribute) != 0;
        } else if constexpr (std::is_same_v<T, MonotoneMarginal>) {
          return std::all_of(query.attributes.begin(), query.attributes.end(),
                             [&](Index j) { return db(i, j) != 0; });
        } else {
          return std::find(query.rows.begin(), query.rows.end(), i) != query.rows.end();
        }
      },
      q);
}

double eval_query(const CountingQuery& q, const Database& db) {
  check_query(q, db);
  if (db.n() == 0) throw DimensionError("empty database");
  if (const auto* subset = std::get_if<IndexedSubset>(&q)) {
    std::vector<Index> rows = subset->rows;
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return static_cast<double>(rows.size()) / static_cast<double>(db.n());
  }
  Index count = 0;
  for (Index i = 0; i < db.n(); ++i) count += eval_row(q, db, i) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(db.n());
}

QueryFamily one_way_marginals(Index d) {
  QueryFamily family;
  family.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) family.emplace_back(OneWayMarginal{j});
  return family;
}

QueryFamily monotone_marginals(Index d, Index k) {
  QueryFamily family;
  std::vector<Index> current;
  for_each_subset(d, k, current, 0,
                  [&](const std::vector<Index>& s) { family.emplace_back(MonotoneMarginal{s}); });
  return family;
}

AnswerVector evaluate(const QueryFamily& family, const Database& db) {
  // 1-way marginals dominate in practice; column sums avoid a pass per query.
  AnswerVector out(static_cast<Index>(family.size()));
  Eigen::VectorXd col_means;
  for (std::size_t k = 0; k < family.size(); ++k) {
    if (const auto* m = std::get_if<OneWayMarginal>(&family[k])) {
      check_query(family[k], db);
      if (col_means.size() == 0) {
        col_means = db.bits().cast<double>().colwise().sum().transpose() /
                    static_cast<double>(db.n());
      }
      out(static_cast<Index>(k)) = col_means(m->attribute);
    } else {
      out(static_cast<Index>(k)) = eval_query(family[k], db);
    }
  }
  return out;
}

Eigen::MatrixXd query_matrix(const QueryFamily& family, const Database& db) {
  Eigen::MatrixXd m(static_cast<Index>(family.size()), db.n());
  for (std::size_t k = 0; k < family.size(); ++k) {
    check_query(family[k], db);
    for (Index i = 0; i < db.n(); ++i) {
      m(static_cast<Index>(k), i) = eval_row(family[k], db, i) ? 1.0 : 0.0;
    }
  }
  return m;
}

Index allowed_failures(double beta, Index count) {
  if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
  // The slack absorbs representation error in products like 0.05 * 100.
  return static_cast<Index>(std::floor(beta * static_cast<double>(count) + 1e-9));
}

bool is_accurate(const AnswerVector& answers, const AnswerVector& truth, double alpha,
                 double beta) {
  if (answers.size() != truth.size()) {
    throw DimensionError("answer vector does not cover the query family");
  }
  const Index bad = ((answers - truth).array().abs() > alpha).count();
  return bad <= allowed_failures(beta, answers.size());
}

bool is_accurate(const AnswerVector& answers, const Database& db, const QueryFamily& family,
                 double alpha, double beta) {
  return is_accurate(answers, evaluate(family, db), alpha, beta);
}

// ---------------------------------------------------------------------------

MarkedColumns marked_columns(const Codebook& c, const Coalition& s) {
  if (s.members().back() >= c.n()) throw DimensionError("coalition exceeds codebook");
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1> ones = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>::Zero(c.d());
  for (Index i : s.members()) ones += c.row(i).transpose().cast<std::int32_t>();
  MarkedColumns out;
  for (Index j = 0; j < c.d(); ++j) {
    if (ones(j) == 0) {
      out.zero_marked.push_back(j);
    } else if (ones(j) == s.size()) {
      out.one_marked.push_back(j);
    }
  }
  return out;
}

Index feasibility_violations(const Codebook& c, const Coalition& s, const CombinedWord& word) {
  check_word(c, word);
  const MarkedColumns marked = marked_columns(c, s);
  return weak_violations(marked, word);
}

Index weak_violations(const MarkedColumns& marked, const CombinedWord& word) {
  Index bad = 0;
  for (Index j : marked.zero_marked) bad += word(j) != 0 ? 1 : 0;
  for (Index j : marked.one_marked) bad += word(j) != 1 ? 1 : 0;
  return bad;
}

bool feasible(const Codebook& c, const Coalition& s, const CombinedWord& word, double beta) {
  return feasibility_violations(c, s, word) <= allowed_failures(beta, c.d());
}

bool weakly_feasible(const Codebook& c, const Coalition& s, const CombinedWord& word,
                     double beta) {
  check_word(c, word);
  const MarkedColumns marked = marked_columns(c, s);
  if (marked.size() == 0) return true;
  return weak_violations(marked, word) <= allowed_failures(beta, marked.size());
}

Index hamming(const CombinedWord& a, const CombinedWord& b) {
  if (a.size() != b.size()) throw DimensionError("hamming: length mismatch");
  return (a.array() != b.array()).count();
}

}  // namespace fpdp
