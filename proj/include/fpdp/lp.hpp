#pragma once

#include "fpdp/core.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace fpdp {

enum class Relation { LessEq, GreaterEq, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* lp_status_name(LpStatus status);

/// minimize c'x subject to A_r x (rel_r) b_r for each row r, x >= 0.
template <class Scalar = double>
struct LinearProgram {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix A;
  Vector b;
  std::vector<Relation> rel;
  Vector c;
};

struct LpOptions {
  Index max_iterations = 200000;
  double tolerance = 1e-10;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  Index degenerate_limit = 50;
};

/// x is the final basic solution. Under IterationLimit it is the best
/// feasible incumbent if phase 2 was reached, otherwise empty.
template <class Scalar = double>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  Scalar objective = 0;
  Index iterations = 0;
};

namespace detail {

// Dense tableau: rows [0, m) are constraints, row m the reduced costs; the
// last column is the right-hand side.
template <class Scalar>
class Tableau {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Tableau(Matrix t, std::vector<Index> basis, const LpOptions& opt)
      : t_(std::move(t)), basis_(std::move(basis)), opt_(opt) {}

  Index rows() const { return t_.rows() - 1; }
  Index cols() const { return t_.cols() - 1; }
  Matrix& data() { return t_; }
  std::vector<Index>& basis() { return basis_; }

  // Sets the cost row from a full cost vector over all columns.
  void price(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& cost) {
    const Index m = rows();
    t_.row(m).setZero();
    t_.row(m).head(cols()) = cost.transpose();
    for (Index r = 0; r < m; ++r) {
      const Scalar cb = cost(basis_[static_cast<std::size_t>(r)]);
      if (cb != Scalar(0)) t_.row(m) -= cb * t_.row(r);
    }
  }

  void pivot(Index r, Index e) {
    t_.row(r) /= t_(r, e);
    for (Index k = 0; k < t_.rows(); ++k) {
      if (k != r && t_(k, e) != Scalar(0)) t_.row(k) -= t_(k, e) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = e;
  }

  // Runs simplex iterations over columns [0, allowed). Returns Optimal,
  // Unbounded or IterationLimit.
  LpStatus run(Index allowed, Index& iterations) {
    const Index m = rows();
    const Index rhs = cols();
    const Scalar tol = static_cast<Scalar>(opt_.tolerance);
    Index degenerate = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return LpStatus::IterationLimit;
      const bool bland = degenerate >= opt_.degenerate_limit;
      Index e = -1;
      Scalar best = -tol;
      for (Index j = 0; j < allowed; ++j) {
        if (t_(m, j) < best) {
          e = j;
          if (bland) break;
          best = t_(m, j);
        }
      }
      if (e < 0) return LpStatus::Optimal;

      Index leave = -1;
      Scalar ratio = std::numeric_limits<Scalar>::infinity();
      for (Index r = 0; r < m; ++r) {
        if (t_(r, e) > tol) {
          const Scalar q = t_(r, rhs) / t_(r, e);
          if (q < ratio - tol ||
              (q <= ratio + tol && leave >= 0 &&
               basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
            if (q < ratio) ratio = q;
            leave = r;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      degenerate = ratio <= tol ? degenerate + 1 : 0;
      pivot(leave, e);
      ++iterations;
    }
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solution(Index nvars) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(nvars);
    for (Index r = 0; r < rows(); ++r) {
      const Index v = basis_[static_cast<std::size_t>(r)];
      if (v < nvars) x(v) = std::max(Scalar(0), t_(r, cols()));
    }
    return x;
  }

 private:
  Matrix t_;
  std::vector<Index> basis_;
  LpOptions opt_;
};

}  // namespace detail

/// Two-phase dense simplex. Dantzig pricing, Bland's rule after a run of
/// degenerate pivots.
template <class Scalar>
LpResult<Scalar> solve_lp(const LinearProgram<Scalar>& lp, const LpOptions& opt = {}) {
  using Matrix = typename LinearProgram<Scalar>::Matrix;
  using Vector = typename LinearProgram<Scalar>::Vector;

  const Index m = lp.A.rows();
  const Index nv = lp.A.cols();
  if (lp.b.size() != m || static_cast<Index>(lp.rel.size()) != m || lp.c.size() != nv) {
    throw DimensionError("solve_lp: inconsistent problem dimensions");
  }

  // Normalise to b >= 0.
  Matrix A = lp.A;
  Vector b = lp.b;
  std::vector<Relation> rel = lp.rel;
  for (Index r = 0; r < m; ++r) {
    if (b(r) < Scalar(0)) {
      A.row(r) *= Scalar(-1);
      b(r) = -b(r);
      if (rel[static_cast<std::size_t>(r)] == Relation::LessEq) {
        rel[static_cast<std::size_t>(r)] = Relation::GreaterEq;
      } else if (rel[static_cast<std::size_t>(r)] == Relation::GreaterEq) {
        rel[static_cast<std::size_t>(r)] = Relation::LessEq;
      }
    }
  }

  Index n_slack = 0;
  Index n_art = 0;
  for (Relation r : rel) {
    if (r != Relation::Equal) ++n_slack;
    if (r != Relation::LessEq) ++n_art;
  }
  const Index art0 = nv + n_slack;
  const Index total = art0 + n_art;

  Matrix t = Matrix::Zero(m + 1, total + 1);
  t.topLeftCorner(m, nv) = A;
  t.col(total).head(m) = b;
  std::vector<Index> basis(static_cast<std::size_t>(m));
  Index s = nv;
  Index a = art0;
  for (Index r = 0; r < m; ++r) {
    switch (rel[static_cast<std::size_t>(r)]) {
      case Relation::LessEq:
        t(r, s) = 1;
        basis[static_cast<std::size_t>(r)] = s++;
        break;
      case Relation::GreaterEq:
        t(r, s++) = -1;
        t(r, a) = 1;
        basis[static_cast<std::size_t>(r)] = a++;
        break;
      case Relation::Equal:
        t(r, a) = 1;
        basis[static_cast<std::size_t>(r)] = a++;
        break;
    }
  }

  detail::Tableau<Scalar> tab(std::move(t), std::move(basis), opt);
  LpResult<Scalar> out;
  const Scalar tol = static_cast<Scalar>(opt.tolerance);

  if (n_art > 0) {
    Vector cost = Vector::Zero(total);
    cost.tail(n_art).setOnes();
    tab.price(cost);
    const LpStatus st = tab.run(total, out.iterations);
    if (st == LpStatus::IterationLimit) {
      out.status = st;
      return out;
    }
    const Scalar infeas = -tab.data()(m, total);
    const Scalar scale = std::max(Scalar(1), b.cwiseAbs().maxCoeff());
    if (infeas > tol * scale * Scalar(10)) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Drive remaining artificials out of the basis where possible.
    for (Index r = 0; r < m; ++r) {
      if (tab.basis()[static_cast<std::size_t>(r)] < art0) continue;
      for (Index j = 0; j < art0; ++j) {
        if (std::abs(tab.data()(r, j)) > tol) {
          tab.pivot(r, j);
          break;
        }
      }
    }
  }

  Vector cost = Vector::Zero(total);
  cost.head(nv) = lp.c;
  tab.price(cost);
  out.status = tab.run(art0, out.iterations);
  out.x = tab.solution(nv);
  out.objective = lp.c.dot(out.x);
  return out;
}

}  // namespace fpdp
