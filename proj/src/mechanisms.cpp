#include "fpdp/mechanisms.hpp"

#include <cmath>
#include <stdexcept>

namespace fpdp {

namespace {

void check_eps(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("mechanism: eps must be positive");
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("mechanism: delta must lie in (0,1)");
}

}  // namespace

AnswerVector answer_exact(const Database& db) { return evaluate(one_way_marginals(db.d()), db); }

double laplace_scale(Index d, Index n, double eps) {
  check_eps(eps);
  return static_cast<double>(d) / (eps * static_cast<double>(n));
}

AnswerVector answer_laplace(const Database& db, double eps, CounterRng& rng) {
  return perturb(LaplaceMechanism{eps}, answer_exact(db), db.n(), rng);
}

double gaussian_mechanism_variance(Index d, Index n, double eps, double delta) {
  check_eps(eps);
  check_delta(delta);
  const double en = eps * static_cast<double>(n);
  return 2.0 * static_cast<double>(d) * std::log(1.0 / delta) / (en * en);
}

AnswerVector answer_gaussian(const Database& db, double eps, double delta, CounterRng& rng) {
  return perturb(GaussianMechanism{eps, delta}, answer_exact(db), db.n(), rng);
}

AnswerVector answer_gaussian(const Database& db, double eps, double delta,
                             const Eigen::VectorXd& standard_noise) {
  if (standard_noise.size() != db.d()) throw DimensionError("gaussian: noise length mismatch");
  const double sigma = std::sqrt(gaussian_mechanism_variance(db.d(), db.n(), eps, delta));
  return answer_exact(db) + sigma * standard_noise;
}

void validate(const Mechanism& mech) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LaplaceMechanism>) {
          check_eps(m.eps);
        } else if constexpr (std::is_same_v<T, GaussianMechanism>) {
          check_eps(m.eps);
          check_delta(m.delta);
        }
      },
      mech);
}

std::string mechanism_name(const Mechanism& mech) {
  switch (mech.index()) {
    case 0: return "exact";
    case 1: return "laplace";
    default: return "gaussian";
  }
}

AnswerVector perturb(const Mechanism& mech, const AnswerVector& exact, Index n,
                     CounterRng& rng) {
  const Index d = exact.size();
  return std::visit(
      [&](const auto& m) -> AnswerVector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ExactMechanism>) {
          return exact;
        } else if constexpr (std::is_same_v<T, LaplaceMechanism>) {
          const double b = laplace_scale(d, n, m.eps);
          AnswerVector out = exact;
          for (Index j = 0; j < d; ++j) out(j) += rng.laplace(b);
          return out;
        } else {
          const double sigma = std::sqrt(gaussian_mechanism_variance(d, n, m.eps, m.delta));
          AnswerVector out = exact;
          for (Index j = 0; j < d; ++j) out(j) += sigma * rng.normal();
          return out;
        }
      },
      mech);
}

AnswerVector run_mechanism(const Mechanism& mech, const Database& db, CounterRng& rng) {
  return perturb(mech, answer_exact(db), db.n(), rng);
}

}  // namespace fpdp
