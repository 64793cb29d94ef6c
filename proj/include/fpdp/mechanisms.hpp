#pragma once

#include "fpdp/core.hpp"
#include "fpdp/rng.hpp"

#include <string>
#include <variant>

namespace fpdp {

// Answer mechanisms for the d one-way marginals of a database. These are the
// algorithms under attack; none of them clamps its output.

AnswerVector answer_exact(const Database& db);

/// Per-query Laplace scale d / (eps n): the budget eps is split evenly over
/// the d queries, each of sensitivity 1/n.
double laplace_scale(Index d, Index n, double eps);

AnswerVector answer_laplace(const Database& db, double eps, CounterRng& rng);

/// Per-query variance 2 d ln(1/delta) / (eps^2 n^2).
double gaussian_mechanism_variance(Index d, Index n, double eps, double delta);

AnswerVector answer_gaussian(const Database& db, double eps, double delta, CounterRng& rng);

/// Gaussian mechanism with caller-supplied standard-normal draws.
AnswerVector answer_gaussian(const Database& db, double eps, double delta,
                             const Eigen::VectorXd& standard_noise);

struct ExactMechanism {};
struct LaplaceMechanism {
  double eps = 1.0;
};
struct GaussianMechanism {
  double eps = 1.0;
  double delta = 1e-6;
};

using Mechanism = std::variant<ExactMechanism, LaplaceMechanism, GaussianMechanism>;

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const Mechanism& mech);
std::string mechanism_name(const Mechanism& mech);

/// Adds the mechanism's noise to a vector of exact answers computed over n
/// records.
AnswerVector perturb(const Mechanism& mech, const AnswerVector& exact, Index n,
                     CounterRng& rng);

AnswerVector run_mechanism(const Mechanism& mech, const Database& db, CounterRng& rng);

}  // namespace fpdp
