#include "fpdp/pirates.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fpdp {

namespace {

Eigen::VectorXd coalition_column_sums(const Codebook& c, const Coalition& s) {
  if (s.members().back() >= c.n()) throw DimensionError("coalition exceeds codebook");
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(c.d());
  for (Index i : s.members()) sums += c.row(i).transpose().cast<double>();
  return sums;
}

// k distinct draws from `pool` (partial Fisher-Yates).
std::vector<Index> sample_without_replacement(std::vector<Index> pool, Index k,
                                              CounterRng& rng) {
  const auto size = pool.size();
  for (std::size_t a = 0; a < static_cast<std::size_t>(k); ++a) {
    const auto b = a + static_cast<std::size_t>(rng.below(size - a));
    std::swap(pool[a], pool[b]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace

CombinedWord pirate_majority(const Codebook& c, const Coalition& s) {
  const Eigen::VectorXd sums = coalition_column_sums(c, s);
  const double half = static_cast<double>(s.size()) / 2.0;
  return (sums.array() >= half).cast<std::uint8_t>().matrix();
}

CombinedWord pirate_row_copy(const Codebook& c, const Coalition& s, CounterRng& rng) {
  if (s.members().back() >= c.n()) throw DimensionError("coalition exceeds codebook");
  const Index pick = s.members()[rng.below(static_cast<std::uint64_t>(s.size()))];
  return c.row(pick).transpose();
}

CombinedWord pirate_interleave(const Codebook& c, const Coalition& s, CounterRng& rng) {
  if (s.members().back() >= c.n()) throw DimensionError("coalition exceeds codebook");
  CombinedWord out(c.d());
  for (Index j = 0; j < c.d(); ++j) {
    const Index pick = s.members()[rng.below(static_cast<std::uint64_t>(s.size()))];
    out(j) = c(pick, j);
  }
  return out;
}

CombinedWord inject_errors(const CombinedWord& word, const Codebook& c, const Coalition& s,
                           Index k, ErrorMode mode, CounterRng& rng) {
  if (word.size() != c.d()) throw DimensionError("inject_errors: word length mismatch");
  if (k < 0) throw std::invalid_argument("inject_errors: negative flip count");
  std::vector<Index> pool;
  if (mode == ErrorMode::MarkedFirst) {
    const MarkedColumns marked = marked_columns(c, s);
    pool = marked.zero_marked;
    pool.insert(pool.end(), marked.one_marked.begin(), marked.one_marked.end());
  } else {
    pool.resize(static_cast<std::size_t>(word.size()));
    std::iota(pool.begin(), pool.end(), Index{0});
  }
  if (k > static_cast<Index>(pool.size())) {
    throw std::invalid_argument("inject_errors: " + std::to_string(k) +
                                " flips requested but only " + std::to_string(pool.size()) +
                                " eligible positions");
  }
  CombinedWord out = word;
  for (Index j : sample_without_replacement(std::move(pool), k, rng)) out(j) ^= 1;
  return out;
}

double gaussian_attack_variance(Index d, Index nominal_n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (nominal_n < 1) throw std::invalid_argument("nominal n must be positive");
  const double n = static_cast<double>(nominal_n);
  return 2.0 * static_cast<double>(d) * std::log(1.0 / delta) / (n * n);
}

CombinedWord pirate_gaussian_average(const Codebook& c, const Coalition& s, Index nominal_n,
                                     const Eigen::VectorXd& noise) {
  if (noise.size() != c.d()) throw DimensionError("gaussian attack: noise length mismatch");
  const Eigen::VectorXd mean = coalition_column_sums(c, s) / static_cast<double>(nominal_n);
  return ((mean + noise).array() >= 0.5).cast<std::uint8_t>().matrix();
}

CombinedWord pirate_gaussian_average(const Codebook& c, const Coalition& s, Index nominal_n,
                                     double delta, CounterRng& rng) {
  const double sigma = std::sqrt(gaussian_attack_variance(c.d(), nominal_n, delta));
  Eigen::VectorXd noise(c.d());
  for (Index j = 0; j < c.d(); ++j) noise(j) = sigma * rng.normal();
  return pirate_gaussian_average(c, s, nominal_n, noise);
}

Index gaussian_attack_users(Index d) {
  if (d < 1) throw std::invalid_argument("gaussian attack: d must be positive");
  const double dd = static_cast<double>(d);
  const auto step = [&](Index n) {
    const double v = 18.0 * dd * std::log(6.0 * std::numbers::e * static_cast<double>(n)) *
                     std::log(1.5 * dd);
    return static_cast<Index>(std::ceil(std::sqrt(v)));
  };
  Index n = static_cast<Index>(std::ceil(std::sqrt(dd)));
  for (int iter = 0; iter < 64; ++iter) {
    const Index next = step(n);
    if (next == n) return n;
    n = next;
  }
  throw std::runtime_error("gaussian attack: fixed point did not converge");
}

double gaussian_attack_delta(Index n) {
  return 1.0 / (6.0 * std::numbers::e * static_cast<double>(n));
}

std::optional<PirateKind> parse_pirate(std::string_view name) {
  if (name == "majority") return PirateKind::Majority;
  if (name == "row_copy" || name == "row-copy") return PirateKind::RowCopy;
  if (name == "interleave") return PirateKind::Interleave;
  if (name == "gaussian_average" || name == "gaussian-average" || name == "gaussian") {
    return PirateKind::GaussianAverage;
  }
  return std::nullopt;
}

std::string_view pirate_name(PirateKind kind) {
  switch (kind) {
    case PirateKind::Majority: return "majority";
    case PirateKind::RowCopy: return "row_copy";
    case PirateKind::Interleave: return "interleave";
    case PirateKind::GaussianAverage: return "gaussian_average";
  }
  return "unknown";
}

CombinedWord run_pirate(PirateKind kind, const Codebook& c, const Coalition& s, CounterRng& rng,
                        Index nominal_n, double delta) {
  switch (kind) {
    case PirateKind::Majority: return pirate_majority(c, s);
    case PirateKind::RowCopy: return pirate_row_copy(c, s, rng);
    case PirateKind::Interleave: return pirate_interleave(c, s, rng);
    case PirateKind::GaussianAverage:
      return pirate_gaussian_average(c, s, nominal_n, delta, rng);
  }
  throw std::invalid_argument("unknown pirate");
}

}  // namespace fpdp
