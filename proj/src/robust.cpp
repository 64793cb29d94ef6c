#include "fpdp/robust.hpp"

#include "fpdp/rng.hpp"

#include <numeric>

namespace fpdp {

namespace {

constexpr std::uint64_t kInnerStream = 1;
constexpr std::uint64_t kPermStream = 2;

}  // namespace

std::vector<FakeColumn> RobustSecret::fake_columns() const {
  const Index d = inner_length();
  std::vector<FakeColumn> out;
  out.reserve(static_cast<std::size_t>(4 * d));
  for (Index pos = 0; pos < length(); ++pos) {
    const Index src = perm[static_cast<std::size_t>(pos)];
    if (src >= d) out.push_back({pos, static_cast<std::uint8_t>(src >= 3 * d ? 1 : 0)});
  }
  return out;
}

void RobustSecret::validate() const {
  const Index d = inner_length();
  if (inner.p.size() != d) throw DimensionError("robust: inner secret length mismatch");
  if (length() != 5 * d) throw DimensionError("robust: permutation must have length 5d");
  std::vector<bool> seen(perm.size(), false);
  for (Index src : perm) {
    if (src < 0 || src >= length() || seen[static_cast<std::size_t>(src)]) {
      throw DimensionError("robust: perm is not a bijection");
    }
    seen[static_cast<std::size_t>(src)] = true;
  }
}

RobustCode robust_gen(const TardosParams& params, std::uint64_t seed) {
  TardosCode inner = tardos_gen(params, substream(seed, kInnerStream));
  const Index n = params.n;
  const Index d = params.d;

  std::vector<Index> perm(static_cast<std::size_t>(5 * d));
  std::iota(perm.begin(), perm.end(), Index{0});
  CounterRng rng(substream(seed, kPermStream));
  for (std::size_t k = perm.size() - 1; k > 0; --k) {
    const auto j = static_cast<std::size_t>(rng.below(k + 1));
    std::swap(perm[k], perm[j]);
  }

  BitMatrix bits(n, 5 * d);
  for (Index pos = 0; pos < 5 * d; ++pos) {
    const Index src = perm[static_cast<std::size_t>(pos)];
    if (src < d) {
      bits.col(pos) = inner.codebook.bits().col(src);
    } else {
      bits.col(pos).setConstant(src >= 3 * d ? 1 : 0);
    }
  }
  return {Codebook(std::move(bits)), RobustSecret{std::move(inner.secret), std::move(perm)}};
}

RobustCode robust_gen(Index n, double sec, std::uint64_t seed) {
  return robust_gen(TardosParams::make(n, sec), seed);
}

CombinedWord strip_word(const RobustSecret& secret, const CombinedWord& word) {
  if (word.size() != secret.length()) throw DimensionError("robust: word length mismatch");
  const Index d = secret.inner_length();
  CombinedWord out(d);
  for (Index pos = 0; pos < secret.length(); ++pos) {
    const Index src = secret.perm[static_cast<std::size_t>(pos)];
    if (src < d) out(src) = word(pos);
  }
  return out;
}

Codebook strip_codebook(const RobustSecret& secret, const Codebook& padded) {
  if (padded.d() != secret.length()) throw DimensionError("robust: codebook length mismatch");
  const Index d = secret.inner_length();
  BitMatrix out(padded.n(), d);
  for (Index pos = 0; pos < secret.length(); ++pos) {
    const Index src = secret.perm[static_cast<std::size_t>(pos)];
    if (src < d) out.col(src) = padded.bits().col(pos);
  }
  return Codebook(std::move(out));
}

TraceOutcome robust_trace(const RobustSecret& secret, const Codebook& padded,
                          const CombinedWord& word) {
  return tardos_trace(secret.inner, strip_codebook(secret, padded), strip_word(secret, word));
}

}  // namespace fpdp
