#include "fpdp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fpdp::io {

namespace {

[[noreturn]] void fail(std::string_view where, std::string_view field, std::string_view what) {
  throw FormatError(std::string(where) + ": field '" + std::string(field) + "' " +
                    std::string(what));
}

const json& field(const json& j, const char* name, std::string_view where) {
  if (!j.is_object()) fail(where, name, "expected inside an object");
  const auto it = j.find(name);
  if (it == j.end()) fail(where, name, "is missing");
  return *it;
}

Index count_field(const json& j, const char* name, std::string_view where, Index min) {
  const json& v = field(j, name, where);
  if (!v.is_number_integer()) fail(where, name, "must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < min) fail(where, name, "must be at least " + std::to_string(min));
  return static_cast<Index>(x);
}

double real_field(const json& j, const char* name, std::string_view where) {
  const json& v = field(j, name, where);
  if (!v.is_number()) fail(where, name, "must be a number");
  return v.get<double>();
}

void check_version(const json& j, std::string_view where) {
  if (count_field(j, "version", where, 0) != 1) fail(where, "version", "must be 1");
}

int hex_value(char ch) {
  if (ch >= '0' && ch <= '9') return ch - '0';
  if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
  if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
  return -1;
}

BitMatrix rows_from_json(const json& j, std::string_view where) {
  check_version(j, where);
  const Index n = count_field(j, "n", where, 1);
  const Index d = count_field(j, "d", where, 1);
  const json& rows = field(j, "rows", where);
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n) {
    fail(where, "rows", "must be an array of n hex strings");
  }
  BitMatrix bits(n, d);
  for (Index i = 0; i < n; ++i) {
    const json& r = rows[static_cast<std::size_t>(i)];
    if (!r.is_string()) fail(where, "rows", "entry " + std::to_string(i) + " is not a string");
    try {
      bits.row(i) = decode_row(r.get<std::string>(), d).transpose();
    } catch (const FormatError& e) {
      fail(where, "rows", "entry " + std::to_string(i) + ": " + e.what());
    }
  }
  return bits;
}

template <class Rows>
json rows_to_json(const Rows& t) {
  json rows = json::array();
  for (Index i = 0; i < t.n(); ++i) rows.push_back(encode_row(t.row(i).transpose()));
  return json{{"version", 1}, {"n", t.n()}, {"d", t.d()}, {"rows", std::move(rows)}};
}

}  // namespace

std::string encode_row(const BitVector& bits) {
  static constexpr char digits[] = "0123456789abcdef";
  const Index bytes = (bits.size() + 7) / 8;
  std::string out;
  out.reserve(static_cast<std::size_t>(2 * bytes));
  for (Index b = 0; b < bytes; ++b) {
    unsigned v = 0;
    for (Index k = 0; k < 8; ++k) {
      const Index j = 8 * b + k;
      v = (v << 1) | (j < bits.size() ? bits(j) : 0U);
    }
    out.push_back(digits[v >> 4]);
    out.push_back(digits[v & 15]);
  }
  return out;
}

BitVector decode_row(std::string_view hex, Index d) {
  const Index bytes = (d + 7) / 8;
  if (static_cast<Index>(hex.size()) != 2 * bytes) {
    throw FormatError("expected " + std::to_string(2 * bytes) + " hex digits, got " +
                      std::to_string(hex.size()));
  }
  BitVector bits(d);
  for (Index b = 0; b < bytes; ++b) {
    const int hi = hex_value(hex[static_cast<std::size_t>(2 * b)]);
    const int lo = hex_value(hex[static_cast<std::size_t>(2 * b + 1)]);
    if (hi < 0 || lo < 0) throw FormatError("invalid hex digit");
    const unsigned v = static_cast<unsigned>(hi * 16 + lo);
    for (Index k = 0; k < 8; ++k) {
      const Index j = 8 * b + k;
      const unsigned bit = (v >> (7 - k)) & 1U;
      if (j < d) {
        bits(j) = static_cast<std::uint8_t>(bit);
      } else if (bit != 0) {
        throw FormatError("padding bits must be zero");
      }
    }
  }
  return bits;
}

json to_json(const Codebook& c) { return rows_to_json(c); }
json to_json(const Database& db) { return rows_to_json(db); }

json to_json(const CombinedWord& word) {
  return json{{"version", 1}, {"d", word.size()}, {"bits", encode_row(word)}};
}

json to_json(const TardosSecret& secret) {
  std::vector<double> p(secret.p.data(), secret.p.data() + secret.p.size());
  return json{{"version", 1},
              {"n", secret.params.n},
              {"d", secret.params.d},
              {"sec", secret.params.sec},
              {"p", std::move(p)}};
}

json to_json(const RobustSecret& secret) {
  json fake = json::array();
  for (const FakeColumn& f : secret.fake_columns()) {
    fake.push_back(json{{"pos", f.pos}, {"bit", static_cast<int>(f.bit)}});
  }
  return json{{"version", 1},
              {"inner", to_json(secret.inner)},
              {"perm", secret.perm},
              {"fake", std::move(fake)}};
}

Codebook codebook_from_json(const json& j, std::string_view where) {
  return Codebook(rows_from_json(j, where));
}

Database database_from_json(const json& j, std::string_view where) {
  return Database(rows_from_json(j, where));
}

CombinedWord word_from_json(const json& j, std::string_view where) {
  check_version(j, where);
  const Index d = count_field(j, "d", where, 1);
  const json& bits = field(j, "bits", where);
  if (!bits.is_string()) fail(where, "bits", "must be a hex string");
  try {
    return decode_row(bits.get<std::string>(), d);
  } catch (const FormatError& e) {
    fail(where, "bits", e.what());
  }
}

TardosSecret secret_from_json(const json& j, std::string_view where) {
  check_version(j, where);
  const Index n = count_field(j, "n", where, 2);
  const Index d = count_field(j, "d", where, 1);
  const double sec = real_field(j, "sec", where);
  if (!(sec > 0.0 && sec < 1.0)) fail(where, "sec", "must lie in (0,1)");
  const json& p = field(j, "p", where);
  if (!p.is_array() || static_cast<Index>(p.size()) != d) {
    fail(where, "p", "must be an array of d numbers");
  }
  TardosSecret s{TardosParams::with_length(n, sec, d), Eigen::VectorXd(d)};
  for (Index k = 0; k < d; ++k) {
    const json& v = p[static_cast<std::size_t>(k)];
    if (!v.is_number()) fail(where, "p", "entry " + std::to_string(k) + " is not a number");
    s.p(k) = v.get<double>();
    if (!(s.p(k) > 0.0 && s.p(k) < 1.0)) {
      fail(where, "p", "entry " + std::to_string(k) + " must lie in (0,1)");
    }
  }
  return s;
}

bool is_robust_secret(const json& j) { return j.is_object() && j.contains("perm"); }

RobustSecret robust_secret_from_json(const json& j, std::string_view where) {
  check_version(j, where);
  RobustSecret s;
  s.inner = secret_from_json(field(j, "inner", where), std::string(where) + " (inner)");
  const json& perm = field(j, "perm", where);
  if (!perm.is_array()) fail(where, "perm", "must be an array");
  for (const json& v : perm) {
    if (!v.is_number_integer()) fail(where, "perm", "entries must be integers");
    s.perm.push_back(v.get<Index>());
  }
  try {
    s.validate();
  } catch (const DimensionError& e) {
    fail(where, "perm", e.what());
  }
  if (j.contains("fake")) {
    const json& fake = j["fake"];
    if (!fake.is_array()) fail(where, "fake", "must be an array");
    std::vector<FakeColumn> listed;
    for (const json& f : fake) {
      listed.push_back(FakeColumn{count_field(f, "pos", where, 0),
                                  static_cast<std::uint8_t>(count_field(f, "bit", where, 0))});
    }
    if (listed != s.fake_columns()) fail(where, "fake", "does not match the permutation");
  }
  return s;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open file for writing");
  out << text;
  if (!out) throw FormatError(path.string() + ": write failed");
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace fpdp::io
