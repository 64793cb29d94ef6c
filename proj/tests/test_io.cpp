#include "fpdp/io.hpp"
#include "fpdp/rng.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

using namespace fpdp;
using fpdp::io::json;

namespace {

BitVector bits_of(const char* s) {
  const Index d = static_cast<Index>(std::strlen(s));
  BitVector b(d);
  for (Index j = 0; j < d; ++j) b(j) = s[j] == '1';
  return b;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("hex row encoding") {
  // 10110000 | 1 + seven padding zeros.
  CHECK(io::encode_row(bits_of("101100001")) == "b080");
  CHECK(io::encode_row(bits_of("11111111")) == "ff");
  CHECK(io::encode_row(bits_of("0000000100000001")) == "0101");
  CHECK(io::decode_row("b080", 9) == bits_of("101100001"));
  CHECK(io::decode_row("B080", 9) == bits_of("101100001"));
  CHECK_THROWS_AS(io::decode_row("b081", 9), FormatError);
  CHECK_THROWS_AS(io::decode_row("b0", 9), FormatError);
  CHECK_THROWS_AS(io::decode_row("zz80", 9), FormatError);
}

TEST_CASE("row round trip") {
  CounterRng rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const Index d = 1 + static_cast<Index>(rng.below(70));
    BitVector b(d);
    for (Index j = 0; j < d; ++j) b(j) = rng.bernoulli(0.5);
    const std::string hex = io::encode_row(b);
    CHECK(static_cast<Index>(hex.size()) == 2 * ((d + 7) / 8));
    CHECK(io::decode_row(hex, d) == b);
  }
}

TEST_CASE("codebook, secret and word round trips") {
  const TardosCode code = tardos_gen(TardosParams::with_length(5, 0.1, 37), 3);
  const json jc = io::to_json(code.codebook);
  CHECK(jc["version"] == 1);
  CHECK(jc["n"] == 5);
  CHECK(jc["d"] == 37);
  CHECK(io::codebook_from_json(jc) == code.codebook);
  CHECK(io::database_from_json(io::to_json(as_database(code.codebook))) == as_database(code.codebook));

  const TardosSecret s = io::secret_from_json(io::to_json(code.secret));
  CHECK(s.p == code.secret.p);
  CHECK(s.params.d == 37);
  CHECK(s.params.threshold == code.secret.params.threshold);
  // Text round trip keeps doubles bit-exact.
  CHECK(io::secret_from_json(json::parse(io::to_json(code.secret).dump())).p == code.secret.p);

  const CombinedWord w = code.codebook.row(2).transpose();
  CHECK(io::word_from_json(io::to_json(w)) == w);

  const RobustCode rc = robust_gen(TardosParams::with_length(4, 0.1, 20), 8);
  const json jr = io::to_json(rc.secret);
  CHECK(io::is_robust_secret(jr));
  CHECK_FALSE(io::is_robust_secret(io::to_json(code.secret)));
  CHECK(jr["fake"].size() == 80);
  const RobustSecret r = io::robust_secret_from_json(jr);
  CHECK(r.perm == rc.secret.perm);
  CHECK(r.inner.p == rc.secret.inner.p);
}

TEST_CASE("errors name the source and the field") {
  const TardosCode code = tardos_gen(TardosParams::with_length(3, 0.1, 10), 1);
  json j = io::to_json(code.codebook);
  j.erase("rows");
  CHECK(error_of([&] { io::codebook_from_json(j, "book.json"); }) ==
        "book.json: field 'rows' is missing");

  j = io::to_json(code.codebook);
  j["rows"][1] = "zz00";
  const std::string e = error_of([&] { io::codebook_from_json(j, "book.json"); });
  CHECK(e.find("book.json") != std::string::npos);
  CHECK(e.find("'rows'") != std::string::npos);
  CHECK(e.find("entry 1") != std::string::npos);

  j = io::to_json(code.codebook);
  j["version"] = 2;
  CHECK(error_of([&] { io::codebook_from_json(j, "x"); }).find("'version'") != std::string::npos);

  json s = io::to_json(code.secret);
  s["p"][0] = 1.5;
  CHECK(error_of([&] { io::secret_from_json(s, "sec.json"); }).find("sec.json: field 'p'") == 0);
  s = io::to_json(code.secret);
  s["sec"] = "high";
  CHECK(error_of([&] { io::secret_from_json(s, "sec.json"); }) == "sec.json: field 'sec' must be a number");

  const RobustCode rc = robust_gen(TardosParams::with_length(3, 0.1, 4), 2);
  json r = io::to_json(rc.secret);
  r["perm"][0] = r["perm"][1];
  CHECK(error_of([&] { io::robust_secret_from_json(r, "r.json"); }).find("r.json: field 'perm'") == 0);
  r = io::to_json(rc.secret);
  r["fake"][0]["bit"] = 1 - r["fake"][0]["bit"].get<int>();
  CHECK(error_of([&] { io::robust_secret_from_json(r, "r.json"); }).find("field 'fake'") != std::string::npos);

  CHECK(error_of([&] { io::word_from_json(json{{"version", 1}, {"d", 3}, {"bits", 7}}, "w"); }) ==
        "w: field 'bits' must be a hex string");
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "fpdp_test_io";
  std::filesystem::create_directories(dir);
  const auto path = dir / "a.json";
  io::write_json(path, json{{"k", 1}});
  std::ifstream in(path);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text == "{\n  \"k\": 1\n}\n");
  CHECK(io::read_json(path)["k"] == 1);
  io::write_text(dir / "b.json", "{oops");
  CHECK(error_of([&] { io::read_json(dir / "b.json"); }).find("invalid JSON") != std::string::npos);
  CHECK(error_of([&] { io::read_json(dir / "missing.json"); }).find("cannot open") != std::string::npos);
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  std::filesystem::remove_all(dir);
}
