#pragma once

#include "fpdp/core.hpp"
#include "fpdp/robust.hpp"
#include "fpdp/tardos.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace fpdp::io {

using nlohmann::json;

// Rows are hex strings of ceil(d/8) bytes, most significant bit first, with
// the final byte zero-padded.
std::string encode_row(const BitVector& bits);
BitVector decode_row(std::string_view hex, Index d);

json to_json(const Codebook& c);
json to_json(const Database& db);
json to_json(const CombinedWord& word);
json to_json(const TardosSecret& secret);
json to_json(const RobustSecret& secret);

// `where` names the source (usually a file) in FormatError messages.
Codebook codebook_from_json(const json& j, std::string_view where = "<json>");
Database database_from_json(const json& j, std::string_view where = "<json>");
CombinedWord word_from_json(const json& j, std::string_view where = "<json>");
TardosSecret secret_from_json(const json& j, std::string_view where = "<json>");
RobustSecret robust_secret_from_json(const json& j, std::string_view where = "<json>");

/// True if the secret object carries a permutation.
bool is_robust_secret(const json& j);

json read_json(const std::filesystem::path& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, std::string_view text);

/// "%.17g" formatting, for byte-stable text output.
std::string format_double(double v);

}  // namespace fpdp::io
