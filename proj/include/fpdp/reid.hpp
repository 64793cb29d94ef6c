#pragma once

#include "fpdp/core.hpp"
#include "fpdp/mechanisms.hpp"
#include "fpdp/report.hpp"
#include "fpdp/robust.hpp"
#include "fpdp/tardos.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <variant>

namespace fpdp {

/// Bit j is 1 iff a_j >= 1/2.
CombinedWord round_answers(const AnswerVector& a);

using CodeSecret = std::variant<TardosSecret, RobustSecret>;

/// Trace on the rounded answers, treating the database as the codebook.
TraceOutcome reid_adversary(const CodeSecret& secret, const Database& db, const AnswerVector& a);

/// Accusation and the largest user score behind it.
struct ReidDecision {
  TraceOutcome accused;
  double score_max = 0.0;
};
ReidDecision reid_decide(const CodeSecret& secret, const Database& db, const AnswerVector& a);

/// Trace of a word against a plain or padded codebook, with the top score.
ReidDecision trace_decide(const CodeSecret& secret, const Codebook& c, const CombinedWord& word);

enum class CodeKind { Plain, Robust };

struct GeneratedCode {
  Codebook codebook;
  CodeSecret secret;
};
GeneratedCode generate_code(CodeKind kind, const TardosParams& params, std::uint64_t seed);

struct ReidConfig {
  CodeKind code = CodeKind::Plain;
  Mechanism mechanism = ExactMechanism{};
  /// Record count used to calibrate the mechanism's noise; defaults to n.
  std::optional<Index> calibration_n;
  Index n = 10;
  double sec = 0.05;
  Index trials = 100;
  std::uint64_t seed = 1;
  double alpha = 1.0 / 3.0;
  /// Defaults to 0 for the plain code and 1/75 for the robust code.
  std::optional<double> beta;

  double effective_beta() const;
  void validate() const;
};

ReidConfig reid_config_from_json(const nlohmann::json& j, std::string_view where = "<config>");
nlohmann::json to_json(const ReidConfig& config);

/// Mechanism parameters from {name, params:{eps, delta, n}}.
Mechanism mechanism_from_json(const nlohmann::json& j, std::string_view where,
                              std::optional<Index>* calibration_n = nullptr);
nlohmann::json mechanism_to_json(const Mechanism& mech, std::optional<Index> calibration_n);

/// Whether per-query noise stays below 1/3 on all d queries with probability
/// at least 2/3, by a union bound over the tails.
bool predicted_accurate(const Mechanism& mech, Index d, Index calibration_n);

/// Per trial: fresh code as the database, condition 1 (no accusation and
/// accurate answers) on D, and condition 2 (accused = i) on D_{-i} for a
/// uniform i.
ExperimentReport run_reid_experiment(const ReidConfig& config, int jobs = 1);

}  // namespace fpdp
