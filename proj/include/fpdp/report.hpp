#pragma once

#include "fpdp/core.hpp"
#include "fpdp/trials.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fpdp {

/// One CSV row. User labels are 1-indexed ("3", or "2:7" for product rows).
struct TrialRecord {
  Index trial = 0;
  std::uint64_t seed = 0;
  bool accused_someone = false;
  std::string accused;
  bool feasible = false;
  bool accurate = false;
  double score_max = 0.0;
  std::string removed;
  bool removed_accused = false;
  /// Composition only: the chosen reconstructed column met the
  /// (6 c alpha', 2/c) accuracy target. Not part of the CSV.
  bool slice_accurate = false;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config;
  std::uint64_t master_seed = 0;
  Index trials = 0;
  Rate trace_some_user;
  Rate bot_and_accurate;
  Rate false_accuse;
  Rate accuracy;
  Rate feasibility;
  std::optional<Rate> slice_accuracy;
  bool outside_guarantee = false;
  std::string regime;
  std::vector<TrialRecord> records;
};

/// Fills the rates from the records.
void aggregate(ExperimentReport& report);

nlohmann::json report_json(const ExperimentReport& report);

/// Header, one row per trial in trial order, then an aggregate row.
std::string report_csv(const ExperimentReport& report);

}  // namespace fpdp
