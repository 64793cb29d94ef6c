#include "fpdp/report.hpp"

#include "fpdp/io.hpp"

#include <sstream>

namespace fpdp {

namespace {

nlohmann::json rate_json(const Rate& r) {
  return {{"hits", r.hits}, {"trials", r.trials}, {"rate", r.value}, {"wilson95", {r.lo, r.hi}}};
}

}  // namespace

void aggregate(ExperimentReport& report) {
  Index some = 0, bot_acc = 0, false_acc = 0, acc = 0, feas = 0;
  for (const TrialRecord& r : report.records) {
    some += r.accused_someone;
    bot_acc += !r.accused_someone && r.accurate;
    false_acc += r.removed_accused;
    acc += r.accurate;
    feas += r.feasible;
  }
  const Index t = static_cast<Index>(report.records.size());
  report.trials = t;
  report.trace_some_user = wilson(some, t);
  report.bot_and_accurate = wilson(bot_acc, t);
  report.false_accuse = wilson(false_acc, t);
  report.accuracy = wilson(acc, t);
  report.feasibility = wilson(feas, t);
  if (report.experiment == "compose") {
    Index slices = 0;
    for (const TrialRecord& r : report.records) slices += r.slice_accurate;
    report.slice_accuracy = wilson(slices, t);
  }
}

nlohmann::json report_json(const ExperimentReport& report) {
  nlohmann::json out{{"experiment", report.experiment},
          {"config", report.config},
          {"master_seed", report.master_seed},
          {"trials", report.trials},
          {"trace_some_user_rate", rate_json(report.trace_some_user)},
          {"bot_and_accurate_rate", rate_json(report.bot_and_accurate)},
          {"false_accuse_rate", rate_json(report.false_accuse)},
          {"accuracy_rate", rate_json(report.accuracy)},
          {"feasibility_rate", rate_json(report.feasibility)},
          {"outside_guarantee", report.outside_guarantee},
          {"regime", report.regime}};
  if (report.slice_accuracy) out["slice_accuracy_rate"] = rate_json(*report.slice_accuracy);
  return out;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "trial,seed,outcome,accused,feasible,accurate,score_max,removed,removed_accused\n";
  double score_sum = 0.0;
  for (const TrialRecord& r : report.records) {
    out << r.trial << ',' << r.seed << ',' << (r.accused_someone ? "accuse" : "none") << ','
        << r.accused << ',' << int{r.feasible} << ',' << int{r.accurate} << ','
        << io::format_double(r.score_max) << ',' << r.removed << ',' << int{r.removed_accused}
        << '\n';
    score_sum += r.score_max;
  }
  const double mean_score =
      report.records.empty() ? 0.0 : score_sum / static_cast<double>(report.records.size());
  out << "aggregate," << report.master_seed << ','
      << io::format_double(report.trace_some_user.value) << ','
      << io::format_double(report.bot_and_accurate.value) << ','
      << io::format_double(report.feasibility.value) << ','
      << io::format_double(report.accuracy.value) << ',' << io::format_double(mean_score) << ','
      << report.trials << ',' << io::format_double(report.false_accuse.value) << '\n';
  return out.str();
}

}  // namespace fpdp
