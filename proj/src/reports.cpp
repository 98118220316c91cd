#include "ecgssl/reports.hpp"

#include <json.hpp>

#include <ostream>

namespace ecgssl::reports {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json metrics_json(const training::EvalReport& report) {
  ordered_json out = ordered_json::object();
  for (const auto& target : report.targets) {
    const auto m = report.mean(target);
    out[target] = {{"accuracy", m.accuracy}, {"f1", m.f1}, {"precision", m.precision}, {"recall", m.recall}};
  }
  return out;
}

}  // namespace

void write_report_csv(std::ostream& out, const training::EvalReport& report) {
  out << "fold,target,accuracy,f1\n";
  for (const auto& r : report.folds) {
    out << r.fold + 1 << ',' << r.target << ',' << config::format_number(r.metrics.accuracy) << ','
        << config::format_number(r.metrics.f1) << '\n';
  }
}

void write_loss_trace_csv(std::ostream& out, const training::LossTrace& trace) {
  out << "epoch,task_id,mean_loss\n";
  for (std::size_t e = 0; e < trace.task_loss.size(); ++e) {
    for (std::size_t j = 0; j < trace.task_loss[e].size(); ++j) {
      out << e + 1 << ',' << j << ',' << config::format_number(trace.task_loss[e][j]) << '\n';
    }
  }
}

std::string summary_json(const config::RunConfig& config, const training::EvalReport& report,
                         const std::optional<training::EvalReport>& baseline,
                         const std::vector<std::string>& warnings) {
  ordered_json cfg = ordered_json::object();
  for (const auto& [key, value] : config::entries(config)) cfg[key] = value;
  ordered_json out = {{"format_version", 1}, {"config", cfg}, {"kfolds", report.kfolds}, {"mean", metrics_json(report)}};
  if (baseline) out["baseline_mean"] = metrics_json(*baseline);
  out["warnings"] = warnings;
  return out.dump(2) + "\n";
}

}  // namespace ecgssl::reports
