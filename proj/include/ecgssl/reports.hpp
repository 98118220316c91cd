#pragma once

#include "ecgssl/config.hpp"
#include "ecgssl/training.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ecgssl::reports {

// fold,target,accuracy,f1 with one row per fold per target; folds are numbered from 1.
void write_report_csv(std::ostream& out, const training::EvalReport& report);

// epoch,task_id,mean_loss with one row per epoch per task; epochs are numbered from 1.
void write_loss_trace_csv(std::ostream& out, const training::LossTrace& trace);

// Config echo, per-target mean metrics (and baseline means when present), warnings.
std::string summary_json(const config::RunConfig& config, const training::EvalReport& report,
                         const std::optional<training::EvalReport>& baseline,
                         const std::vector<std::string>& warnings);

}  // namespace ecgssl::reports
