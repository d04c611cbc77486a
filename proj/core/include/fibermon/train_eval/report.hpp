// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/train_eval/evaluation.hpp"
#include "fibermon/train_eval/training.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fibermon::train_eval {

/// Shortest text that reads back to the same double ("inf"/"-inf" for
/// infinities).
std::string format_double(double v);

// CSV tables. Column headers are part of the format and do not change.

/// theta,tp,tn,fp,fn,precision,recall,f1,degenerate,selected
std::string threshold_curve_csv(const ThresholdSweep& sweep);
/// threshold,false_positive_rate,true_positive_rate
std::string roc_csv(const RocCurve& roc);
/// true_class,<one column per predicted class>,total
std::string confusion_csv(const DiagReport& report);
/// snr_low_db,snr_high_db,count,accuracy,rmse_index,rmse_m
std::string snr_bins_csv(const DiagReport& report);
/// epoch,train_loss,val_loss
std::string loss_history_csv(const TrainHistory& history);

std::string summary_text(const EvalReport& report);
/// The summary as one JSON object on a single line.
std::string summary_json(const EvalReport& report);

/// Writes summary.txt, summary.json and the CSV tables that apply to the
/// report into `dir` (created if missing). Returns the files written.
/// Throws IoError.
std::vector<std::filesystem::path> emit_report(const EvalReport& report, const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fibermon::train_eval
