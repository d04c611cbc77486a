// SPDX-License-Identifier: Apache-2.0
#include "fibermon/train_eval/report.hpp"

#include "fibermon/error.hpp"
#include "util/json_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fibermon::train_eval {

using util::json;

namespace {

std::string class_name(std::size_t c) { return std::string(otdr::to_string(otdr::fault_class_from_index(c))); }

json detection_json(const DetectionReport& d) {
  return {{"theta", d.theta},
          {"tp", d.counts.tp},
          {"tn", d.counts.tn},
          {"fp", d.counts.fp},
          {"fn", d.counts.fn},
          {"precision", d.metrics.precision},
          {"recall", d.metrics.recall},
          {"f1", d.metrics.f1},
          {"degenerate", d.metrics.degenerate},
          {"auc", d.roc.auc}};
}

json diagnosis_json(const DiagReport& r) {
  json j;
  j["count"] = r.count;
  j["accuracy"] = r.accuracy;
  json per_class = json::object();
  for (std::size_t c = 0; c < otdr::kFaultClassCount; ++c) {
    per_class[class_name(c)] = r.class_accuracy[c] ? json(*r.class_accuracy[c]) : json(nullptr);
  }
  j["class_accuracy"] = per_class;
  j["rmse_index"] = r.rmse_index;
  j["rmse_m"] = r.rmse_m;
  j["meters_per_sample"] = r.meters_per_sample;
  json bins = json::array();
  for (const DiagBinRow& b : r.bins) {
    bins.push_back({{"snr_low_db", snr_bin_low(b.bin)},
                    {"snr_high_db", snr_bin_high(b.bin)},
                    {"count", b.count},
                    {"accuracy", b.accuracy},
                    {"rmse_index", b.rmse_index},
                    {"rmse_m", b.rmse_m}});
  }
  j["snr_bins"] = bins;
  return j;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string threshold_curve_csv(const ThresholdSweep& sweep) {
  std::ostringstream o;
  o << "theta,tp,tn,fp,fn,precision,recall,f1,degenerate,selected\n";
  for (std::size_t i = 0; i < sweep.curve.size(); ++i) {
    const ThresholdPoint& p = sweep.curve[i];
    o << format_double(p.theta) << ',' << p.counts.tp << ',' << p.counts.tn << ',' << p.counts.fp << ','
      << p.counts.fn << ',' << format_double(p.metrics.precision) << ',' << format_double(p.metrics.recall) << ','
      << format_double(p.metrics.f1) << ',' << (p.metrics.degenerate ? 1 : 0) << ','
      << (i == sweep.best_index ? 1 : 0) << '\n';
  }
  return o.str();
}

std::string roc_csv(const RocCurve& roc) {
  std::ostringstream o;
  o << "threshold,false_positive_rate,true_positive_rate\n";
  for (const RocPoint& p : roc.points) {
    o << format_double(p.threshold) << ',' << format_double(p.false_positive_rate) << ','
      << format_double(p.true_positive_rate) << '\n';
  }
  return o.str();
}

std::string confusion_csv(const DiagReport& r) {
  std::ostringstream o;
  o << "true_class";
  for (std::size_t c = 0; c < otdr::kFaultClassCount; ++c) o << ',' << class_name(c);
  o << ",total\n";
  for (std::size_t t = 0; t < otdr::kFaultClassCount; ++t) {
    o << class_name(t);
    std::size_t total = 0;
    for (std::size_t p = 0; p < otdr::kFaultClassCount; ++p) {
      o << ',' << r.confusion[t][p];
      total += r.confusion[t][p];
    }
    o << ',' << total << '\n';
  }
  return o.str();
}

std::string snr_bins_csv(const DiagReport& r) {
  std::ostringstream o;
  o << "snr_low_db,snr_high_db,count,accuracy,rmse_index,rmse_m\n";
  for (const DiagBinRow& b : r.bins) {
    o << format_double(snr_bin_low(b.bin)) << ',' << format_double(snr_bin_high(b.bin)) << ',' << b.count << ','
      << format_double(b.accuracy) << ',' << format_double(b.rmse_index) << ',' << format_double(b.rmse_m) << '\n';
  }
  return o.str();
}

std::string loss_history_csv(const TrainHistory& h) {
  std::ostringstream o;
  o << "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < h.train_loss.size(); ++i) {
    o << (i + 1) << ',' << format_double(h.train_loss[i]) << ',';
    if (i < h.val_loss.size()) o << format_double(h.val_loss[i]);
    o << '\n';
  }
  return o.str();
}

std::string summary_text(const EvalReport& report) {
  std::ostringstream o;
  o.precision(6);
  if (report.sweep) {
    const ThresholdPoint& p = report.sweep->curve[report.sweep->best_index];
    o << "calibration\n"
      << "  theta      " << report.sweep->theta << "\n"
      << "  f1         " << p.metrics.f1 << " (" << report.sweep->curve.size() << " candidates)\n";
  }
  if (report.detection) {
    const DetectionReport& d = *report.detection;
    o << "detection\n"
      << "  theta      " << d.theta << "\n"
      << "  tp/tn/fp/fn " << d.counts.tp << '/' << d.counts.tn << '/' << d.counts.fp << '/' << d.counts.fn << "\n"
      << "  precision  " << d.metrics.precision << "\n"
      << "  recall     " << d.metrics.recall << "\n"
      << "  f1         " << d.metrics.f1 << (d.metrics.degenerate ? " (degenerate)" : "") << "\n"
      << "  auc        " << d.roc.auc << "\n";
  }
  if (report.diagnosis) {
    const DiagReport& r = *report.diagnosis;
    o << "diagnosis\n"
      << "  samples    " << r.count << "\n"
      << "  accuracy   " << r.accuracy << "\n";
    for (std::size_t c = 0; c < otdr::kFaultClassCount; ++c) {
      o << "  " << class_name(c) << ": ";
      if (r.class_accuracy[c]) {
        o << *r.class_accuracy[c] << "\n";
      } else {
        o << "n/a\n";
      }
    }
    o << "  rmse       " << r.rmse_index << " samples, " << r.rmse_m << " m (" << r.meters_per_sample
      << " m/sample)\n";
    for (const DiagBinRow& b : r.bins) {
      o << "  snr [" << snr_bin_low(b.bin) << ", " << snr_bin_high(b.bin) << ") n=" << b.count
        << " accuracy=" << b.accuracy << " rmse=" << b.rmse_index << " samples / " << b.rmse_m << " m\n";
    }
  }
  return o.str();
}

std::string summary_json(const EvalReport& report) {
  json j = json::object();
  if (report.sweep) {
    j["calibration"] = {{"theta", report.sweep->theta},
                        {"f1", report.sweep->curve[report.sweep->best_index].metrics.f1},
                        {"candidates", report.sweep->curve.size()}};
  }
  if (report.detection) j["detection"] = detection_json(*report.detection);
  if (report.diagnosis) j["diagnosis"] = diagnosis_json(*report.diagnosis);
  return j.dump();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::filesystem::path> emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  const auto put = [&](const char* name, const std::string& text) {
    write_text_file(dir / name, text);
    written.push_back(dir / name);
  };
  put("summary.txt", summary_text(report));
  put("summary.json", summary_json(report) + "\n");
  if (report.sweep) put("threshold_curve.csv", threshold_curve_csv(*report.sweep));
  if (report.detection) put("roc.csv", roc_csv(report.detection->roc));
  if (report.diagnosis) {
    put("confusion.csv", confusion_csv(*report.diagnosis));
    put("snr_bins.csv", snr_bins_csv(*report.diagnosis));
  }
  return written;
}

}  // namespace fibermon::train_eval
