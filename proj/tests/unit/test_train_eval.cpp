#include "doctest.h"

#include "fibermon/error.hpp"
#include "fibermon/models/model_io.hpp"
#include "fibermon/otdr/dataset.hpp"
#include "fibermon/train_eval/config.hpp"
#include "fibermon/train_eval/evaluation.hpp"
#include "fibermon/train_eval/metrics.hpp"
#include "fibermon/train_eval/report.hpp"
#include "fibermon/train_eval/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace fibermon;
using namespace fibermon::train_eval;
using otdr::Label;
using otdr::SequenceSample;

namespace {

struct Labeled {
  std::vector<double> scores;
  std::vector<bool> is_fault;
};

/// Random scores with plenty of ties and a mild class shift.
Labeled random_labeled(nn::Rng& rng, std::size_t n, int levels = 40) {
  Labeled l;
  for (std::size_t i = 0; i < n; ++i) {
    const bool fault = rng.uniform() < 0.4;
    const double raw = rng.uniform() + (fault ? 0.3 : 0.0);
    l.scores.push_back(std::floor(raw * levels) / levels);
    l.is_fault.push_back(fault);
  }
  l.is_fault[0] = true;
  l.is_fault[1] = false;
  return l;
}

DetectionCounts brute_counts(const Labeled& l, double theta) {
  DetectionCounts c;
  for (std::size_t i = 0; i < l.scores.size(); ++i) {
    const bool pred = l.scores[i] > theta;
    if (pred && l.is_fault[i]) ++c.tp;
    if (pred && !l.is_fault[i]) ++c.fp;
    if (!pred && l.is_fault[i]) ++c.fn;
    if (!pred && !l.is_fault[i]) ++c.tn;
  }
  return c;
}

double brute_pairwise_auc(const Labeled& l) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < l.scores.size(); ++i) {
    if (!l.is_fault[i]) continue;
    for (std::size_t j = 0; j < l.scores.size(); ++j) {
      if (l.is_fault[j]) continue;
      pairs += 1.0;
      if (l.scores[i] > l.scores[j]) wins += 1.0;
      if (l.scores[i] == l.scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

otdr::Dataset detection_data(std::size_t normals, std::size_t faults, std::uint64_t seed, double snr_min = 0.0) {
  otdr::GeneratorConfig c = otdr::GeneratorConfig::detection_defaults();
  c.normal_count = normals;
  c.fault_count = faults;
  c.snr_db = {snr_min, 30.0};
  return otdr::generate_dataset(c, seed);
}

otdr::Dataset diagnosis_data(std::size_t faults, std::uint64_t seed, double snr_min = 0.0) {
  otdr::GeneratorConfig c = otdr::GeneratorConfig::diagnosis_defaults();
  c.fault_count = faults;
  c.snr_db = {snr_min, 30.0};
  return otdr::generate_dataset(c, seed);
}

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 16;
  c.hidden1 = 6;
  c.hidden2 = 4;
  c.attention = 3;
  c.seed = 17;
  c.patience = 0;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("detection metrics") {
  // tp / (tp + fp) = 0.968 and tp / (tp + fn) = 0.957 exactly.
  const DetectionCounts counts{926376, 0, 30624, 41624};
  const DetectionMetrics m = detection_metrics(counts);
  CHECK(m.precision == doctest::Approx(0.968).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.957).epsilon(1e-12));
  CHECK(std::abs(m.f1 - 0.96247) < 5e-6);
  CHECK(m.f1 == doctest::Approx(2 * 0.968 * 0.957 / (0.968 + 0.957)).epsilon(1e-12));
  CHECK_FALSE(m.degenerate);

  const DetectionMetrics perfect = detection_metrics({10, 5, 0, 0});
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  const DetectionMetrics none = detection_metrics({0, 5, 3, 4});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.degenerate);
}

TEST_CASE("counts match a brute-force recount") {
  nn::Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Labeled l = random_labeled(rng, 300);
    const double theta = rng.uniform(0.0, 1.3);
    const DetectionCounts c = count_detections(l.scores, l.is_fault, theta);
    CHECK(c == brute_counts(l, theta));
    CHECK(c.total() == l.scores.size());
    const DetectionMetrics m = detection_metrics(c);
    if (c.tp + c.fp > 0 && c.tp + c.fn > 0 && c.tp > 0) {
      const double p = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
      const double r = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
      CHECK(m.precision == p);
      CHECK(m.recall == r);
      CHECK(m.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-14));
    }
  }
}

TEST_CASE("threshold sweep") {
  SUBCASE("separated scores pick the middle of the gap") {
    const std::vector<double> s{0.1, 0.2, 0.3, 0.7, 0.8};
    const std::vector<bool> f{false, false, false, true, true};
    const ThresholdSweep sw = sweep_threshold(s, f);
    CHECK(sw.theta == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sw.curve[sw.best_index].metrics.f1 == 1.0);
  }
  SUBCASE("candidates") {
    const std::vector<double> s{0.4, 0.2, 0.2, 1.0};
    const std::vector<bool> f{true, false, true, false};
    const ThresholdSweep sw = sweep_threshold(s, f);
    std::vector<double> thetas;
    for (const auto& p : sw.curve) thetas.push_back(p.theta);
    CHECK(thetas == std::vector<double>{0.1, 0.30000000000000004, 0.7, 1.0});
    CHECK(std::is_sorted(thetas.begin(), thetas.end()));
  }
  SUBCASE("ties go to the smaller threshold") {
    // Both 0.5 and 1.5 give F1 = 2/3.
    const std::vector<double> s{0.0, 1.0, 2.0};
    const std::vector<bool> f{false, true, false};
    const ThresholdSweep sw = sweep_threshold(s, f);
    double best = 0.0;
    for (const auto& p : sw.curve) best = std::max(best, p.metrics.f1);
    CHECK(sw.curve[sw.best_index].metrics.f1 == best);
    for (std::size_t i = 0; i < sw.best_index; ++i) CHECK(sw.curve[i].metrics.f1 < best);
  }
  SUBCASE("argmax over random inputs") {
    nn::Rng rng(2);
    for (int trial = 0; trial < 40; ++trial) {
      const Labeled l = random_labeled(rng, 250);
      const ThresholdSweep sw = sweep_threshold(l.scores, l.is_fault);
      std::set<double> distinct(l.scores.begin(), l.scores.end());
      CHECK(sw.curve.size() == distinct.size() + 1);
      const double chosen = detection_metrics(brute_counts(l, sw.theta)).f1;
      CHECK(chosen == sw.curve[sw.best_index].metrics.f1);
      for (const auto& p : sw.curve) {
        CHECK(p.counts == brute_counts(l, p.theta));
        CHECK(chosen >= p.metrics.f1);
      }
      // Every threshold, not only the candidates, does no better.
      for (double theta = -0.1; theta < 1.5; theta += 0.0137) {
        CHECK(detection_metrics(brute_counts(l, theta)).f1 <= chosen);
      }
    }
  }
  SUBCASE("single class is rejected") {
    const std::vector<double> s{0.1, 0.2};
    CHECK_THROWS_AS(sweep_threshold(s, std::vector<bool>{false, false}), ContractError);
    CHECK_THROWS_AS(sweep_threshold(s, std::vector<bool>{true}), ContractError);
  }
}

TEST_CASE("roc and auc") {
  const std::vector<double> s{0.1, 0.2, 0.3, 0.7, 0.8};
  const std::vector<bool> f{false, false, false, true, true};
  const RocCurve sep = roc_and_auc(s, f);
  CHECK(sep.auc == 1.0);
  CHECK(sep.points.size() == 5 + 2);
  CHECK(sep.points.front().false_positive_rate == 0.0);
  CHECK(sep.points.front().true_positive_rate == 0.0);
  CHECK(std::isinf(sep.points.front().threshold));
  CHECK(sep.points.back().false_positive_rate == 1.0);
  CHECK(sep.points.back().true_positive_rate == 1.0);

  nn::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Labeled l = random_labeled(rng, 100 + 60 * static_cast<std::size_t>(trial));
    const RocCurve roc = roc_and_auc(l.scores, l.is_fault);
    CHECK(std::abs(roc.auc - brute_pairwise_auc(l)) < 1e-9);
    CHECK(std::abs(mann_whitney_auc(l.scores, l.is_fault) - brute_pairwise_auc(l)) < 1e-9);
    std::set<double> distinct(l.scores.begin(), l.scores.end());
    CHECK(roc.points.size() == distinct.size() + 2);
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
      CHECK(roc.points[i].threshold < roc.points[i - 1].threshold);
      CHECK(roc.points[i].false_positive_rate >= roc.points[i - 1].false_positive_rate);
      CHECK(roc.points[i].true_positive_rate >= roc.points[i - 1].true_positive_rate);
    }
  }

  Labeled noise;
  for (int i = 0; i < 10000; ++i) {
    noise.scores.push_back(rng.uniform());
    noise.is_fault.push_back(rng.uniform() < 0.5);
  }
  CHECK(std::abs(roc_and_auc(noise.scores, noise.is_fault).auc - 0.5) <= 0.02);
  CHECK_THROWS_AS(roc_and_auc(s, std::vector<bool>(5, true)), ContractError);
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(spearman(x, std::vector<double>{2, 4, 6, 8, 10}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(x, std::vector<double>{1, 1, 1, 1, 1}) == 0.0);
  // Ranks with ties: y ranks = 1.5, 1.5, 3, 4, 5.
  const double r = spearman(x, std::vector<double>{0, 0, 1, 2, 3});
  CHECK(r == doctest::Approx(0.9746794344808963).epsilon(1e-12));
}

TEST_CASE("snr bins") {
  CHECK(snr_bin_index(0.0) == 0u);
  CHECK(snr_bin_index(4.999) == 0u);
  CHECK(snr_bin_index(5.0) == 1u);
  CHECK(snr_bin_index(29.9) == 5u);
  CHECK(snr_bin_index(30.0) == 5u);
  CHECK_FALSE(snr_bin_index(30.5).has_value());
  CHECK_FALSE(snr_bin_index(-0.1).has_value());
  CHECK(snr_bin_low(2) == 10.0);
  CHECK(snr_bin_high(2) == 15.0);
}

TEST_CASE("diagnosis report") {
  std::vector<SequenceSample> samples;
  std::vector<DiagPrediction> perfect;
  const Label labels[] = {Label::fiber_cut, Label::fiber_tapping, Label::bad_splice, Label::dirty_connector};
  for (int i = 0; i < 40; ++i) {
    SequenceSample s;
    s.label = labels[i % 4];
    s.position_index = static_cast<std::size_t>(2 + i % 20);
    s.snr_db = i < 20 ? 2.0 : 22.0;
    samples.push_back(s);
    perfect.push_back({s.label, *s.position_index});
  }
  const DiagReport p = diag_report(samples, perfect);
  CHECK(p.accuracy == 1.0);
  CHECK(p.rmse_index == 0.0);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(p.confusion[r][c] == (r == c ? 10u : 0u));
  }
  REQUIRE(p.bins.size() == 2);
  CHECK(p.bins[0].bin == 0);
  CHECK(p.bins[1].bin == 4);

  std::vector<DiagPrediction> off = perfect;
  off[0].label = Label::dirty_connector;
  off[0].position_index += 3;
  off[25].position_index -= 1;
  const DiagReport o = diag_report(samples, off);
  CHECK(o.accuracy == doctest::Approx(39.0 / 40.0));
  CHECK(o.confusion[0][3] == 1);
  CHECK(o.rmse_index == doctest::Approx(std::sqrt(10.0 / 40.0)));
  CHECK(o.rmse_m == doctest::Approx(o.rmse_index * otdr::kMetersPerSample));
  CHECK(o.bins[0].rmse_index == doctest::Approx(std::sqrt(9.0 / 20.0)));
  CHECK(o.bins[1].rmse_index == doctest::Approx(std::sqrt(1.0 / 20.0)));
  CHECK(o.bins[0].accuracy == doctest::Approx(19.0 / 20.0));
  CHECK(*o.class_accuracy[0] == doctest::Approx(9.0 / 10.0));
  for (std::size_t r = 0; r < 4; ++r) {
    std::size_t row = 0;
    for (std::size_t c = 0; c < 4; ++c) row += o.confusion[r][c];
    CHECK(row == 10);
  }
  CHECK_THROWS_AS(diag_report(samples, std::vector<DiagPrediction>(3)), ContractError);
}

TEST_CASE("training config") {
  TrainConfig c;
  CHECK(c.epochs == 100);
  CHECK(c.batch_size == 64);
  CHECK(c.adam.learning_rate == 1e-3);
  CHECK(c.lambda1 == 1.0);
  CHECK(c.lambda2 == 1.0);
  CHECK(c.patience == 10);
  CHECK_NOTHROW(c.validate());
  const TrainConfig parsed = train_config_from_json(R"({"epochs": 3, "learning_rate": 0.01, "lambda2": 0.5})");
  CHECK(parsed.epochs == 3);
  CHECK(parsed.adam.learning_rate == 0.01);
  CHECK(parsed.lambda2 == 0.5);
  CHECK(train_config_from_json(to_json(parsed)) == parsed);
  CHECK_THROWS_AS(train_config_from_json(R"({"epochz": 3})"), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(R"({"lambda1": -1})"), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(R"({"batch_size": 0})"), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(R"({"beta1": 1.0})"), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(R"({"epochs": "many"})"), ConfigError);
}

TEST_CASE("autoencoder training") {
  const otdr::Dataset ds = detection_data(200, 40, 4);
  TrainConfig c = small_config();
  c.epochs = 8;
  const AeTrainResult r = train_ae(ds, c);
  REQUIRE(r.history.train_loss.size() == 8);
  CHECK(r.history.train_loss.back() < r.history.train_loss.front());
  CHECK(r.model.meta.seed == c.seed);
  CHECK(r.model.meta.snr_min_db >= 0.0);
  CHECK(r.model.meta.snr_max_db <= 30.0);

  const AeTrainResult again = train_ae(ds, c);
  CHECK(again.model == r.model);
  CHECK(again.history.train_loss == r.history.train_loss);

  c.epochs = 0;
  const AeTrainResult untouched = train_ae(ds, c);
  models::AeModel fresh = models::AeModel::init(c.ae_architecture(), c.seed);
  fresh.meta = untouched.model.meta;
  CHECK(untouched.model == fresh);
  CHECK(untouched.history.train_loss.empty());

  std::vector<SequenceSample> mixed = ds.subset(otdr::Split::train);
  mixed.insert(mixed.begin() + 3, ds.samples.back());
  try {
    train_ae(mixed, {}, small_config());
    FAIL("expected a contract error");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("sample 3") != std::string::npos);
  }
}

TEST_CASE("early stopping keeps the best epoch") {
  const otdr::Dataset ds = detection_data(200, 40, 6);
  TrainConfig c = small_config();
  c.epochs = 30;
  c.patience = 2;
  c.adam.learning_rate = 0.05;
  std::vector<models::AeModel> snapshots;
  const AeTrainResult r = train_ae(ds, c);
  REQUIRE(!r.history.val_loss.empty());
  const auto best = std::min_element(r.history.val_loss.begin(), r.history.val_loss.end());
  CHECK(r.history.best_epoch == static_cast<std::size_t>(best - r.history.val_loss.begin()) + 1);
  std::vector<SequenceSample> val;
  for (const auto& s : ds.subset(otdr::Split::val)) {
    if (!s.is_fault()) val.push_back(s);
  }
  CHECK(ae_loss(r.model, val) == doctest::Approx(*best).epsilon(1e-12));
  if (r.history.stopped_early) CHECK(r.history.val_loss.size() == r.history.best_epoch + c.patience);
}

TEST_CASE("calibration and detection evaluation") {
  const otdr::Dataset ds = detection_data(300, 100, 8, 10.0);
  TrainConfig c = small_config();
  c.epochs = 15;
  c.adam.learning_rate = 3e-3;
  AeTrainResult r = train_ae(ds, c);
  const auto val = ds.subset(otdr::Split::val);
  const auto test = ds.subset(otdr::Split::test);
  CHECK_THROWS_WITH_AS(evaluate_detection(r.model, test), doctest::Contains("calibrate first"), ContractError);

  const ThresholdSweep sw = calibrate(r.model, val);
  REQUIRE(r.model.meta.theta.has_value());
  CHECK(*r.model.meta.theta == sw.theta);
  CHECK(sw.curve[sw.best_index].theta == sw.theta);
  models::AeModel twice = r.model;
  calibrate(twice, val);
  CHECK(twice.meta.theta == r.model.meta.theta);

  const DetectionReport rep = evaluate_detection(r.model, test);
  CHECK(rep.theta == *r.model.meta.theta);
  CHECK(rep.counts.total() == test.size());
  // Matches evaluation after a save/load round trip.
  const models::AeModel loaded = models::decode_ae_model(models::encode_model(r.model));
  const DetectionReport rep2 = evaluate_detection(loaded, test);
  CHECK(rep2.counts == rep.counts);
  CHECK(rep2.roc.auc == rep.roc.auc);
}

TEST_CASE("diagnosis training") {
  const otdr::Dataset ds = diagnosis_data(200, 3);
  TrainConfig c = small_config();
  const DiagTrainResult a = train_diag(ds, c);
  const DiagTrainResult b = train_diag(ds, c);
  CHECK(a.history.train_loss == b.history.train_loss);
  CHECK(a.history.val_loss == b.history.val_loss);
  CHECK(a.model == b.model);

  c.lambda2 = 0.0;
  const DiagTrainResult cls_only = train_diag(ds, c);
  const models::DiagModel init = models::DiagModel::init(c.diag_architecture(), c.seed);
  CHECK(cls_only.model.position_head == init.position_head);
  CHECK_FALSE(cls_only.model.class_head == init.class_head);
  CHECK(cls_only.model.meta.lambda2 == 0.0);

  std::vector<SequenceSample> with_normal = ds.subset(otdr::Split::train);
  SequenceSample normal;
  with_normal.push_back(normal);
  CHECK_THROWS_AS(train_diag(with_normal, {}, small_config()), ContractError);
}

TEST_CASE("diagnosis smoke run learns the classes") {
  const otdr::Dataset ds = diagnosis_data(400, 11, 20.0);
  TrainConfig c;
  c.hidden1 = 8;
  c.hidden2 = 4;
  c.attention = 4;
  c.epochs = 60;
  c.batch_size = 16;
  c.adam.learning_rate = 1e-2;
  c.patience = 0;
  c.seed = 2;
  const auto train = ds.subset(otdr::Split::train);
  const DiagTrainResult r = train_diag(train, {}, c);
  const DiagReport rep = evaluate_diag(r.model, train);
  CHECK(rep.accuracy >= 0.9);
  CHECK(r.history.train_loss.back() < r.history.train_loss.front());
}

TEST_CASE("reports") {
  nn::Rng rng(4);
  const Labeled l = random_labeled(rng, 120);
  EvalReport rep;
  rep.sweep = sweep_threshold(l.scores, l.is_fault);
  rep.detection = detection_report(l.scores, l.is_fault, rep.sweep->theta);
  std::vector<SequenceSample> samples;
  std::vector<DiagPrediction> preds;
  for (int i = 0; i < 50; ++i) {
    SequenceSample s;
    s.label = otdr::fault_class_from_index(static_cast<std::size_t>(i % 4));
    s.position_index = static_cast<std::size_t>(i % 28);
    s.snr_db = static_cast<double>(i % 31);
    samples.push_back(s);
    preds.push_back({otdr::fault_class_from_index(static_cast<std::size_t>((i * 7) % 4)), static_cast<std::size_t>((i * 3) % 30)});
  }
  rep.diagnosis = diag_report(samples, preds);

  const std::string roc = roc_csv(rep.detection->roc);
  std::set<double> distinct(l.scores.begin(), l.scores.end());
  CHECK(line_count(roc) == 1 + distinct.size() + 2);
  CHECK(roc.substr(0, roc.find('\n')) == "threshold,false_positive_rate,true_positive_rate");

  const std::string conf = confusion_csv(*rep.diagnosis);
  std::istringstream in(conf);
  std::string line;
  std::getline(in, line);
  CHECK(line == "true_class,fiber_cut,fiber_tapping,bad_splice,dirty_connector,total");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    CHECK(cell == otdr::to_string(otdr::fault_class_from_index(row)));
    std::size_t sum = 0;
    for (int k = 0; k < 4; ++k) {
      std::getline(ls, cell, ',');
      sum += std::stoul(cell);
    }
    std::getline(ls, cell, ',');
    CHECK(sum == std::stoul(cell));
    std::size_t expected = 0;
    for (const auto& s : samples) expected += otdr::fault_class_index(s.label) == row;
    CHECK(sum == expected);
    ++row;
  }
  CHECK(row == 4);

  const std::string curve = threshold_curve_csv(*rep.sweep);
  CHECK(curve.find(format_double(rep.sweep->theta) + ",") != std::string::npos);
  CHECK(line_count(curve) == rep.sweep->curve.size() + 1);

  const auto dir = std::filesystem::temp_directory_path() / "fibermon_test_reports";
  std::filesystem::remove_all(dir);
  const auto files = emit_report(rep, dir / "a");
  const auto files2 = emit_report(rep, dir / "b");
  REQUIRE(files.size() == files2.size());
  CHECK(files.size() >= 6);
  for (std::size_t i = 0; i < files.size(); ++i) {
    CHECK(files[i].filename() == files2[i].filename());
    CHECK(slurp(files[i]) == slurp(files2[i]));
  }
  const std::string summary = slurp(dir / "a" / "summary.txt");
  CHECK(summary.find("0.1021") != std::string::npos);
  std::filesystem::remove_all(dir);

  TrainHistory h;
  h.train_loss = {1.5, 0.25};
  h.val_loss = {2.0, 0.5};
  CHECK(loss_history_csv(h) == "epoch,train_loss,val_loss\n1,1.5,2\n2,0.25,0.5\n");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
