#include "doctest.h"
#include "gradient_suites.hpp"

#include "fibermon/error.hpp"
#include "fibermon/models/model_io.hpp"
#include "fibermon/otdr/dataset.hpp"

#include <cmath>
#include <filesystem>

using namespace fibermon;
using namespace fibermon::models;
using otdr::Label;
using otdr::SequenceSample;

namespace {

std::vector<SequenceSample> samples(std::size_t n, std::uint64_t seed) {
  otdr::GeneratorConfig c = otdr::GeneratorConfig::detection_defaults();
  c.normal_count = n / 2;
  c.fault_count = n - n / 2;
  return otdr::generate_dataset(c, seed).samples;
}

AeModel small_ae(std::uint64_t seed) { return AeModel::init({8, 4}, seed); }
DiagModel small_diag(std::uint64_t seed) { return DiagModel::init({6, 4, 3}, seed); }

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "fibermon_test_models";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("build_input") {
  SequenceSample s;
  for (std::size_t i = 0; i < 30; ++i) s.points[i] = static_cast<double>(i) / 29.0;
  s.snr_db = 40.0;
  nn::Tensor x = build_input(s);
  CHECK(x.shape() == nn::Shape{31, 1});
  CHECK(x[30] == 1.0);
  for (std::size_t i = 0; i < 30; ++i) CHECK(x[i] == s.points[i]);
  s.snr_db = 0.0;
  CHECK(build_input(s)[30] == 0.0);
  s.snr_db = 10.0;
  CHECK(build_input(s)[30] == 0.25);

  const auto batch = samples(5, 3);
  const nn::Matrix m = build_input_batch(batch);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const nn::Tensor one = build_input(batch[b]);
    for (std::size_t t = 0; t < 31; ++t) CHECK(m(0, static_cast<Eigen::Index>(t * batch.size() + b)) == one[t]);
  }
}

TEST_CASE("autoencoder shapes and zero model") {
  const AeModel full = AeModel::init({}, 1);
  CHECK(full.encoder1.in() == 1);
  CHECK(full.encoder1.hidden() == 64);
  CHECK(full.encoder2.hidden() == 32);
  CHECK(full.decoder1.in() == 32);
  CHECK(full.decoder1.hidden() == 32);
  CHECK(full.decoder2.hidden() == 64);
  CHECK(full.output.out() == 1);
  CHECK_NOTHROW(full.validate());

  const AeModel zero = AeModel::zeros({});
  const auto s = samples(2, 2).front();
  const nn::Tensor y = ae_forward(zero, build_input(s));
  CHECK(y.shape() == nn::Shape{31, 1});
  for (double v : y.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(ae_forward(zero, nn::Tensor({30, 1})), ShapeError);
}

TEST_CASE("anomaly scores") {
  const AeModel m = small_ae(4);
  const auto data = samples(300, 9);
  const std::vector<double> scores = anomaly_scores(m, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(scores[i] >= 0.0);
    const nn::Tensor x = build_input(data[i]);
    const nn::Tensor y = ae_forward(m, x);
    double direct = 0.0;
    for (std::size_t t = 0; t < 31; ++t) direct += (x[t] - y[t]) * (x[t] - y[t]);
    CHECK(scores[i] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(anomaly_score(m, data[i]) == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK(anomaly_scores(m, data) == scores);
}

TEST_CASE("score of a perfect reconstruction is zero") {
  // With zero parameters the reconstruction is zero, so an all-zero input at
  // 0 dB reconstructs exactly.
  SequenceSample s;
  s.snr_db = 0.0;
  s.label = Label::normal;
  CHECK(anomaly_score(AeModel::zeros({4, 2}), s) == 0.0);
}

TEST_CASE("detection rule") {
  CHECK(detect_score(0.10, 0.09) == Verdict::anomalous);
  CHECK(detect_score(0.05, 0.09) == Verdict::normal);
  CHECK(detect_score(0.09, 0.09) == Verdict::normal);
  CHECK_THROWS_AS(detect_score(0.1, -0.01), ContractError);

  const AeModel m = small_ae(5);
  const auto data = samples(200, 10);
  const std::vector<double> scores = anomaly_scores(m, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double theta = scores[(i * 7) % scores.size()];
    CHECK((detect(m, data[i], theta) == Verdict::anomalous) == (scores[i] > theta));
    CHECK(detect(m, data[i], anomaly_score(m, data[i])) == Verdict::normal);
  }
}

TEST_CASE("diagnosis model outputs") {
  const DiagModel full = DiagModel::init({}, 2);
  CHECK(full.bigru1.in() == 1);
  CHECK(full.bigru1.hidden() == 64);
  CHECK(full.bigru2.hidden() == 32);
  CHECK(full.attention.attn() == 32);
  CHECK(full.class_head.out() == 4);
  CHECK(full.position_head.out() == 1);

  const DiagModel zero = DiagModel::zeros({});
  const auto s = samples(2, 1).back();
  const DiagOutput z = diag_forward(zero, build_input(s));
  for (double p : z.class_probs.values()) CHECK(p == 0.25);
  CHECK(z.position_norm == 0.0);

  const DiagModel m = small_diag(3);
  nn::Rng rng(6);
  DiagModel wild = m;
  fibermon::testing::randomize(wild, rng, 3.0);
  for (const auto& sample : samples(60, 12)) {
    for (const DiagModel* model : {&m, static_cast<const DiagModel*>(&wild)}) {
      const DiagOutput o = diag_forward(*model, build_input(sample));
      double ps = 0.0, as = 0.0;
      for (double p : o.class_probs.values()) {
        CHECK(p >= 0.0);
        ps += p;
      }
      for (double a : o.alphas.values()) {
        CHECK(a >= 0.0);
        as += a;
      }
      CHECK(o.alphas.size() == 31);
      CHECK(std::abs(ps - 1.0) < 1e-9);
      CHECK(std::abs(as - 1.0) < 1e-9);
      CHECK(o.position_norm >= 0.0);
      CHECK(o.position_norm <= 1.0);
      CHECK(predicted_position_index(o.position_norm) <= 29);
    }
  }
}

TEST_CASE("diagnose agrees with the single-sample forward") {
  const DiagModel m = small_diag(8);
  const auto data = samples(300, 13);
  const auto all = diagnose_all(m, data);
  REQUIRE(all.size() == data.size());
  for (std::size_t i = 0; i < data.size(); i += 7) {
    const DiagOutput o = diag_forward(m, build_input(data[i]));
    CHECK(all[i].position_norm == doctest::Approx(o.position_norm).epsilon(1e-12));
    std::size_t best = 0;
    for (std::size_t k = 1; k < 4; ++k) {
      if (o.class_probs[k] > o.class_probs[best]) best = k;
    }
    CHECK(otdr::fault_class_index(all[i].label) == best);
    CHECK(all[i].position_index == predicted_position_index(o.position_norm));
  }
}

TEST_CASE("position index rounding") {
  CHECK(predicted_position_index(0.0) == 0);
  CHECK(predicted_position_index(1.0) == 29);
  CHECK(predicted_position_index(0.5) == 15);
  CHECK(predicted_position_index(-3.0) == 0);
  CHECK(predicted_position_index(7.0) == 29);
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(position_target(i) == static_cast<double>(i) / 29.0);
    CHECK(predicted_position_index(position_target(i)) == i);
  }
}

TEST_CASE("initialization is seeded") {
  CHECK(small_ae(3) == small_ae(3));
  CHECK_FALSE(small_ae(3) == small_ae(4));
  CHECK(small_diag(3) == small_diag(3));
  CHECK_THROWS_AS(AeModel::init({0, 4}, 1), ConfigError);
  CHECK_THROWS_AS(DiagModel::init({4, 0, 2}, 1), ConfigError);
}

TEST_CASE("autoencoder files round-trip") {
  const auto dir = temp_dir();
  AeModel m = small_ae(21);
  m.meta.theta = 0.0917;
  m.meta.snr_min_db = 1.5;
  m.meta.config_hash = "abc";
  const auto path = dir / "ae.fmm";
  save_model(m, path);
  const AeModel back = load_ae_model(path);
  CHECK(back == m);
  CHECK(back.meta.theta == 0.0917);
  const auto data = samples(100, 30);
  CHECK(anomaly_scores(back, data) == anomaly_scores(m, data));
  CHECK(encode_model(back) == encode_model(m));

  AeModel uncal = small_ae(2);
  CHECK(decode_ae_model(encode_model(uncal)).meta.theta == std::nullopt);
  CHECK(peek_model_kind(encode_model(uncal)) == ModelKind::autoencoder);
}

TEST_CASE("diagnosis files round-trip") {
  const auto dir = temp_dir();
  DiagModel m = small_diag(22);
  m.meta.lambda1 = 0.7;
  m.meta.lambda2 = 2.5;
  const auto path = dir / "diag.fmm";
  save_model(m, path);
  const DiagModel back = load_diag_model(path);
  CHECK(back == m);
  CHECK(peek_model_kind(read_file_bytes(path)) == ModelKind::diagnosis);
  CHECK_THROWS_AS(load_ae_model(path), FormatError);
}

TEST_CASE("corrupt model files are rejected") {
  const std::string good = encode_model(small_ae(1));

  std::string bumped = good;
  bumped[8] = static_cast<char>(kModelFormatVersion + 1);
  try {
    decode_ae_model(bumped);
    FAIL("expected a version error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  std::string magic = good;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_ae_model(magic), FormatError);
  CHECK_THROWS_AS(decode_ae_model(good.substr(0, good.size() - 8)), FormatError);
  CHECK_THROWS_AS(decode_ae_model(good + "x"), FormatError);
  CHECK_THROWS_AS(decode_ae_model(good.substr(0, 10)), FormatError);

  AeModel inconsistent = small_ae(1);
  inconsistent.arch.hidden1 = 5;
  CHECK_THROWS_AS(decode_ae_model(encode_model(inconsistent)), ShapeError);

  CHECK_THROWS_AS(load_ae_model(temp_dir() / "does_not_exist.fmm"), IoError);
}

TEST_CASE("payload is little-endian float64") {
  AeModel m = AeModel::zeros({1, 1});
  m.output.bias[0] = 1.0;
  const std::string bytes = encode_model(m);
  // 1.0 == 0x3FF0000000000000 and the output bias is the last block.
  const std::string tail = bytes.substr(bytes.size() - 8);
  CHECK(static_cast<unsigned char>(tail[7]) == 0x3F);
  CHECK(static_cast<unsigned char>(tail[6]) == 0xF0);
  CHECK(bytes.substr(0, 8) == "FIBERMON");
}
