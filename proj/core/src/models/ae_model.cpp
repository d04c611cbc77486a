// SPDX-License-Identifier: Apache-2.0
#include "fibermon/models/ae_model.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/rng.hpp"

#include <algorithm>

namespace fibermon::models {

using nn::Matrix;
using Index = Eigen::Index;

namespace {

constexpr Index kSteps = static_cast<Index>(kModelSteps);
constexpr std::size_t kScoreBatch = 256;

}  // namespace

nn::Tensor build_input(const otdr::SequenceSample& sample) {
  nn::Tensor x({kModelSteps, 1});
  const auto points = sample.points.values();
  if (points.size() != otdr::kSequenceLength) throw ShapeError("build_input: sample must hold 30 points");
  std::copy(points.begin(), points.end(), x.values().begin());
  x[otdr::kSequenceLength] = sample.snr_db / kSnrScale;
  return x;
}

Matrix build_input_batch(std::span<const otdr::SequenceSample> samples) {
  const auto batch = static_cast<Index>(samples.size());
  Matrix x(1, kSteps * batch);
  for (Index b = 0; b < batch; ++b) {
    const auto& s = samples[static_cast<std::size_t>(b)];
    const auto points = s.points.values();
    if (points.size() != otdr::kSequenceLength) throw ShapeError("build_input_batch: sample must hold 30 points");
    for (Index t = 0; t + 1 < kSteps; ++t) x(0, t * batch + b) = points[static_cast<std::size_t>(t)];
    x(0, (kSteps - 1) * batch + b) = s.snr_db / kSnrScale;
  }
  return x;
}

Matrix stack_inputs(std::span<const nn::Tensor> inputs) {
  const auto batch = static_cast<Index>(inputs.size());
  Matrix x(1, kSteps * batch);
  for (Index b = 0; b < batch; ++b) {
    const nn::Tensor& in = inputs[static_cast<std::size_t>(b)];
    if (in.shape() != nn::Shape{kModelSteps, 1}) {
      throw ShapeError("model input must be [31 x 1], got " + nn::shape_string(in.shape()));
    }
    for (Index t = 0; t < kSteps; ++t) x(0, t * batch + b) = in[static_cast<std::size_t>(t)];
  }
  return x;
}

AeModel AeModel::zeros(const AeArchitecture& arch) {
  AeModel m;
  m.arch = arch;
  m.encoder1 = nn::GruParams::zeros(1, arch.hidden1);
  m.encoder2 = nn::GruParams::zeros(arch.hidden1, arch.hidden2);
  m.decoder1 = nn::GruParams::zeros(arch.hidden2, arch.hidden2);
  m.decoder2 = nn::GruParams::zeros(arch.hidden2, arch.hidden1);
  m.output = nn::DenseParams::zeros(arch.hidden1, 1);
  return m;
}

AeModel AeModel::init(const AeArchitecture& arch, std::uint64_t seed) {
  if (arch.hidden1 == 0 || arch.hidden2 == 0) throw ConfigError("autoencoder hidden sizes must be positive");
  nn::Rng rng(nn::derive_seed(seed, "init.ae"));
  AeModel m;
  m.arch = arch;
  m.encoder1 = nn::GruParams::init(1, arch.hidden1, rng);
  m.encoder2 = nn::GruParams::init(arch.hidden1, arch.hidden2, rng);
  m.decoder1 = nn::GruParams::init(arch.hidden2, arch.hidden2, rng);
  m.decoder2 = nn::GruParams::init(arch.hidden2, arch.hidden1, rng);
  m.output = nn::DenseParams::init(arch.hidden1, 1, rng);
  m.meta.seed = seed;
  return m;
}

void AeModel::validate() const {
  encoder1.validate();
  encoder2.validate();
  decoder1.validate();
  decoder2.validate();
  output.validate();
  const bool ok = encoder1.in() == 1 && encoder1.hidden() == arch.hidden1 && encoder2.in() == arch.hidden1 &&
                  encoder2.hidden() == arch.hidden2 && decoder1.in() == arch.hidden2 &&
                  decoder1.hidden() == arch.hidden2 && decoder2.in() == arch.hidden2 &&
                  decoder2.hidden() == arch.hidden1 && output.in() == arch.hidden1 && output.out() == 1;
  if (!ok) throw ShapeError("autoencoder layer shapes do not match its architecture");
}

Matrix ae_forward_batch(const AeModel& model, const Matrix& inputs, AeCache* cache) {
  if (inputs.rows() != 1 || inputs.cols() % kSteps != 0) throw ShapeError("ae_forward: inputs must be [1 x 31*B]");
  const Index batch = inputs.cols() / kSteps;
  const Matrix h1 = nn::gru_sequence_forward(model.encoder1, inputs, kSteps, nullptr, cache ? &cache->encoder1 : nullptr);
  const Matrix h2 = nn::gru_sequence_forward(model.encoder2, h1, kSteps, nullptr, cache ? &cache->encoder2 : nullptr);
  const Matrix code = h2.rightCols(batch);
  const Matrix zeros = Matrix::Zero(static_cast<Index>(model.decoder1.in()), kSteps * batch);
  const Matrix d1 = nn::gru_sequence_forward(model.decoder1, zeros, kSteps, &code, cache ? &cache->decoder1 : nullptr);
  const Matrix d2 = nn::gru_sequence_forward(model.decoder2, d1, kSteps, nullptr, cache ? &cache->decoder2 : nullptr);
  if (cache != nullptr) cache->batch = batch;
  return nn::dense_forward(model.output, d2, nn::Activation::identity, cache ? &cache->output : nullptr);
}

void ae_backward(const AeModel& model, const AeCache& cache, const Matrix& d_recon, AeModel& grad) {
  const Matrix d_d2 = nn::dense_backward(model.output, cache.output, d_recon, grad.output);
  const nn::GruSequenceInputGrads g_d2 = nn::gru_sequence_backward(model.decoder2, cache.decoder2, d_d2, grad.decoder2);
  const nn::GruSequenceInputGrads g_d1 =
      nn::gru_sequence_backward(model.decoder1, cache.decoder1, g_d2.d_inputs, grad.decoder1);
  Matrix d_h2 = Matrix::Zero(static_cast<Index>(model.encoder2.hidden()), kSteps * cache.batch);
  d_h2.rightCols(cache.batch) = g_d1.d_h0;
  const nn::GruSequenceInputGrads g_e2 = nn::gru_sequence_backward(model.encoder2, cache.encoder2, d_h2, grad.encoder2);
  nn::gru_sequence_backward(model.encoder1, cache.encoder1, g_e2.d_inputs, grad.encoder1);
}

nn::Tensor ae_forward(const AeModel& model, const nn::Tensor& input) {
  input.require_finite("ae_forward");
  const nn::Tensor* in = &input;
  const Matrix y = ae_forward_batch(model, stack_inputs(std::span<const nn::Tensor>(in, 1)));
  return nn::Tensor({kModelSteps, 1}, std::vector<double>(y.data(), y.data() + y.size()));
}

double anomaly_score(const AeModel& model, const otdr::SequenceSample& sample) {
  return anomaly_scores(model, std::span<const otdr::SequenceSample>(&sample, 1)).front();
}

std::vector<double> anomaly_scores(const AeModel& model, std::span<const otdr::SequenceSample> samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += kScoreBatch) {
    const auto chunk = samples.subspan(start, std::min(kScoreBatch, samples.size() - start));
    const Matrix x = build_input_batch(chunk);
    const Matrix y = ae_forward_batch(model, x);
    const auto batch = static_cast<Index>(chunk.size());
    for (Index b = 0; b < batch; ++b) {
      double s = 0.0;
      for (Index t = 0; t < kSteps; ++t) {
        const double d = x(0, t * batch + b) - y(0, t * batch + b);
        s += d * d;
      }
      scores.push_back(s);
    }
  }
  return scores;
}

Verdict detect_score(double score, double theta) {
  if (theta < 0.0) throw ContractError("detection threshold must be non-negative");
  return score > theta ? Verdict::anomalous : Verdict::normal;
}

Verdict detect(const AeModel& model, const otdr::SequenceSample& sample, double theta) {
  return detect_score(anomaly_score(model, sample), theta);
}

}  // namespace fibermon::models
