// SPDX-License-Identifier: Apache-2.0
#include "fibermon/models/diag_model.hpp"

#include "fibermon/error.hpp"
#include "fibermon/nn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fibermon::models {

using nn::Matrix;
using Index = Eigen::Index;

namespace {

constexpr Index kSteps = static_cast<Index>(kModelSteps);
constexpr std::size_t kBatch = 256;
constexpr double kMaxPositionIndex = static_cast<double>(otdr::kSequenceLength - 1);

Diagnosis diagnosis_from_column(const DiagBatchOutput& out, Index b) {
  Diagnosis d;
  d.class_probs = nn::to_tensor(out.class_probs.col(b));
  d.alphas = nn::to_tensor(out.alphas.col(b));
  d.position_norm = std::clamp(out.position(0, b), 0.0, 1.0);
  d.position_index = predicted_position_index(d.position_norm);
  Index best = 0;
  out.class_probs.col(b).maxCoeff(&best);
  d.label = otdr::fault_class_from_index(static_cast<std::size_t>(best));
  return d;
}

}  // namespace

DiagModel DiagModel::zeros(const DiagArchitecture& arch) {
  DiagModel m;
  m.arch = arch;
  m.bigru1 = nn::BiGruParams::zeros(1, arch.hidden1);
  m.bigru2 = nn::BiGruParams::zeros(arch.hidden1, arch.hidden2);
  m.attention = nn::AttentionParams::zeros(arch.hidden2, arch.attention);
  m.class_head = nn::DenseParams::zeros(arch.hidden2, otdr::kFaultClassCount);
  m.position_head = nn::DenseParams::zeros(arch.hidden2, 1);
  return m;
}

DiagModel DiagModel::init(const DiagArchitecture& arch, std::uint64_t seed) {
  if (arch.hidden1 == 0 || arch.hidden2 == 0 || arch.attention == 0) {
    throw ConfigError("diagnosis model sizes must be positive");
  }
  nn::Rng rng(nn::derive_seed(seed, "init.diag"));
  DiagModel m;
  m.arch = arch;
  m.bigru1 = nn::BiGruParams::init(1, arch.hidden1, rng);
  m.bigru2 = nn::BiGruParams::init(arch.hidden1, arch.hidden2, rng);
  m.attention = nn::AttentionParams::init(arch.hidden2, arch.attention, rng);
  m.class_head = nn::DenseParams::init(arch.hidden2, otdr::kFaultClassCount, rng);
  m.position_head = nn::DenseParams::init(arch.hidden2, 1, rng);
  m.meta.seed = seed;
  return m;
}

void DiagModel::validate() const {
  bigru1.validate();
  bigru2.validate();
  attention.validate();
  class_head.validate();
  position_head.validate();
  const bool ok = bigru1.in() == 1 && bigru1.hidden() == arch.hidden1 && bigru2.in() == arch.hidden1 &&
                  bigru2.hidden() == arch.hidden2 && attention.hidden() == arch.hidden2 &&
                  attention.attn() == arch.attention && class_head.in() == arch.hidden2 &&
                  class_head.out() == otdr::kFaultClassCount && position_head.in() == arch.hidden2 &&
                  position_head.out() == 1;
  if (!ok) throw ShapeError("diagnosis model layer shapes do not match its architecture");
}

DiagBatchOutput diag_forward_batch(const DiagModel& model, const Matrix& inputs, DiagCache* cache) {
  if (inputs.rows() != 1 || inputs.cols() % kSteps != 0) throw ShapeError("diag_forward: inputs must be [1 x 31*B]");
  const Matrix h1 = nn::bigru_forward(model.bigru1, inputs, kSteps, cache ? &cache->bigru1 : nullptr);
  const Matrix h2 = nn::bigru_forward(model.bigru2, h1, kSteps, cache ? &cache->bigru2 : nullptr);
  DiagBatchOutput out;
  const Matrix context =
      nn::attention_forward(model.attention, h2, kSteps, cache ? &cache->attention : nullptr, &out.alphas);
  out.class_probs = nn::dense_forward(model.class_head, context, nn::Activation::softmax,
                                      cache ? &cache->class_head : nullptr);
  out.position = nn::dense_forward(model.position_head, context, nn::Activation::identity,
                                   cache ? &cache->position_head : nullptr);
  return out;
}

void diag_backward(const DiagModel& model, const DiagCache& cache, const Matrix& d_probs, const Matrix& d_position,
                   DiagModel& grad) {
  Matrix d_context = nn::dense_backward(model.class_head, cache.class_head, d_probs, grad.class_head);
  d_context += nn::dense_backward(model.position_head, cache.position_head, d_position, grad.position_head);
  const Matrix d_h2 = nn::attention_backward(model.attention, cache.attention, d_context, grad.attention);
  const Matrix d_h1 = nn::bigru_backward(model.bigru2, cache.bigru2, d_h2, grad.bigru2);
  nn::bigru_backward(model.bigru1, cache.bigru1, d_h1, grad.bigru1);
}

DiagOutput diag_forward(const DiagModel& model, const nn::Tensor& input) {
  input.require_finite("diag_forward");
  const nn::Tensor* in = &input;
  const DiagBatchOutput out = diag_forward_batch(model, stack_inputs(std::span<const nn::Tensor>(in, 1)));
  DiagOutput res;
  res.class_probs = nn::to_tensor(out.class_probs);
  res.position_norm = std::clamp(out.position(0, 0), 0.0, 1.0);
  res.alphas = nn::to_tensor(out.alphas);
  return res;
}

std::size_t predicted_position_index(double position_norm) {
  const double scaled = std::floor(std::clamp(position_norm, 0.0, 1.0) * kMaxPositionIndex + 0.5);
  return static_cast<std::size_t>(std::clamp(scaled, 0.0, kMaxPositionIndex));
}

double position_target(std::size_t index) { return static_cast<double>(index) / kMaxPositionIndex; }

Diagnosis diagnose(const DiagModel& model, const otdr::SequenceSample& sample) {
  return diagnose_all(model, std::span<const otdr::SequenceSample>(&sample, 1)).front();
}

std::vector<Diagnosis> diagnose_all(const DiagModel& model, std::span<const otdr::SequenceSample> samples) {
  std::vector<Diagnosis> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += kBatch) {
    const auto chunk = samples.subspan(start, std::min(kBatch, samples.size() - start));
    const DiagBatchOutput res = diag_forward_batch(model, build_input_batch(chunk));
    for (Index b = 0; b < static_cast<Index>(chunk.size()); ++b) out.push_back(diagnosis_from_column(res, b));
  }
  return out;
}

}  // namespace fibermon::models
