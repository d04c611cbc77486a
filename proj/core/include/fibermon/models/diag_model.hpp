// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fibermon/models/ae_model.hpp"
#include "fibermon/nn/attention.hpp"
#include "fibermon/nn/dense.hpp"
#include "fibermon/nn/gru.hpp"
#include "fibermon/otdr/fiber.hpp"
#include "fibermon/otdr/sequence.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fibermon::models {

struct DiagArchitecture {
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 32;
  std::size_t attention = 32;
  bool operator==(const DiagArchitecture&) const = default;
};

struct DiagMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  bool operator==(const DiagMetadata&) const = default;
};

/// Attention-based BiGRU with hard parameter sharing: two BiGRU layers and an
/// attention pooling layer feed one context vector to a softmax class head
/// and a linear position head.
struct DiagModel {
  DiagArchitecture arch;
  nn::BiGruParams bigru1;
  nn::BiGruParams bigru2;
  nn::AttentionParams attention;
  nn::DenseParams class_head;
  nn::DenseParams position_head;
  DiagMetadata meta;

  static DiagModel zeros(const DiagArchitecture& arch);
  static DiagModel init(const DiagArchitecture& arch, std::uint64_t seed);
  DiagModel zeros_like() const { return zeros(arch); }
  void validate() const;

  template <class F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <class F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  bool operator==(const DiagModel&) const = default;

 private:
  template <class Self, class F>
  static void visit_impl(Self& self, F& f) {
    self.bigru1.visit([&](const std::string& n, auto& t) { f("bigru1." + n, t); });
    self.bigru2.visit([&](const std::string& n, auto& t) { f("bigru2." + n, t); });
    self.attention.visit([&](const std::string& n, auto& t) { f("attention." + n, t); });
    self.class_head.visit([&](const std::string& n, auto& t) { f("class_head." + n, t); });
    self.position_head.visit([&](const std::string& n, auto& t) { f("position_head." + n, t); });
  }
};

struct DiagCache {
  nn::BiGruCache bigru1, bigru2;
  nn::AttentionCache attention;
  nn::DenseCache class_head, position_head;
};

struct DiagBatchOutput {
  nn::Matrix class_probs;  // [4 x B]
  nn::Matrix position;     // [1 x B], unclamped regression output
  nn::Matrix alphas;       // [31 x B]
};

DiagBatchOutput diag_forward_batch(const DiagModel& model, const nn::Matrix& inputs, DiagCache* cache = nullptr);
/// Adds gradients into `grad` given d/d(class_probs) and d/d(position).
void diag_backward(const DiagModel& model, const DiagCache& cache, const nn::Matrix& d_probs,
                   const nn::Matrix& d_position, DiagModel& grad);

struct DiagOutput {
  nn::Tensor class_probs;  // [4]
  double position_norm = 0.0;  // clamped to [0, 1]
  nn::Tensor alphas;       // [31]
};

/// One input from build_input.
DiagOutput diag_forward(const DiagModel& model, const nn::Tensor& input);

/// round(position_norm * 29) with halves rounded up, clamped to [0, 29].
std::size_t predicted_position_index(double position_norm);

/// Regression target for a fault at `index`: index / 29.
double position_target(std::size_t index);

struct Diagnosis {
  otdr::Label label = otdr::Label::fiber_cut;
  std::size_t position_index = 0;
  double position_norm = 0.0;
  nn::Tensor class_probs;
  nn::Tensor alphas;
};

Diagnosis diagnose(const DiagModel& model, const otdr::SequenceSample& sample);
/// Batched diagnose over many samples.
std::vector<Diagnosis> diagnose_all(const DiagModel& model, std::span<const otdr::SequenceSample> samples);

}  // namespace fibermon::models
